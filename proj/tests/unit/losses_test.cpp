/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tests/unit/losses_test.cpp
 *
 * Copyright 2026 The earfit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "earfit/core/error.hpp"
#include "earfit/data/synthetic.hpp"
#include "earfit/fitting/losses.hpp"
#include "earfit/projection/projection.hpp"

#include "support.hpp"

#include "gtest/gtest.h"

#include <random>

using namespace earfit;
using namespace earfit::fitting;

namespace {

Landmarks random_landmarks(std::mt19937_64& rng, double spread)
{
    std::uniform_real_distribution<double> u(0.0, spread);
    Landmarks x(kNumLandmarks, 2);
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        x(i, 0) = u(rng);
        x(i, 1) = u(rng);
    }
    return x;
}

data::CorpusOptions small_corpus(int size)
{
    data::CorpusOptions c;
    c.width = size;
    c.height = size;
    return c;
}

render::RasterConfig raster_for(const data::CorpusOptions& c)
{
    render::RasterConfig r;
    r.width = c.width;
    r.height = c.height;
    r.edge_sigma = c.edge_sigma;
    r.background = c.background;
    return r;
}

} // namespace

TEST(RegScale, KnotValuesAndContinuity)
{
    EXPECT_EQ(reg_scale(1.0), 0.0);
    EXPECT_NEAR(reg_scale(0.4), 0.01, 1e-15);
    EXPECT_EQ(reg_scale(2.0), 0.25);
    EXPECT_EQ(reg_scale(0.5), 0.0);
    EXPECT_EQ(reg_scale(1.5), 0.0);
    EXPECT_EQ(reg_scale_derivative(0.5), 0.0);
    EXPECT_EQ(reg_scale_derivative(1.5), 0.0);
    EXPECT_NEAR(reg_scale(0.5 - 1e-9), 0.0, 1e-15);
    EXPECT_NEAR(reg_scale_derivative(2.0), 1.0, 1e-15);
    EXPECT_NEAR(reg_scale_derivative(0.4), -0.2, 1e-15);
}

TEST(RegStatistical, SumOfSquares)
{
    EXPECT_EQ(reg_statistical(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(3)), 0.0);
    EXPECT_EQ(reg_statistical(3.0 * Eigen::VectorXd::Unit(4, 0), Eigen::VectorXd::Zero(3)), 9.0);
    const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(5, -1.0, 2.0);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(3, 0.5, 1.5);
    double expected = 0.0;
    for (double v : a)
    {
        expected += v * v;
    }
    for (double v : b)
    {
        expected += v * v;
    }
    EXPECT_NEAR(reg_statistical(a, b), expected, 1e-14);
}

TEST(LandmarkLoss, UnitValuesAndInvariances)
{
    Landmarks gt(kNumLandmarks, 2);
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        gt(i, 0) = 60.0 * (i % 2);
        gt(i, 1) = 80.0 * ((i / 2) % 2);
    }
    ASSERT_EQ(bbox_diagonal(gt), 100.0);
    EXPECT_EQ(landmark_loss(gt, gt), 0.0);
    Landmarks pred = gt;
    pred.col(0).array() += 3.0;
    pred.col(1).array() += 4.0;
    EXPECT_EQ(landmark_loss(pred, gt), 0.05);

    std::mt19937_64 rng(1);
    const Landmarks a = random_landmarks(rng, 50.0), b = random_landmarks(rng, 50.0);
    double sum = 0.0;
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        sum += std::hypot(a(i, 0) - b(i, 0), a(i, 1) - b(i, 1));
    }
    const double oracle = sum / kNumLandmarks / bbox_diagonal(b);
    EXPECT_NEAR(landmark_loss(a, b), oracle, 1e-12);

    const Eigen::RowVector2d shift(17.0, -4.0);
    EXPECT_NEAR(landmark_loss(a.rowwise() + shift, b.rowwise() + shift), oracle, 1e-12);
    EXPECT_NEAR(landmark_loss(3.0 * a, 3.0 * b), oracle, 1e-12);

    const Landmarks flat = Landmarks::Constant(kNumLandmarks, 2, 5.0);
    EXPECT_THROW(landmark_loss(a, flat), ArgumentError);
}

TEST(LandmarkLoss, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(2);
    const Landmarks a = random_landmarks(rng, 50.0), b = random_landmarks(rng, 50.0);
    const Landmarks g = landmark_loss_gradient(a, b);
    for (int i = 0; i < kNumLandmarks; i += 5)
    {
        for (int c = 0; c < 2; ++c)
        {
            Landmarks p = a, m = a;
            p(i, c) += 1e-6;
            m(i, c) -= 1e-6;
            EXPECT_NEAR((landmark_loss(p, b) - landmark_loss(m, b)) / 2e-6, g(i, c), 1e-8);
        }
    }
}

TEST(LandmarkEnergy, OffsetAndTruth)
{
    const auto& m = fixtures::small_model().shape;
    projection::Pose pose;
    pose.scale = 40.0;
    pose.translation = {64.0, 64.0};
    pose.rotation = {0.2, -0.1, 0.3};
    const Eigen::VectorXd alpha = Eigen::VectorXd::LinSpaced(m.k_white(), -1.0, 1.0);
    const Landmarks x =
        projection::select_landmarks(projection::project_sop(model::reconstruct_shape(m, alpha), pose),
                                     m.landmark_indices());
    EXPECT_EQ(landmark_energy(m, alpha, pose, x), 0.0);
    Landmarks offset = x;
    offset.col(0).array() += 3.0;
    offset.col(1).array() += 4.0;
    EXPECT_NEAR(landmark_energy(m, alpha, pose, offset), 5.0, 1e-12);
}

TEST(PixelLoss, UnitDifferenceAndSentinel)
{
    render::RasterOutput out;
    out.width = 4;
    out.height = 3;
    out.image = Image(4, 3);
    out.mask.assign(12, 1.0);
    EXPECT_EQ(pixel_loss(out, Image(4, 3)).value, 0.0);
    const auto unit = pixel_loss(out, Image(4, 3, Eigen::Vector3d::Ones()));
    EXPECT_EQ(unit.value, 1.0);
    EXPECT_EQ(unit.count, 12u);
    EXPECT_FALSE(unit.degenerate);

    out.mask.assign(12, 0.0);
    const auto empty = pixel_loss(out, Image(4, 3, Eigen::Vector3d::Ones()));
    EXPECT_EQ(empty.value, 1.0);
    EXPECT_TRUE(empty.degenerate);
    EXPECT_THROW(pixel_loss(out, Image(3, 3)), ArgumentError);
}

TEST(PixelLoss, MaskedLoopOracle)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    render::RasterOutput out;
    out.width = 6;
    out.height = 5;
    out.image = Image(6, 5);
    Image input(6, 5);
    for (auto& v : out.image.data())
    {
        v = u(rng);
    }
    for (auto& v : input.data())
    {
        v = u(rng);
    }
    out.mask.resize(30);
    for (auto& v : out.mask)
    {
        v = u(rng);
    }
    double sum = 0.0;
    int count = 0;
    for (int y = 0; y < 5; ++y)
    {
        for (int x = 0; x < 6; ++x)
        {
            if (out.mask[y * 6 + x] > 0.5)
            {
                ++count;
                for (int c = 0; c < 3; ++c)
                {
                    sum += std::pow(out.image(x, y, c) - input(x, y, c), 2);
                }
            }
        }
    }
    EXPECT_NEAR(pixel_loss(out, input).value, sum / (3.0 * count), 1e-15);
}

TEST(LossWeights, Presets)
{
    const auto a = LossWeights::preset("with-landmarks");
    EXPECT_EQ(a.pixel, 10.0);
    EXPECT_EQ(a.landmark, 1.0);
    EXPECT_EQ(a.reg_statistical, 0.05);
    EXPECT_EQ(a.reg_scale, 0.0);
    const auto b = LossWeights::preset("without-landmarks");
    EXPECT_EQ(b.pixel, 2.0);
    EXPECT_EQ(b.landmark, 0.0);
    EXPECT_EQ(b.reg_statistical, 0.05);
    EXPECT_EQ(b.reg_scale, 100.0);
    EXPECT_THROW(LossWeights::preset("other"), ArgumentError);
    EXPECT_THROW((LossWeights{-1.0, 0.0, 0.0, 0.0}.validate()), ArgumentError);
    EXPECT_THROW((LossWeights{0.0, 0.0, 0.0, 0.0}.validate()), ArgumentError);
}

TEST(TotalLoss, ZeroAtTruth)
{
    const auto& model = fixtures::small_model();
    const auto corpus = small_corpus(64);
    CodeVector v = CodeVector::zero(model.shape.k_white(), model.colour.k());
    const auto item = data::render_item(model, v, corpus, "truth");
    const auto eval =
        total_loss(model.shape, model.colour, v, item.image, item.landmarks, LossWeights::with_landmarks(), raster_for(corpus));
    EXPECT_EQ(eval.terms.total, 0.0);
    EXPECT_LT(eval.gradient.norm(), 1e-8);
}

TEST(TotalLoss, TermsAreNonNegativeAndWeighted)
{
    const auto& model = fixtures::small_model();
    const auto corpus = small_corpus(48);
    const auto truth = data::draw_code_vector(model, corpus, 5, 0);
    const auto item = data::render_item(model, truth, corpus, "x");
    CodeVector v = truth;
    v.pose.rotation(2) += 0.05;
    v.shape.array() += 0.3;
    v.pose.scale = 0.4;
    const auto w = LossWeights{3.0, 2.0, 0.5, 7.0};
    const auto eval = total_loss(model.shape, model.colour, v, item.image, item.landmarks, w, raster_for(corpus));
    const auto& t = eval.terms;
    EXPECT_GT(t.pixel, 0.0);
    EXPECT_GT(t.landmark, 0.0);
    EXPECT_GT(t.reg_statistical, 0.0);
    EXPECT_GT(t.reg_scale, 0.0);
    EXPECT_EQ(t.total, w.pixel * t.pixel + w.landmark * t.landmark + w.reg_statistical * t.reg_statistical +
                           w.reg_scale * t.reg_scale);
    EXPECT_THROW(total_loss(model.shape, model.colour, v, item.image, std::nullopt, w, raster_for(corpus)),
                 ArgumentError);
}

TEST(TotalLoss, GradientMatchesFiniteDifferences)
{
    const auto& model = fixtures::small_model();
    const auto corpus = small_corpus(48);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 0.1);
    int scenes = 0;
    for (int seed = 0; seed < 6; ++seed)
    {
        const auto truth = data::draw_code_vector(model, corpus, 100 + seed, 0);
        const auto item = data::render_item(model, truth, corpus, "fd");
        Eigen::VectorXd flat = truth.flatten();
        for (auto& x : flat)
        {
            x += noise(rng);
        }
        flat(5) = std::max(flat(5), 0.3);
        const auto v = CodeVector::unflatten(flat, model.shape.k_white(), model.colour.k());
        auto weights = LossWeights{10.0, 1.0, 0.05, 100.0};
        const Objective objective(model.shape, model.colour, item.image, item.landmarks, weights, raster_for(corpus));
        const auto check = fixtures::check_gradient(objective, v, 1e-7);
        if (check.skipped > 0)
        {
            continue;
        }
        ++scenes;
        EXPECT_EQ(check.passed, check.checked) << "worst relative error " << check.worst_error;
    }
    EXPECT_GE(scenes, 3);
}
