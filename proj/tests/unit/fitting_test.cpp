/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tests/unit/fitting_test.cpp
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
#include "earfit/fitting/landmark_fit.hpp"
#include "earfit/fitting/losses.hpp"
#include "earfit/fitting/photometric_fit.hpp"
#include "earfit/projection/projection.hpp"

#include "support.hpp"

#include "gtest/gtest.h"

#include <numbers>
#include <random>

using namespace earfit;
using namespace earfit::fitting;

namespace {

Landmarks landmarks_of(const model::MorphableModel& m, const CodeVector& v, const Frame& frame)
{
    return projection::select_landmarks(
        projection::project_sop(model::reconstruct_shape(m, v.shape), frame.to_pixels(v.pose)),
        m.landmark_indices());
}

} // namespace

TEST(CodeVector, FlattenRoundTrip)
{
    CodeVector v = CodeVector::zero(4, 3);
    v.pose.rotation = {0.1, 0.2, 0.3};
    v.pose.translation = {-0.1, 0.2};
    v.pose.scale = 1.1;
    v.shape << 1, 2, 3, 4;
    v.colour << 5, 6, 7;
    const auto flat = v.flatten();
    ASSERT_EQ(flat.size(), 13);
    const auto back = CodeVector::unflatten(flat, 4, 3);
    EXPECT_EQ(back.flatten(), flat);
    EXPECT_THROW(CodeVector::unflatten(flat, 4, 4), ArgumentError);
    v.pose.scale = -1.0;
    EXPECT_THROW(v.validate(4, 3), ArgumentError);
}

TEST(Frame, NormalisedRoundTrip)
{
    const auto frame = Frame::canonical(fixtures::small_model().shape, 128, 96);
    projection::Pose p;
    p.translation = {0.1, -0.2};
    p.scale = 1.2;
    const auto px = frame.to_pixels(p);
    EXPECT_DOUBLE_EQ(px.translation.x(), 64.0 + 0.1 * 48.0);
    EXPECT_DOUBLE_EQ(px.scale, 1.2 * frame.unit_scale);
    const auto back = frame.to_normalised(px);
    EXPECT_NEAR((back.translation - p.translation).norm(), 0.0, 1e-15);
    EXPECT_NEAR(back.scale, p.scale, 1e-15);
}

TEST(LandmarkFit, RecoversMeanShapeAtIdentity)
{
    const auto& m = fixtures::small_model();
    const auto frame = Frame::canonical(m.shape, 128, 128);
    const CodeVector truth = CodeVector::zero(m.shape.k_white(), m.colour.k());
    const Landmarks gt = landmarks_of(m.shape, truth, frame);
    const auto init = landmark_initialisation(m.shape, gt, frame, m.colour.k());
    const auto report = fit_landmarks(m.shape, gt, frame, init);
    EXPECT_LT(report.trace.back().total, 1e-6);
    EXPECT_EQ(report.trace.size(), static_cast<std::size_t>(report.iterations) + 1);
}

TEST(LandmarkFit, RecoversRandomPoses)
{
    const auto& m = fixtures::small_model();
    const auto frame = Frame::canonical(m.shape, 128, 128);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> alpha(-2.0, 2.0);
    std::uniform_real_distribution<double> angle(-std::numbers::pi / 6, std::numbers::pi / 6);
    int recovered = 0;
    for (int trial = 0; trial < 10; ++trial)
    {
        CodeVector truth = CodeVector::zero(m.shape.k_white(), m.colour.k());
        for (auto& a : truth.shape)
        {
            a = alpha(rng);
        }
        truth.pose.rotation = {angle(rng), angle(rng), angle(rng)};
        truth.pose.scale = 0.9;
        const Landmarks gt = landmarks_of(m.shape, truth, frame);
        const auto report = fit_landmarks(m.shape, gt, frame, landmark_initialisation(m.shape, gt, frame, m.colour.k()));
        EXPECT_LE(report.iterations, 200);
        for (std::size_t i = 1; i < report.trace.size(); ++i)
        {
            EXPECT_LE(report.trace[i].total, report.trace[i - 1].total);
        }
        recovered += report.trace.back().total < 1e-3;
    }
    EXPECT_GE(recovered, 9);
}

TEST(LandmarkFit, NoiseFloor)
{
    const auto& m = fixtures::small_model();
    const auto frame = Frame::canonical(m.shape, 128, 128);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    CodeVector truth = CodeVector::zero(m.shape.k_white(), m.colour.k());
    truth.shape.setConstant(0.5);
    truth.pose.rotation = {0.2, 0.1, -0.3};
    Landmarks gt = landmarks_of(m.shape, truth, frame);
    for (auto& v : gt.reshaped())
    {
        v += noise(rng);
    }
    const double floor = landmark_energy(m.shape, truth.shape, frame.to_pixels(truth.pose), gt);
    const auto report = fit_landmarks(m.shape, gt, frame, landmark_initialisation(m.shape, gt, frame, m.colour.k()));
    EXPECT_LE(report.trace.back().total, 1.2 * floor);
}

TEST(LandmarkFit, NonFiniteLandmarksDiverge)
{
    const auto& m = fixtures::small_model();
    const auto frame = Frame::canonical(m.shape, 128, 128);
    const CodeVector truth = CodeVector::zero(m.shape.k_white(), m.colour.k());
    Landmarks gt = landmarks_of(m.shape, truth, frame);
    const auto init = landmark_initialisation(m.shape, gt, frame, m.colour.k());
    gt(3, 0) = std::nan("");
    EXPECT_THROW(fit_landmarks(m.shape, gt, frame, init), Error);
}

TEST(PhotometricFit, StaysAtTruth)
{
    const auto& m = fixtures::small_model();
    data::CorpusOptions corpus;
    corpus.width = corpus.height = 64;
    const auto truth = data::draw_code_vector(m, corpus, 6, 0);
    const auto item = data::render_item(m, truth, corpus, "t");
    render::RasterConfig raster;
    raster.background = corpus.background;
    const Objective objective(m.shape, m.colour, item.image, item.landmarks, LossWeights{10.0, 1.0, 0.0, 0.0}, raster);
    PhotometricFitOptions options;
    options.max_iterations = 50;
    const auto report = fit_photometric(objective, truth, options);
    EXPECT_LE((report.code.flatten() - truth.flatten()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(report.trace.front().total, 1e-12);
    EXPECT_EQ(report.trace.size(), static_cast<std::size_t>(report.iterations) + 1);
}

TEST(PhotometricFit, ImprovesFromLandmarkInit)
{
    const auto& m = fixtures::small_model();
    data::CorpusOptions corpus;
    corpus.width = corpus.height = 64;
    const auto truth = data::draw_code_vector(m, corpus, 7, 0);
    const auto item = data::render_item(m, truth, corpus, "t");
    render::RasterConfig raster;
    raster.background = corpus.background;
    const Objective objective(m.shape, m.colour, item.image, item.landmarks, LossWeights::with_landmarks(), raster);
    const auto lm = fit_landmarks(m.shape, item.landmarks, objective.frame(),
                                  landmark_initialisation(m.shape, item.landmarks, objective.frame(), m.colour.k()));
    PhotometricFitOptions options;
    options.max_iterations = 100;
    const auto report = fit_photometric(objective, lm.code, options);
    EXPECT_LE(report.trace.back().total, report.trace.front().total);
    const double best = objective.evaluate(report.code, false).terms.total;
    for (const auto& t : report.trace)
    {
        EXPECT_GE(t.total, best - 1e-12);
    }
    EXPECT_LE(objective.evaluate(report.code, false).terms.landmark, 0.02);
}

TEST(PhotometricFit, PoseGridKeepsScaleInBox)
{
    const auto& m = fixtures::small_model();
    data::CorpusOptions corpus;
    corpus.width = corpus.height = 64;
    const auto truth = data::draw_code_vector(m, corpus, 8, 0);
    const auto item = data::render_item(m, truth, corpus, "t");
    render::RasterConfig raster;
    raster.background = corpus.background;
    const Objective objective(m.shape, m.colour, item.image, std::nullopt, LossWeights::without_landmarks(), raster);
    const auto init = pose_grid_initialisation(objective);
    EXPECT_GE(init.pose.scale, 0.7);
    EXPECT_LE(init.pose.scale, 1.3);
    EXPECT_TRUE(init.shape.isZero(0.0));
}
