/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tests/unit/dataset_test.cpp
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
#include "earfit/data/augment.hpp"
#include "earfit/data/io.hpp"
#include "earfit/data/synthetic.hpp"
#include "earfit/model/earm_io.hpp"
#include "earfit/model/pca.hpp"

#include "support.hpp"

#include "Eigen/Geometry"
#include "gtest/gtest.h"

#include <filesystem>
#include <numbers>

using namespace earfit;
using namespace earfit::data;

namespace {

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("earfit_dataset_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Landmarks two_point_landmarks(const Eigen::Vector2d& lobe, const Eigen::Vector2d& helix)
{
    Landmarks x = Landmarks::Constant(kNumLandmarks, 2, 50.0);
    x.row(kDefaultLobeLandmark) = lobe.transpose();
    x.row(kDefaultHelixLandmark) = helix.transpose();
    return x;
}

} // namespace

TEST(EarDirection, UnitValues)
{
    const auto up = ear_direction(two_point_landmarks({0, 0}, {0, -10}));
    EXPECT_EQ(up, Eigen::Vector2d(0.0, -1.0));
    EXPECT_EQ(direction_angle(up), 0.0);
    const auto d = ear_direction(two_point_landmarks({0, 0}, {3, -4}));
    EXPECT_NEAR((d - Eigen::Vector2d(0.6, -0.8)).norm(), 0.0, 1e-15);
    EXPECT_THROW(ear_direction(two_point_landmarks({1, 1}, {1, 1})), DataError);
    EXPECT_THROW(ear_direction(two_point_landmarks({0, 0}, {0, -10}), 3, 3), ArgumentError);
}

TEST(EarDirection, EquivariantUnderRotation)
{
    const auto& m = fixtures::small_model();
    const auto item = render_item(m, fitting::CodeVector::zero(m.shape.k_white(), m.colour.k()), CorpusOptions{}, "e");
    const double base = direction_angle(ear_direction(item.landmarks));
    const Eigen::Vector2d centre(64.0, 64.0);
    for (int i = 0; i < 24; ++i)
    {
        const double angle = -std::numbers::pi + (i + 0.5) * 2.0 * std::numbers::pi / 24.0;
        const double rotated = direction_angle(ear_direction(rotate_points(item.landmarks, centre, angle)));
        EXPECT_NEAR(std::remainder(rotated - base - angle, 2.0 * std::numbers::pi), 0.0, 1e-12);
    }
}

TEST(Augment, TwelveOutputsInRangeMatchingRotationOracle)
{
    const auto& m = fixtures::small_model();
    const auto item = render_item(m, draw_code_vector(m, CorpusOptions{}, 3, 0), CorpusOptions{}, "ear");
    const auto out = augment(item, AugmentOptions{}, 11);
    ASSERT_EQ(out.size(), 12u);
    const double base = direction_angle(ear_direction(item.landmarks));
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        EXPECT_EQ(out[i].id, "ear_rot" + std::to_string(i));
        ASSERT_EQ(out[i].landmarks.rows(), kNumLandmarks);
        const double a = direction_angle(ear_direction(out[i].landmarks));
        EXPECT_GE(a, -std::numbers::pi / 3 - 1e-12);
        EXPECT_LE(a, std::numbers::pi / 3 + 1e-12);
        const double angle = a - base;
        const double c = std::cos(angle), s = std::sin(angle);
        for (int k = 0; k < kNumLandmarks; ++k)
        {
            const double dx = item.landmarks(k, 0) - 64.0, dy = item.landmarks(k, 1) - 64.0;
            EXPECT_NEAR(out[i].landmarks(k, 0), 64.0 + c * dx - s * dy, 1e-9);
            EXPECT_NEAR(out[i].landmarks(k, 1), 64.0 + s * dx + c * dy, 1e-9);
        }
    }
    const auto again = augment(item, AugmentOptions{}, 11);
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        EXPECT_EQ(again[i].image, out[i].image);
        EXPECT_EQ(Eigen::MatrixXd(again[i].landmarks), Eigen::MatrixXd(out[i].landmarks));
    }
    AugmentOptions bad;
    bad.count = 0;
    EXPECT_THROW(augment(item, bad, 1), ArgumentError);
}

TEST(Augment, ZeroRotationKeepsImage)
{
    const auto& m = fixtures::small_model();
    const auto item = render_item(m, draw_code_vector(m, CorpusOptions{}, 4, 0), CorpusOptions{}, "z");
    const Image same = rotate_image(item.image, 0.0);
    EXPECT_EQ(same, item.image);
}

TEST(Augment, TruthFollowsRotation)
{
    const auto& m = fixtures::small_model();
    CorpusOptions corpus;
    corpus.width = corpus.height = 96;
    const auto item = render_item(m, draw_code_vector(m, corpus, 5, 0), corpus, "t");
    const auto out = augment(item, AugmentOptions{3, 60.0}, 2);
    for (const auto& a : out)
    {
        ASSERT_TRUE(a.truth.has_value());
        const auto rerendered = render_item(m, *a.truth, corpus, "r");
        EXPECT_LE((rerendered.landmarks - a.landmarks).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(SyntheticModel, DeterministicAndWellFormed)
{
    const auto a = generate_synthetic_model(400, 30, 3, []{ SyntheticModelOptions o; o.k_white = 10; o.k_colour = 10; return o; }());
    const auto& b = fixtures::small_model();
    EXPECT_EQ(model::encode_earm(a.shape, &a.colour), model::encode_earm(b.shape, &b.colour));

    const Vertices mean = b.shape.mean_vertices();
    for (const auto& t : b.shape.triangles())
    {
        const Eigen::Vector3d p0 = mean.row(t[0]).transpose();
        const double area = 0.5 * (mean.row(t[1]).transpose() - p0).cross(mean.row(t[2]).transpose() - p0).norm();
        EXPECT_GT(area, 1e-10);
    }
    EXPECT_EQ(b.shape.landmark_indices().size(), static_cast<std::size_t>(kNumLandmarks));
}

TEST(SyntheticModel, SpectrumCoverageAtFortyComponents)
{
    const auto& m = fixtures::full_model();
    EXPECT_EQ(m.shape.k_white(), 40);
    EXPECT_EQ(m.colour.k(), 40);
    const Eigen::VectorXd sd = m.shape.whitening().recover().colwise().norm();
    // Recover columns are orthogonal with norms equal to the retained standard deviations.
    EXPECT_GE(m.shape.whitening().coverage(), 0.98);
    for (Eigen::Index i = 1; i < sd.size(); ++i)
    {
        EXPECT_GE(sd(i - 1), sd(i));
    }
}

TEST(SyntheticCorpus, LandmarksAndStatistics)
{
    const auto& m = fixtures::small_model();
    CorpusOptions corpus;
    corpus.count = 6;
    corpus.width = corpus.height = 64;
    const auto items = render_synthetic_corpus(m, corpus, 9);
    ASSERT_EQ(items.size(), 6u);
    const auto frame = fitting::Frame::canonical(m.shape, 64, 64);
    for (const auto& item : items)
    {
        EXPECT_NO_THROW(validate(item));
        const auto& v = *item.truth;
        const Landmarks x = projection::select_landmarks(
            projection::project_sop(model::reconstruct_shape(m.shape, v.shape), frame.to_pixels(v.pose)),
            m.shape.landmark_indices());
        EXPECT_EQ(Eigen::MatrixXd(x), Eigen::MatrixXd(item.landmarks));
    }
    EXPECT_EQ(items[3].image, render_synthetic_corpus(m, corpus, 9)[3].image);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.shape.k_white());
    double max_abs = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const auto v = draw_code_vector(m, corpus, 21, i);
        mean += v.shape / 1000.0;
        max_abs = std::max(max_abs, v.shape.cwiseAbs().maxCoeff());
    }
    EXPECT_LE(mean.cwiseAbs().maxCoeff(), 0.1);
    EXPECT_LE(max_abs, 2.5);
}

TEST(SyntheticCorpus, RenderAtTruthHasZeroLoss)
{
    const auto& m = fixtures::small_model();
    CorpusOptions corpus;
    corpus.width = corpus.height = 64;
    const auto v = draw_code_vector(m, corpus, 10, 0);
    const auto item = render_item(m, v, corpus, "z");
    render::RasterConfig raster;
    raster.background = corpus.background;
    const auto eval = fitting::total_loss(m.shape, m.colour, v, item.image, item.landmarks,
                                          fitting::LossWeights::with_landmarks(), raster);
    EXPECT_LT(eval.terms.pixel + eval.terms.landmark, 1e-20);
}

TEST(AnnotatedImage, ValidateMargins)
{
    AnnotatedImage item;
    item.id = "v";
    item.image = Image(100, 100);
    item.landmarks = Landmarks::Constant(kNumLandmarks, 2, 50.0);
    EXPECT_NO_THROW(validate(item));
    item.landmarks(0, 0) = 109.0;
    EXPECT_NO_THROW(validate(item));
    item.landmarks(0, 0) = 111.0;
    EXPECT_THROW(validate(item), DataError);
    item.landmarks = Landmarks::Constant(10, 2, 50.0);
    EXPECT_THROW(validate(item), DataError);
}

TEST(DataIo, LandmarksCodeVectorsAndManifests)
{
    const auto dir = scratch_dir("io");
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(50.0, 20.0);
    Landmarks x(kNumLandmarks, 2);
    for (auto& v : x.reshaped())
    {
        v = normal(rng);
    }
    write_landmarks(dir / "a.txt", x);
    EXPECT_EQ(Eigen::MatrixXd(read_landmarks(dir / "a.txt")), Eigen::MatrixXd(x));
    write_text(dir / "short.txt", "1 2\n3 4\n");
    EXPECT_THROW(read_landmarks(dir / "short.txt"), DataError);
    write_text(dir / "bad.txt", "# header\n1 2\nx y\n");
    EXPECT_THROW(read_landmarks(dir / "bad.txt"), DataError);
    EXPECT_THROW(read_landmarks(dir / "missing.txt"), DataError);

    const auto& m = fixtures::small_model();
    const auto v = draw_code_vector(m, CorpusOptions{}, 2, 0);
    write_code_vector(dir / "v.json", v);
    EXPECT_EQ(read_code_vector(dir / "v.json").flatten(), v.flatten());
    EXPECT_EQ(code_vector_to_json(code_vector_from_json(code_vector_to_json(v))), code_vector_to_json(v));
    EXPECT_THROW(code_vector_from_json("{\"schema\": \"other\"}"), DataError);

    Manifest manifest;
    manifest.seed = 42;
    manifest.items.push_back({"a", dir / "images/a.png", dir / "a.txt", std::nullopt,
                              std::array<int, 4>{1, 2, 30, 40}});
    manifest.items.push_back({"b", dir / "images/b.png", std::nullopt, dir / "v.json", std::nullopt});
    write_manifest(dir / "manifest.json", manifest);
    const auto back = read_manifest(dir / "manifest.json");
    ASSERT_EQ(back.items.size(), 2u);
    EXPECT_EQ(back.seed, manifest.seed);
    EXPECT_EQ(back.items[0].image, dir / "images/a.png");
    EXPECT_EQ(back.items[1].code_vector, dir / "v.json");
    EXPECT_NE(read_text(dir / "manifest.json").find("\"images/a.png\""), std::string::npos);
    EXPECT_EQ(back.items[0].crop, manifest.items[0].crop);
    EXPECT_FALSE(back.items[1].landmarks.has_value());
    write_text(dir / "broken.json", "{\"schema\": \"manifest/1\", \"items\": [{}]}");
    EXPECT_THROW(read_manifest(dir / "broken.json"), DataError);
    std::filesystem::remove_all(dir);
}

TEST(DataIo, PngRoundTripIsDeterministic)
{
    const auto dir = scratch_dir("png");
    const auto& m = fixtures::small_model();
    const auto item = render_item(m, draw_code_vector(m, CorpusOptions{}, 2, 0), CorpusOptions{}, "p");
    write_png(item.image, dir / "a.png");
    write_png(item.image, dir / "b.png");
    EXPECT_EQ(read_text(dir / "a.png"), read_text(dir / "b.png"));
    const Image back = read_png(dir / "a.png");
    for (std::size_t i = 0; i < back.data().size(); ++i)
    {
        EXPECT_EQ(encode_srgb8(back.data()[i]), encode_srgb8(item.image.data()[i]));
    }
    std::filesystem::remove_all(dir);
}
