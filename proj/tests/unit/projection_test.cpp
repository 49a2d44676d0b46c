/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tests/unit/projection_test.cpp
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
#include "earfit/projection/projection.hpp"

#include "support.hpp"

#include "Eigen/Geometry"
#include "Eigen/LU"
#include "gtest/gtest.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace earfit;
using namespace earfit::projection;

namespace {

Vertices random_vertices(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> normal;
    Vertices v(n, 3);
    for (int i = 0; i < n; ++i)
    {
        for (int c = 0; c < 3; ++c)
        {
            v(i, c) = normal(rng);
        }
    }
    return v;
}

Pose random_pose(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> offset(-50.0, 50.0);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    Pose p;
    p.rotation = {angle(rng), angle(rng), angle(rng)};
    p.translation = {offset(rng), offset(rng)};
    p.scale = scale(rng);
    return p;
}

} // namespace

TEST(Rotation, IdentityAndQuarterRoll)
{
    EXPECT_EQ(rotation_from_euler(Eigen::Vector3d::Zero()), Eigen::Matrix3d::Identity());
    const Eigen::Vector3d r = rotation_from_euler({0.0, 0.0, std::numbers::pi / 2}) * Eigen::Vector3d::UnitX();
    EXPECT_LE((r - Eigen::Vector3d::UnitY()).norm(), 1e-15);
}

TEST(Rotation, OrthonormalAndOrderedRollAzimuthElevation)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial)
    {
        const Eigen::Vector3d a = random_pose(rng).rotation;
        const Eigen::Matrix3d r = rotation_from_euler(a);
        EXPECT_LE((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
        const Eigen::Matrix3d expected = Eigen::AngleAxisd(a(2), Eigen::Vector3d::UnitZ()).toRotationMatrix() *
                                         Eigen::AngleAxisd(a(0), Eigen::Vector3d::UnitY()).toRotationMatrix() *
                                         Eigen::AngleAxisd(a(1), Eigen::Vector3d::UnitX()).toRotationMatrix();
        EXPECT_LE((r - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Rotation, DerivativesMatchFiniteDifferences)
{
    const Eigen::Vector3d a(0.3, -0.7, 1.1);
    const auto d = rotation_derivatives(a);
    for (int k = 0; k < 3; ++k)
    {
        const double h = 1e-6;
        const Eigen::Matrix3d fd = (rotation_from_euler(a + h * Eigen::Vector3d::Unit(k)) -
                                    rotation_from_euler(a - h * Eigen::Vector3d::Unit(k))) /
                                   (2 * h);
        EXPECT_LE((fd - d[k]).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(ProjectSop, DirectSubstitution)
{
    Vertices s(1, 3);
    s << 1.0, 1.0, 5.0;
    Pose p;
    p.scale = 2.0;
    p.translation = {10.0, 20.0};
    const auto out = project_sop(s, p);
    EXPECT_EQ(out.points(0, 0), 12.0);
    EXPECT_EQ(out.points(0, 1), 22.0);
    EXPECT_EQ(out.depth(0), 5.0);

    std::mt19937_64 rng(2);
    const Vertices v = random_vertices(rng, 20);
    const auto plain = project_sop(v, Pose{});
    EXPECT_EQ(Eigen::MatrixXd(plain.points), Eigen::MatrixXd(v.leftCols<2>()));
}

TEST(ProjectSop, ScalarLoopOracle)
{
    std::mt19937_64 rng(3);
    const Vertices v = random_vertices(rng, 50);
    const Pose p = random_pose(rng);
    const Eigen::Matrix3d r = rotation_from_euler(p.rotation);
    const auto out = project_sop(v, p);
    for (int i = 0; i < 50; ++i)
    {
        for (int row = 0; row < 3; ++row)
        {
            double rotated = 0.0;
            for (int c = 0; c < 3; ++c)
            {
                rotated += r(row, c) * v(i, c);
            }
            if (row < 2)
            {
                EXPECT_NEAR(out.points(i, row), p.scale * rotated + p.translation(row), 1e-12);
            } else
            {
                EXPECT_NEAR(out.depth(i), rotated, 1e-12);
            }
        }
    }
}

TEST(ProjectSop, LinearInScaleAndDepthInvariant)
{
    std::mt19937_64 rng(4);
    const Vertices v = random_vertices(rng, 30);
    Pose p = random_pose(rng);
    const auto a = project_sop(v, p);
    Pose p2 = p;
    p2.scale *= 2.0;
    const auto b = project_sop(v, p2);
    const Points2 lhs = b.points.rowwise() - p.translation.transpose();
    const Points2 rhs = 2.0 * (a.points.rowwise() - p.translation.transpose());
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(a.depth, b.depth);
    Pose p3 = p;
    p3.translation += Eigen::Vector2d(3.0, -7.0);
    EXPECT_EQ(project_sop(v, p3).depth, a.depth);
}

TEST(ProjectSop, RejectsInvalidPose)
{
    Pose p;
    p.scale = 0.0;
    EXPECT_THROW(validate(p), ArgumentError);
    p.scale = 1.0;
    p.rotation(1) = std::nan("");
    EXPECT_THROW(validate(p), ArgumentError);
}

TEST(SelectLandmarks, GatherOracles)
{
    std::mt19937_64 rng(5);
    const Vertices v = random_vertices(rng, 100);
    const auto proj = project_sop(v, random_pose(rng));
    std::vector<int> identity(kNumLandmarks);
    std::iota(identity.begin(), identity.end(), 0);
    EXPECT_EQ(Eigen::MatrixXd(select_landmarks(proj, identity)), Eigen::MatrixXd(proj.points.topRows(55)));

    std::vector<int> permuted = identity;
    std::shuffle(permuted.begin(), permuted.end(), rng);
    const auto x = select_landmarks(proj, permuted);
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        EXPECT_EQ(x.row(i), proj.points.row(permuted[i]));
    }
    std::vector<int> bad = identity;
    bad[10] = 100;
    EXPECT_THROW(select_landmarks(proj, bad), ArgumentError);
}

TEST(SelectLandmarks, CommutesWithProjection)
{
    const auto& m = fixtures::small_model().shape;
    std::mt19937_64 rng(6);
    const Pose p = random_pose(rng);
    const Vertices s = m.mean_vertices();
    Vertices gathered(kNumLandmarks, 3);
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        gathered.row(i) = s.row(m.landmark_indices()[i]);
    }
    EXPECT_EQ(Eigen::MatrixXd(select_landmarks(project_sop(s, p), m.landmark_indices())),
              Eigen::MatrixXd(project_sop(gathered, p).points));
}
