/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/projection/projection.hpp
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
#pragma once

#ifndef EARFIT_PROJECTION_PROJECTION_HPP
#define EARFIT_PROJECTION_PROJECTION_HPP

#include "earfit/core/types.hpp"

#include "Eigen/Core"

#include <array>
#include <span>

namespace earfit {
namespace projection {

/**
 * Pose of a mesh under scaled orthographic projection.
 *
 * rotation holds (azimuth, elevation, roll) in radians, translation is in
 * pixels and scale is pixels per model unit.
 */
struct Pose
{
    Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
    double scale = 1.0;
};

/// Throws ArgumentError unless every component is finite and scale > 0.
void validate(const Pose& pose);

/**
 * R = R_z(roll) * R_y(azimuth) * R_x(elevation), right-handed, acting on
 * column vectors.
 */
Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& angles);

/// Partial derivatives of rotation_from_euler() w.r.t. azimuth, elevation, roll.
std::array<Eigen::Matrix3d, 3> rotation_derivatives(const Eigen::Vector3d& angles);

struct ProjectedShape
{
    Points2 points;        ///< N x 2 pixel coordinates.
    Eigen::VectorXd depth; ///< Rotated z per vertex (model units); larger is farther.
};

/// V = f * P_o * R * S + T per vertex; depth is the unscaled rotated z.
ProjectedShape project_sop(const Vertices& shape, const Pose& pose);

/// X[i] = V[L[i]]. Throws ArgumentError for an out-of-range index.
Landmarks select_landmarks(const ProjectedShape& projected, std::span<const int> indices);

} // namespace projection
} // namespace earfit

#endif /* EARFIT_PROJECTION_PROJECTION_HPP */
