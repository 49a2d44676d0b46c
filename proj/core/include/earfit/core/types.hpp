/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/core/types.hpp
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

#ifndef EARFIT_CORE_TYPES_HPP
#define EARFIT_CORE_TYPES_HPP

#include "Eigen/Core"

#include <array>
#include <vector>

namespace earfit {

/// N x 3 vertex positions, one (x, y, z) row per vertex. Row-major so that the
/// underlying storage matches the flattened 3N model vectors.
using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// N x 3 linear RGB vertex colours (same layout as Vertices).
using Colours = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// N x 2 image-plane points in pixels.
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// 55 x 2 landmark coordinates in pixels.
using Landmarks = Points2;

using Triangle = std::array<int, 3>;
using TriangleList = std::vector<Triangle>;

inline constexpr int kNumLandmarks = 55;

} // namespace earfit

#endif /* EARFIT_CORE_TYPES_HPP */
