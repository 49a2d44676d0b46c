/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/data/augment.hpp
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

#ifndef EARFIT_DATA_AUGMENT_HPP
#define EARFIT_DATA_AUGMENT_HPP

#include "earfit/data/annotated_image.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <vector>

namespace earfit {
namespace data {

/// Landmark indices used for the ear direction by default: bottom of the
/// lobe and top of the helix in the synthetic model's landmark table.
inline constexpr int kDefaultLobeLandmark = 22;
inline constexpr int kDefaultHelixLandmark = 6;

/**
 * Unit vector from landmarks[lobe] to landmarks[helix]. Throws
 * ArgumentError for bad or equal indices and DataError if the two points
 * coincide.
 */
Eigen::Vector2d ear_direction(const Landmarks& landmarks, int lobe = kDefaultLobeLandmark,
                              int helix = kDefaultHelixLandmark);

/// Signed angle in radians between a direction and the image "up" axis
/// (0, -1), positive towards +x.
double direction_angle(const Eigen::Vector2d& direction) noexcept;

/// Rotates points by angle radians about centre in the y-down image frame,
/// so that direction_angle() of any direction increases by angle.
Points2 rotate_points(const Points2& points, const Eigen::Vector2d& centre, double angle);

/// Rotates an image by angle radians about its centre, bilinear with
/// edge-replicate padding.
Image rotate_image(const Image& image, double angle);

struct AugmentOptions
{
    int count = 12;
    double range_degrees = 60.0; ///< Target ear angles are uniform in [-range, range].
    int lobe = kDefaultLobeLandmark;
    int helix = kDefaultHelixLandmark;
};

/**
 * count rotated copies of an item. Each copy's ear-direction angle is an
 * independent uniform draw; landmarks and, when present, the ground-truth
 * pose are rotated with the image. Ids are "<id>_rot<i>". Output depends only
 * on the item, the options and the seed.
 */
std::vector<AnnotatedImage> augment(const AnnotatedImage& item, const AugmentOptions& options,
                                    std::uint64_t seed);

} // namespace data
} // namespace earfit

#endif /* EARFIT_DATA_AUGMENT_HPP */
