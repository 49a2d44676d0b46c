/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/fitting/code_vector.hpp
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

#ifndef EARFIT_FITTING_CODE_VECTOR_HPP
#define EARFIT_FITTING_CODE_VECTOR_HPP

#include "earfit/model/morphable_model.hpp"
#include "earfit/projection/projection.hpp"

#include "Eigen/Core"

#include <algorithm>

namespace earfit {
namespace fitting {

/**
 * Maps the normalised pose stored in a CodeVector to pixel units for an
 * image of a given size.
 *
 * Normalised translation is measured from the image centre in units of half
 * the shorter image side. Normalised scale 1 makes the mean shape's larger
 * x/y extent fill 60% of the shorter image side, so the [0.5, 1.5] scale box
 * means the same thing for every input size.
 */
struct Frame
{
    int width = 128;
    int height = 128;
    double unit_scale = 1.0; ///< Pixels per model unit at normalised scale 1.

    static constexpr double kFillFraction = 0.6;

    /// Canonical frame for a model rendered into a width x height image.
    static Frame canonical(const model::MorphableModel& model, int width, int height);

    double half_extent() const noexcept { return 0.5 * std::min(width, height); }
    Eigen::Vector2d centre() const noexcept { return {0.5 * width, 0.5 * height}; }

    projection::Pose to_pixels(const projection::Pose& normalised) const;
    projection::Pose to_normalised(const projection::Pose& pixels) const;
};

/**
 * The optimisation variable: normalised pose, whitened shape parameters and
 * colour parameters. Flattened order is
 * (azimuth, elevation, roll, tx, ty, scale, shape..., colour...).
 */
struct CodeVector
{
    projection::Pose pose;
    Eigen::VectorXd shape;
    Eigen::VectorXd colour;

    static constexpr int kPoseDims = 6;

    /// Zero shape and colour, identity rotation, centred, scale 1.
    static CodeVector zero(int k_shape, int k_colour);

    Eigen::Index size() const noexcept { return kPoseDims + shape.size() + colour.size(); }
    Eigen::VectorXd flatten() const;
    /// Inverse of flatten() for the given shape and colour dimensions.
    static CodeVector unflatten(const Eigen::VectorXd& flat, int k_shape, int k_colour);

    /// Throws ArgumentError unless finite with a positive scale and matching dimensions.
    void validate(int k_shape, int k_colour) const;
};

} // namespace fitting
} // namespace earfit

#endif /* EARFIT_FITTING_CODE_VECTOR_HPP */
