/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/code_vector.cpp
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
#include "earfit/fitting/code_vector.hpp"
#include "earfit/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace earfit {
namespace fitting {

Frame Frame::canonical(const model::MorphableModel& model, int width, int height)
{
    if (width < 1 || height < 1)
    {
        throw ArgumentError("Frame dimensions must be positive");
    }
    const Vertices mean = model.mean_vertices();
    const double extent_x = mean.col(0).maxCoeff() - mean.col(0).minCoeff();
    const double extent_y = mean.col(1).maxCoeff() - mean.col(1).minCoeff();
    const double extent = std::max(extent_x, extent_y);
    if (!(extent > 0.0))
    {
        throw ModelError("Mean shape has zero extent in the image plane");
    }
    Frame frame;
    frame.width = width;
    frame.height = height;
    frame.unit_scale = kFillFraction * std::min(width, height) / extent;
    return frame;
}

projection::Pose Frame::to_pixels(const projection::Pose& normalised) const
{
    projection::Pose px;
    px.rotation = normalised.rotation;
    px.translation = centre() + half_extent() * normalised.translation;
    px.scale = unit_scale * normalised.scale;
    return px;
}

projection::Pose Frame::to_normalised(const projection::Pose& pixels) const
{
    projection::Pose n;
    n.rotation = pixels.rotation;
    n.translation = (pixels.translation - centre()) / half_extent();
    n.scale = pixels.scale / unit_scale;
    return n;
}

CodeVector CodeVector::zero(int k_shape, int k_colour)
{
    CodeVector v;
    v.shape = Eigen::VectorXd::Zero(k_shape);
    v.colour = Eigen::VectorXd::Zero(k_colour);
    return v;
}

Eigen::VectorXd CodeVector::flatten() const
{
    Eigen::VectorXd flat(size());
    flat.head<3>() = pose.rotation;
    flat.segment<2>(3) = pose.translation;
    flat(5) = pose.scale;
    flat.segment(kPoseDims, shape.size()) = shape;
    flat.tail(colour.size()) = colour;
    return flat;
}

CodeVector CodeVector::unflatten(const Eigen::VectorXd& flat, int k_shape, int k_colour)
{
    if (flat.size() != kPoseDims + k_shape + k_colour)
    {
        throw ArgumentError("Flattened code vector has length " + std::to_string(flat.size()) + ", expected " +
                            std::to_string(kPoseDims + k_shape + k_colour));
    }
    CodeVector v;
    v.pose.rotation = flat.head<3>();
    v.pose.translation = flat.segment<2>(3);
    v.pose.scale = flat(5);
    v.shape = flat.segment(kPoseDims, k_shape);
    v.colour = flat.tail(k_colour);
    return v;
}

void CodeVector::validate(int k_shape, int k_colour) const
{
    if (shape.size() != k_shape || colour.size() != k_colour)
    {
        throw ArgumentError("Code vector has " + std::to_string(shape.size()) + " shape and " +
                            std::to_string(colour.size()) + " colour parameters, expected " +
                            std::to_string(k_shape) + " and " + std::to_string(k_colour));
    }
    if (!shape.allFinite() || !colour.allFinite())
    {
        throw ArgumentError("Code vector has non-finite parameters");
    }
    projection::validate(pose);
}

} // namespace fitting
} // namespace earfit
