/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/colour/colour_builder.hpp
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

#ifndef EARFIT_COLOUR_COLOUR_BUILDER_HPP
#define EARFIT_COLOUR_COLOUR_BUILDER_HPP

#include "earfit/core/image.hpp"
#include "earfit/core/types.hpp"
#include "earfit/data/annotated_image.hpp"
#include "earfit/fitting/landmark_fit.hpp"
#include "earfit/model/morphable_model.hpp"
#include "earfit/projection/projection.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace earfit {
namespace colour {

struct VertexColourSample
{
    Colours colours;         ///< N x 3, in [0, 1].
    std::vector<bool> valid; ///< Sampled (true) or filled with the mean valid colour (false).

    int valid_count() const;
};

struct SamplingOptions
{
    /// A vertex is occluded when the z-buffer depth at its pixel is nearer by
    /// more than this (model units).
    double depth_tolerance = 0.05;
};

/**
 * Samples the image bilinearly at each projected vertex. A vertex is valid
 * when it lies inside the image, is not occluded under a hard z-buffer
 * render of the mesh, and all four pixels of its bilinear footprint are
 * covered by the mesh. Invalid vertices get the mean colour of the valid
 * ones.
 *
 * Throws DataError when every vertex is outside the image or none is valid.
 */
VertexColourSample sample_vertex_colours(const Image& image, const projection::ProjectedShape& projected,
                                         const TriangleList& triangles, const SamplingOptions& options = {});

struct ColourBuildOptions
{
    int k = 40;
    SamplingOptions sampling;
    fitting::LandmarkFitOptions landmark_fit;
};

struct ColourBuildItem
{
    std::string id;
    bool used = false;
    double landmark_energy = 0.0; ///< Final mean landmark distance, pixels.
    int valid_vertices = 0;
    std::string error;            ///< Why the item was skipped.
};

struct ColourBuildReport
{
    std::vector<ColourBuildItem> items;
    int used = 0;
    int skipped = 0;
    double coverage = 0.0;
    int k = 0;
    std::optional<std::uint64_t> seed; ///< Recorded only; the build is deterministic.

    /// JSON, schema "colour_build/1".
    std::string to_json() const;
};

struct ColourBuildResult
{
    model::ColourModel model;
    ColourBuildReport report;
};

/**
 * Fits landmarks on every item, samples vertex colours and builds a
 * whitened PCA colour model with exactly k components. Items whose fit or
 * sampling fails are skipped and reported; DataError when more than half
 * fail. ModelError from the PCA (for example zero variance) propagates.
 */
ColourBuildResult build_colour_model(const std::vector<data::AnnotatedImage>& corpus,
                                     const model::MorphableModel& model, const ColourBuildOptions& options = {});

} // namespace colour
} // namespace earfit

#endif /* EARFIT_COLOUR_COLOUR_BUILDER_HPP */
