/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/data/synthetic.hpp
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

#ifndef EARFIT_DATA_SYNTHETIC_HPP
#define EARFIT_DATA_SYNTHETIC_HPP

#include "earfit/data/annotated_image.hpp"
#include "earfit/model/morphable_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <vector>

namespace earfit {
namespace data {

/**
 * Parameters of the synthetic ear-like model.
 *
 * The base surface is a polar mesh over the ellipse (a cos t, b sin t) with
 * y pointing down (t = -90 degrees is the top of the ear). Depth (larger is
 * farther from the viewer) is
 *
 *   z = bowl (1 - rho^2)                              recessed centre
 *     - helix_height exp(-((rho - 0.9) / 0.07)^2)     raised outer rim
 *     - antihelix_height exp(-((rho - 0.62) / 0.06)^2) inner ridge
 *     + concha_depth exp(-|p - (0.12, 0.1)|^2 / 0.09)  deeper bowl
 *     + bend y^2
 *
 * Shape components are random smooth 3D displacement fields, orthonormalised,
 * with variances decaying geometrically at the rate that puts
 * shape_coverage_at_k of the total variance in the first k_white components.
 */
struct SyntheticModelOptions
{
    double semi_axis_x = 0.6;
    double semi_axis_y = 1.0;
    double bowl = 0.35;
    double helix_height = 0.12;
    double antihelix_height = 0.06;
    double concha_depth = 0.15;
    double bend = 0.08;

    int k_white = 40;
    double shape_coverage_at_k = 0.985;
    double top_component_rms = 0.015; ///< Per-vertex RMS displacement of one sd along component 1.

    int k_colour = 40;
    double colour_rms = 0.06;   ///< Per-channel RMS of one sd along colour component 1.
    double colour_decay = 0.9;  ///< Ratio of successive colour standard deviations.
    Eigen::Vector3d skin{0.78, 0.56, 0.46};
};

struct SyntheticModel
{
    model::MorphableModel shape;
    model::ColourModel colour;
};

/**
 * Deterministic ear-like shape and colour model. The 55 landmarks sit at
 * fixed semantic positions: 0-19 helix rim (front-top, over the top, down
 * the back), 20-24 lobe, 25-39 antihelix, 40-47 concha, 48-54 tragus to
 * canal. Throws ArgumentError for n_vertices < 100 or k_full < 1.
 */
SyntheticModel generate_synthetic_model(int n_vertices, int k_full, std::uint64_t seed,
                                        const SyntheticModelOptions& options = {});

/**
 * Synthetic corpus settings. Poses are drawn uniformly: azimuth and
 * elevation within +-max_out_of_plane_degrees, roll within
 * +-max_roll_degrees, normalised scale in [min_scale, max_scale] and
 * normalised translation within +-max_translation per axis. Shape and
 * colour parameters are N(0, param_sigma^2) truncated at +-2.5 param_sigma.
 */
struct CorpusOptions
{
    int count = 50;
    int width = 128;
    int height = 128;
    double param_sigma = 1.0;
    double pixel_sigma = 0.0;
    double edge_sigma = 1.0;
    Eigen::Vector3d background = Eigen::Vector3d::Constant(0.05);
    double max_out_of_plane_degrees = 20.0;
    double max_roll_degrees = 30.0;
    double min_scale = 0.85;
    double max_scale = 1.15;
    double max_translation = 0.08;
};

/// Draws one ground-truth code vector for corpus item index.
fitting::CodeVector draw_code_vector(const SyntheticModel& model, const CorpusOptions& options,
                                     std::uint64_t seed, int index);

/// Renders a code vector into an annotated item (no pixel noise).
AnnotatedImage render_item(const SyntheticModel& model, const fitting::CodeVector& v, const CorpusOptions& options,
                           std::string id);

/**
 * count rendered items with ids "synth_NNNN", ground-truth code vectors and
 * landmarks taken from the ground-truth projection. Item i depends only on
 * (seed, i).
 */
std::vector<AnnotatedImage> render_synthetic_corpus(const SyntheticModel& model, const CorpusOptions& options,
                                                    std::uint64_t seed);

} // namespace data
} // namespace earfit

#endif /* EARFIT_DATA_SYNTHETIC_HPP */
