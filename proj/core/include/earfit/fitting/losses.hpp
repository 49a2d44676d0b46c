/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/fitting/losses.hpp
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

#ifndef EARFIT_FITTING_LOSSES_HPP
#define EARFIT_FITTING_LOSSES_HPP

#include "earfit/core/image.hpp"
#include "earfit/core/types.hpp"
#include "earfit/fitting/code_vector.hpp"
#include "earfit/model/morphable_model.hpp"
#include "earfit/render/rasterizer.hpp"

#include "Eigen/Core"

#include <optional>
#include <string_view>

namespace earfit {
namespace fitting {

/// Weights of the pixel, landmark, statistical and scale terms.
struct LossWeights
{
    double pixel = 0.0;
    double landmark = 0.0;
    double reg_statistical = 0.0;
    double reg_scale = 0.0;

    static LossWeights with_landmarks() { return {10.0, 1.0, 0.05, 0.0}; }
    static LossWeights without_landmarks() { return {2.0, 0.0, 0.05, 100.0}; }

    /// "with-landmarks" or "without-landmarks"; ArgumentError otherwise.
    static LossWeights preset(std::string_view name);

    /// Throws ArgumentError for negative, non-finite or all-zero weights.
    void validate() const;
};

/// Unweighted loss terms and their weighted sum.
struct LossTerms
{
    double pixel = 0.0;
    double landmark = 0.0;
    double reg_statistical = 0.0;
    double reg_scale = 0.0;
    double total = 0.0;
};

/// Mean per-landmark Euclidean distance in pixels.
double landmark_energy(const model::MorphableModel& model, const Eigen::VectorXd& alpha_s,
                       const projection::Pose& pose, const Landmarks& gt);

/// Diagonal of the axis-aligned bounding box of a point set.
double bbox_diagonal(const Points2& points);

struct PixelLoss
{
    double value = 0.0;
    std::size_t count = 0;   ///< Pixels with mask > 0.5.
    bool degenerate = false; ///< No pixel passed the mask; value is the sentinel 1.0.
};

/// Mean squared error over the three channels of pixels with mask > 0.5.
PixelLoss pixel_loss(const render::RasterOutput& rendered, const Image& input);

/// d pixel_loss / d rendered image; zero when the loss is degenerate.
Image pixel_loss_gradient(const render::RasterOutput& rendered, const Image& input);

/**
 * Mean per-landmark distance divided by the bounding-box diagonal of gt.
 * Throws ArgumentError when the rows differ or the diagonal is zero.
 */
double landmark_loss(const Landmarks& predicted, const Landmarks& gt);

/// d landmark_loss / d predicted. The gradient of a zero distance is taken as 0.
Landmarks landmark_loss_gradient(const Landmarks& predicted, const Landmarks& gt);

/// Squared Mahalanobis distance in whitened space: sum of squares.
double reg_statistical(const Eigen::VectorXd& alpha_s, const Eigen::VectorXd& alpha_c);

/// Zero on [0.5, 1.5], quadratic outside.
double reg_scale(double f);
double reg_scale_derivative(double f);

struct LossEvaluation
{
    LossTerms terms;
    Eigen::VectorXd gradient; ///< Over CodeVector::flatten(); empty when not requested.
    bool degenerate_coverage = false;
};

/**
 * The fitting objective for one image: weighted pixel, landmark and
 * regularisation terms as a function of the code vector.
 *
 * The raster size is taken from the input image; the frame is the canonical
 * frame for that size. References passed to the constructor must outlive
 * the objective.
 */
class Objective
{
public:
    /// Throws ArgumentError on invalid weights, landmark weight without
    /// landmarks, or mismatched model vertex counts.
    Objective(const model::MorphableModel& shape, const model::ColourModel& colour, const Image& image,
              std::optional<Landmarks> landmarks, LossWeights weights, render::RasterConfig raster = {});

    LossEvaluation evaluate(const CodeVector& v, bool with_gradient = true) const;

    /// Renders the code vector with this objective's raster settings.
    render::RasterOutput render(const CodeVector& v) const;

    const model::MorphableModel& shape_model() const noexcept { return *shape_; }
    const model::ColourModel& colour_model() const noexcept { return *colour_; }
    const Image& image() const noexcept { return *image_; }
    const std::optional<Landmarks>& landmarks() const noexcept { return landmarks_; }
    const LossWeights& weights() const noexcept { return weights_; }
    const render::RasterConfig& raster() const noexcept { return raster_; }
    const Frame& frame() const noexcept { return frame_; }

private:
    const model::MorphableModel* shape_;
    const model::ColourModel* colour_;
    const Image* image_;
    std::optional<Landmarks> landmarks_;
    LossWeights weights_;
    render::RasterConfig raster_;
    Frame frame_;
};

/// One-shot evaluation of the weighted loss and its gradient over flatten(v).
LossEvaluation total_loss(const model::MorphableModel& shape, const model::ColourModel& colour,
                          const CodeVector& v, const Image& image, const std::optional<Landmarks>& landmarks,
                          const LossWeights& weights, const render::RasterConfig& raster = {});

} // namespace fitting
} // namespace earfit

#endif /* EARFIT_FITTING_LOSSES_HPP */
