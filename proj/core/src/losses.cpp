/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/losses.cpp
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
#include "earfit/fitting/losses.hpp"
#include "earfit/core/error.hpp"
#include "earfit/projection/projection.hpp"

#include <cmath>
#include <string>

namespace earfit {
namespace fitting {

LossWeights LossWeights::preset(std::string_view name)
{
    if (name == "with-landmarks")
    {
        return with_landmarks();
    }
    if (name == "without-landmarks")
    {
        return without_landmarks();
    }
    throw ArgumentError("Unknown loss-weight preset '" + std::string(name) +
                        "' (expected with-landmarks or without-landmarks)");
}

void LossWeights::validate() const
{
    for (const double w : {pixel, landmark, reg_statistical, reg_scale})
    {
        if (!std::isfinite(w) || w < 0.0)
        {
            throw ArgumentError("Loss weights must be finite and non-negative");
        }
    }
    if (pixel == 0.0 && landmark == 0.0 && reg_statistical == 0.0 && reg_scale == 0.0)
    {
        throw ArgumentError("At least one loss weight must be positive");
    }
}

double landmark_energy(const model::MorphableModel& model, const Eigen::VectorXd& alpha_s,
                       const projection::Pose& pose, const Landmarks& gt)
{
    if (gt.rows() != kNumLandmarks)
    {
        throw ArgumentError("Expected 55 ground-truth landmarks, got " + std::to_string(gt.rows()));
    }
    const auto projected = projection::project_sop(model::reconstruct_shape(model, alpha_s), pose);
    const Landmarks x = projection::select_landmarks(projected, model.landmark_indices());
    return (x - gt).rowwise().norm().mean();
}

double bbox_diagonal(const Points2& points)
{
    if (points.rows() == 0)
    {
        return 0.0;
    }
    const Eigen::Vector2d extent = points.colwise().maxCoeff() - points.colwise().minCoeff();
    return extent.norm();
}

PixelLoss pixel_loss(const render::RasterOutput& rendered, const Image& input)
{
    if (input.width() != rendered.width || input.height() != rendered.height)
    {
        throw ArgumentError("pixel_loss: rendered and input images differ in size");
    }
    PixelLoss out;
    double sum = 0.0;
    for (int y = 0; y < rendered.height; ++y)
    {
        for (int x = 0; x < rendered.width; ++x)
        {
            if (rendered.coverage(x, y) > 0.5)
            {
                ++out.count;
                for (int c = 0; c < 3; ++c)
                {
                    const double d = rendered.image(x, y, c) - input(x, y, c);
                    sum += d * d;
                }
            }
        }
    }
    if (out.count == 0)
    {
        out.value = 1.0;
        out.degenerate = true;
        return out;
    }
    out.value = sum / (3.0 * static_cast<double>(out.count));
    return out;
}

Image pixel_loss_gradient(const render::RasterOutput& rendered, const Image& input)
{
    const PixelLoss loss = pixel_loss(rendered, input);
    Image grad(rendered.width, rendered.height);
    if (loss.degenerate)
    {
        return grad;
    }
    const double scale = 2.0 / (3.0 * static_cast<double>(loss.count));
    for (int y = 0; y < rendered.height; ++y)
    {
        for (int x = 0; x < rendered.width; ++x)
        {
            if (rendered.coverage(x, y) > 0.5)
            {
                for (int c = 0; c < 3; ++c)
                {
                    grad(x, y, c) = scale * (rendered.image(x, y, c) - input(x, y, c));
                }
            }
        }
    }
    return grad;
}

namespace {

double checked_diagonal(const Landmarks& predicted, const Landmarks& gt)
{
    if (predicted.rows() != gt.rows() || gt.rows() == 0)
    {
        throw ArgumentError("Landmark sets differ in size (" + std::to_string(predicted.rows()) + " vs " +
                            std::to_string(gt.rows()) + ")");
    }
    if (!predicted.allFinite() || !gt.allFinite())
    {
        throw ArgumentError("Landmarks must be finite");
    }
    const double diagonal = bbox_diagonal(gt);
    if (!(diagonal > 0.0))
    {
        throw ArgumentError("Ground-truth landmark bounding box has zero diagonal");
    }
    return diagonal;
}

} // namespace

double landmark_loss(const Landmarks& predicted, const Landmarks& gt)
{
    const double diagonal = checked_diagonal(predicted, gt);
    return (predicted - gt).rowwise().norm().mean() / diagonal;
}

Landmarks landmark_loss_gradient(const Landmarks& predicted, const Landmarks& gt)
{
    const double diagonal = checked_diagonal(predicted, gt);
    const double scale = 1.0 / (static_cast<double>(gt.rows()) * diagonal);
    Landmarks grad = Landmarks::Zero(gt.rows(), 2);
    for (Eigen::Index i = 0; i < gt.rows(); ++i)
    {
        const Eigen::RowVector2d d = predicted.row(i) - gt.row(i);
        const double n = d.norm();
        if (n > 0.0)
        {
            grad.row(i) = scale * d / n;
        }
    }
    return grad;
}

double reg_statistical(const Eigen::VectorXd& alpha_s, const Eigen::VectorXd& alpha_c)
{
    return alpha_s.squaredNorm() + alpha_c.squaredNorm();
}

double reg_scale(double f)
{
    if (f < 0.5)
    {
        return (0.5 - f) * (0.5 - f);
    }
    if (f > 1.5)
    {
        return (f - 1.5) * (f - 1.5);
    }
    return 0.0;
}

double reg_scale_derivative(double f)
{
    if (f < 0.5)
    {
        return -2.0 * (0.5 - f);
    }
    if (f > 1.5)
    {
        return 2.0 * (f - 1.5);
    }
    return 0.0;
}

Objective::Objective(const model::MorphableModel& shape, const model::ColourModel& colour, const Image& image,
                     std::optional<Landmarks> landmarks, LossWeights weights, render::RasterConfig raster)
    : shape_(&shape), colour_(&colour), image_(&image), landmarks_(std::move(landmarks)), weights_(weights),
      raster_(std::move(raster))
{
    weights_.validate();
    if (image.empty())
    {
        throw ArgumentError("Objective: input image is empty");
    }
    if (colour.n_vertices() != shape.n_vertices())
    {
        throw ArgumentError("Shape model has " + std::to_string(shape.n_vertices()) +
                            " vertices but colour model has " + std::to_string(colour.n_vertices()));
    }
    if (weights_.landmark > 0.0 && !landmarks_)
    {
        throw ArgumentError("Landmark weight is positive but no landmarks were given");
    }
    if (landmarks_ && landmarks_->rows() != kNumLandmarks)
    {
        throw ArgumentError("Expected 55 landmarks, got " + std::to_string(landmarks_->rows()));
    }
    raster_.width = image.width();
    raster_.height = image.height();
    render::validate(raster_);
    frame_ = Frame::canonical(shape, image.width(), image.height());
}

render::RasterOutput Objective::render(const CodeVector& v) const
{
    v.validate(shape_->k_white(), colour_->k());
    const auto projected =
        projection::project_sop(model::reconstruct_shape(*shape_, v.shape), frame_.to_pixels(v.pose));
    return render::rasterize(projected, model::reconstruct_colour(*colour_, v.colour), shape_->triangles(),
                             raster_);
}

LossEvaluation Objective::evaluate(const CodeVector& v, bool with_gradient) const
{
    const int ks = shape_->k_white();
    const int kc = colour_->k();
    v.validate(ks, kc);

    const projection::Pose pose = frame_.to_pixels(v.pose);
    const Vertices shape = model::reconstruct_shape(*shape_, v.shape);
    const Colours colours = model::reconstruct_colour(*colour_, v.colour);
    const auto projected = projection::project_sop(shape, pose);
    const auto raster = render::rasterize(projected, colours, shape_->triangles(), raster_);

    LossEvaluation out;
    const PixelLoss pix = pixel_loss(raster, *image_);
    out.degenerate_coverage = pix.degenerate;
    out.terms.pixel = pix.value;

    Landmarks predicted;
    if (landmarks_)
    {
        predicted = projection::select_landmarks(projected, shape_->landmark_indices());
        out.terms.landmark = landmark_loss(predicted, *landmarks_);
    }
    out.terms.reg_statistical = reg_statistical(v.shape, v.colour);
    out.terms.reg_scale = reg_scale(v.pose.scale);
    out.terms.total = weights_.pixel * out.terms.pixel + weights_.landmark * out.terms.landmark +
                      weights_.reg_statistical * out.terms.reg_statistical +
                      weights_.reg_scale * out.terms.reg_scale;
    if (!with_gradient)
    {
        return out;
    }

    const auto n = static_cast<Eigen::Index>(shape_->n_vertices());
    Points2 d_points = Points2::Zero(n, 2);
    Colours d_colours = Colours::Zero(n, 3);
    if (weights_.pixel > 0.0 && !pix.degenerate)
    {
        Image d_image = pixel_loss_gradient(raster, *image_);
        for (double& g : d_image.data())
        {
            g *= weights_.pixel;
        }
        const auto back =
            render::rasterize_backward(raster, d_image, projected, colours, shape_->triangles(), raster_);
        d_points += back.positions;
        d_colours += back.colours;
    }
    if (weights_.landmark > 0.0)
    {
        const Landmarks d_lm = weights_.landmark * landmark_loss_gradient(predicted, *landmarks_);
        const auto& indices = shape_->landmark_indices();
        for (std::size_t i = 0; i < indices.size(); ++i)
        {
            d_points.row(indices[i]) += d_lm.row(static_cast<Eigen::Index>(i));
        }
    }

    // Chain rule through V = f P R S + T.
    const Eigen::Matrix3d r = projection::rotation_from_euler(pose.rotation);
    const auto dr = projection::rotation_derivatives(pose.rotation);
    const Vertices rotated = shape * r.transpose();

    out.gradient = Eigen::VectorXd::Zero(v.size());
    for (int k = 0; k < 3; ++k)
    {
        const Vertices drotated = shape * dr[k].transpose();
        out.gradient(k) = pose.scale * (d_points.array() * drotated.leftCols<2>().array()).sum();
    }
    out.gradient.segment<2>(3) = frame_.half_extent() * d_points.colwise().sum().transpose();
    out.gradient(5) = frame_.unit_scale * (d_points.array() * rotated.leftCols<2>().array()).sum() +
                      weights_.reg_scale * reg_scale_derivative(v.pose.scale);

    const Vertices d_shape = pose.scale * d_points * r.topRows<2>();
    const Eigen::Map<const Eigen::VectorXd> d_shape_flat(d_shape.data(), 3 * n);
    out.gradient.segment(CodeVector::kPoseDims, ks) =
        shape_->whitened_basis().transpose() * d_shape_flat + 2.0 * weights_.reg_statistical * v.shape;

    const Eigen::Map<const Eigen::VectorXd> d_colour_flat(d_colours.data(), 3 * n);
    out.gradient.tail(kc) =
        colour_->colour_basis().transpose() * d_colour_flat + 2.0 * weights_.reg_statistical * v.colour;
    return out;
}

LossEvaluation total_loss(const model::MorphableModel& shape, const model::ColourModel& colour,
                          const CodeVector& v, const Image& image, const std::optional<Landmarks>& landmarks,
                          const LossWeights& weights, const render::RasterConfig& raster)
{
    return Objective(shape, colour, image, landmarks, weights, raster).evaluate(v, true);
}

} // namespace fitting
} // namespace earfit
