/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/morphable_model.cpp
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
#include "earfit/model/morphable_model.hpp"
#include "earfit/core/error.hpp"

#include <cmath>
#include <string>

namespace earfit {
namespace model {

MorphableModel MorphableModel::create(Eigen::VectorXd mean_shape, Eigen::MatrixXd shape_basis,
                                      WhiteningTransform whitening, TriangleList triangles,
                                      std::vector<int> landmark_indices)
{
    const auto dim = mean_shape.size();
    if (dim < 9 || dim % 3 != 0)
    {
        throw ModelError("Mean shape length must be a multiple of 3 with at least 3 vertices, got " +
                         std::to_string(dim));
    }
    const int n = static_cast<int>(dim / 3);
    if (shape_basis.rows() != dim)
    {
        throw ModelError("Shape basis has " + std::to_string(shape_basis.rows()) + " rows, expected " +
                         std::to_string(dim));
    }
    if (whitening.k_full() != shape_basis.cols())
    {
        throw ModelError("Whitening expects " + std::to_string(whitening.k_full()) +
                         " shape parameters but the basis has " + std::to_string(shape_basis.cols()));
    }
    if (!mean_shape.allFinite() || !shape_basis.allFinite())
    {
        throw ModelError("Shape model contains non-finite values");
    }
    for (const auto& tri : triangles)
    {
        for (int v : tri)
        {
            if (v < 0 || v >= n)
            {
                throw ModelError("Triangle index " + std::to_string(v) + " out of range for " +
                                 std::to_string(n) + " vertices");
            }
        }
    }
    if (landmark_indices.size() != static_cast<std::size_t>(kNumLandmarks))
    {
        throw ModelError("Expected " + std::to_string(kNumLandmarks) + " landmark indices, got " +
                         std::to_string(landmark_indices.size()));
    }
    for (int v : landmark_indices)
    {
        if (v < 0 || v >= n)
        {
            throw ModelError("Landmark index " + std::to_string(v) + " out of range for " + std::to_string(n) +
                             " vertices");
        }
    }
    // Principal components must be mutually orthogonal.
    const Eigen::MatrixXd gram = shape_basis.transpose() * shape_basis;
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
    {
        for (Eigen::Index j = i + 1; j < gram.cols(); ++j)
        {
            const double scale = std::sqrt(gram(i, i) * gram(j, j));
            if (std::abs(gram(i, j)) > 1e-8 * scale)
            {
                throw ModelError("Shape basis columns " + std::to_string(i) + " and " + std::to_string(j) +
                                 " are not orthogonal");
            }
        }
    }

    MorphableModel model;
    model.mean_shape_ = std::move(mean_shape);
    model.shape_basis_ = std::move(shape_basis);
    model.whitening_ = std::move(whitening);
    model.triangles_ = std::move(triangles);
    model.landmark_indices_ = std::move(landmark_indices);
    model.whitened_basis_ = model.shape_basis_ * model.whitening_.recover();
    return model;
}

Vertices MorphableModel::mean_vertices() const
{
    return as_rows(mean_shape_);
}

ColourModel ColourModel::create(Eigen::VectorXd mean_colour, Eigen::MatrixXd colour_basis, double coverage)
{
    if (mean_colour.size() < 9 || mean_colour.size() % 3 != 0)
    {
        throw ModelError("Mean colour length must be a multiple of 3, got " + std::to_string(mean_colour.size()));
    }
    if (colour_basis.rows() != mean_colour.size() || colour_basis.cols() < 1)
    {
        throw ModelError("Colour basis must have " + std::to_string(mean_colour.size()) +
                         " rows and at least one column");
    }
    if (!mean_colour.allFinite() || !colour_basis.allFinite())
    {
        throw ModelError("Colour model contains non-finite values");
    }
    if (!(coverage > 0.0 && coverage <= 1.0))
    {
        throw ModelError("Colour model coverage must lie in (0, 1], got " + std::to_string(coverage));
    }
    ColourModel model;
    model.mean_colour_ = std::move(mean_colour);
    model.colour_basis_ = std::move(colour_basis);
    model.coverage_ = coverage;
    return model;
}

Eigen::VectorXd unwhiten(const WhiteningTransform& whitening, const Eigen::VectorXd& alpha_s)
{
    return whitening.unwhiten(alpha_s);
}

Vertices reconstruct_shape(const MorphableModel& model, const Eigen::VectorXd& alpha_s)
{
    if (alpha_s.size() != model.k_white())
    {
        throw ArgumentError("reconstruct_shape: expected " + std::to_string(model.k_white()) +
                            " shape parameters, got " + std::to_string(alpha_s.size()));
    }
    const Eigen::VectorXd flat = model.mean_shape() + model.whitened_basis() * alpha_s;
    return as_rows(flat);
}

Colours reconstruct_colour(const ColourModel& model, const Eigen::VectorXd& alpha_c)
{
    if (alpha_c.size() != model.k())
    {
        throw ArgumentError("reconstruct_colour: expected " + std::to_string(model.k()) +
                            " colour parameters, got " + std::to_string(alpha_c.size()));
    }
    const Eigen::VectorXd flat = model.mean_colour() + model.colour_basis() * alpha_c;
    return as_rows(flat);
}

Vertices as_rows(const Eigen::VectorXd& flat)
{
    const auto n = flat.size() / 3;
    return Eigen::Map<const Vertices>(flat.data(), n, 3);
}

Eigen::VectorXd flatten_rows(const Vertices& rows)
{
    return Eigen::Map<const Eigen::VectorXd>(rows.data(), rows.size());
}

} // namespace model
} // namespace earfit
