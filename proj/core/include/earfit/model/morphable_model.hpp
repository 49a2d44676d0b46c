/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/model/morphable_model.hpp
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

#ifndef EARFIT_MODEL_MORPHABLE_MODEL_HPP
#define EARFIT_MODEL_MORPHABLE_MODEL_HPP

#include "earfit/core/types.hpp"
#include "earfit/model/pca.hpp"

#include "Eigen/Core"

#include <vector>

namespace earfit {
namespace model {

/**
 * A linear PCA ear shape model with a whitened parameterisation.
 *
 * A shape instance is mean + U_s * U_w * alpha, reshaped to N x 3, where U_s
 * (3N x K_full) holds unit-norm principal components and U_w is the whitening
 * recovery matrix. The flattened layout is x0 y0 z0 x1 y1 z1 ...
 *
 * Instances are immutable once created and safe to share across threads.
 */
class MorphableModel
{
public:
    MorphableModel() = default;

    /**
     * Validates and assembles a model. Throws ModelError if any invariant is
     * violated: dimension mismatches, triangle or landmark indices out of
     * range, a landmark count other than 55, non-orthogonal basis columns.
     */
    static MorphableModel create(Eigen::VectorXd mean_shape, Eigen::MatrixXd shape_basis,
                                 WhiteningTransform whitening, TriangleList triangles,
                                 std::vector<int> landmark_indices);

    int n_vertices() const noexcept { return static_cast<int>(mean_shape_.size() / 3); }
    int k_full() const noexcept { return static_cast<int>(shape_basis_.cols()); }
    int k_white() const noexcept { return whitening_.k_white(); }

    const Eigen::VectorXd& mean_shape() const noexcept { return mean_shape_; }
    const Eigen::MatrixXd& shape_basis() const noexcept { return shape_basis_; }
    const WhiteningTransform& whitening() const noexcept { return whitening_; }
    const TriangleList& triangles() const noexcept { return triangles_; }
    const std::vector<int>& landmark_indices() const noexcept { return landmark_indices_; }

    /// U_s * U_w: 3N x k_white, maps whitened parameters to vertex offsets.
    const Eigen::MatrixXd& whitened_basis() const noexcept { return whitened_basis_; }

    /// Mean shape as N x 3 vertices.
    Vertices mean_vertices() const;

private:
    Eigen::VectorXd mean_shape_;
    Eigen::MatrixXd shape_basis_;
    WhiteningTransform whitening_;
    TriangleList triangles_;
    std::vector<int> landmark_indices_;
    Eigen::MatrixXd whitened_basis_;
};

/**
 * Per-vertex linear colour model C = mean + U_c * alpha_c. The basis already
 * carries the whitening scales, so alpha_c is unit variance.
 */
class ColourModel
{
public:
    ColourModel() = default;

    /// Throws ModelError on dimension mismatch, non-finite values or coverage outside (0, 1].
    static ColourModel create(Eigen::VectorXd mean_colour, Eigen::MatrixXd colour_basis, double coverage);

    int n_vertices() const noexcept { return static_cast<int>(mean_colour_.size() / 3); }
    int k() const noexcept { return static_cast<int>(colour_basis_.cols()); }
    double coverage() const noexcept { return coverage_; }
    const Eigen::VectorXd& mean_colour() const noexcept { return mean_colour_; }
    const Eigen::MatrixXd& colour_basis() const noexcept { return colour_basis_; }

private:
    Eigen::VectorXd mean_colour_;
    Eigen::MatrixXd colour_basis_;
    double coverage_ = 1.0;
};

/// beta_s = U_w * alpha_s. Throws ArgumentError on a length mismatch.
Eigen::VectorXd unwhiten(const WhiteningTransform& whitening, const Eigen::VectorXd& alpha_s);

/// Shape instance for whitened parameters alpha_s, as N x 3 vertices.
Vertices reconstruct_shape(const MorphableModel& model, const Eigen::VectorXd& alpha_s);

/// Vertex colours for alpha_c, unclamped (clamping happens when rendering).
Colours reconstruct_colour(const ColourModel& model, const Eigen::VectorXd& alpha_c);

/// Reshapes a flattened 3N vector into N x 3 rows.
Vertices as_rows(const Eigen::VectorXd& flat);

/// Flattens N x 3 rows into a 3N vector.
Eigen::VectorXd flatten_rows(const Vertices& rows);

} // namespace model
} // namespace earfit

#endif /* EARFIT_MODEL_MORPHABLE_MODEL_HPP */
