/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/model/pca.hpp
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

#ifndef EARFIT_MODEL_PCA_HPP
#define EARFIT_MODEL_PCA_HPP

#include "Eigen/Core"

#include <variant>

namespace earfit {
namespace model {

/**
 * Linear map between a whitened parameter space (unit variance, k_white
 * dimensions) and an original parameter space (k_full dimensions).
 *
 * recover() is the K_full x k_white matrix U_w with beta = U_w * alpha; no
 * mean is added. whiten() applies the left inverse of U_w, so
 * whiten(unwhiten(alpha)) == alpha for every alpha.
 */
class WhiteningTransform
{
public:
    WhiteningTransform() = default;

    /**
     * Builds the transform from its recovery matrix. The left inverse is
     * computed from the recovery matrix, which must have full column rank.
     *
     * @param[in] recover K_full x k_white recovery matrix.
     * @param[in] coverage Fraction of variance retained, in (0, 1].
     */
    WhiteningTransform(Eigen::MatrixXd recover, double coverage);

    const Eigen::MatrixXd& recover() const noexcept { return recover_; }
    const Eigen::MatrixXd& whiten_matrix() const noexcept { return whiten_; }
    double coverage() const noexcept { return coverage_; }
    int k_white() const noexcept { return static_cast<int>(recover_.cols()); }
    int k_full() const noexcept { return static_cast<int>(recover_.rows()); }

    Eigen::VectorXd unwhiten(const Eigen::VectorXd& alpha) const;
    Eigen::VectorXd whiten(const Eigen::VectorXd& beta) const;

private:
    Eigen::MatrixXd recover_;
    Eigen::MatrixXd whiten_;
    double coverage_ = 1.0;
};

/// Retain the smallest number of components whose cumulative variance
/// fraction reaches the target.
struct CoverageTarget
{
    double fraction;
};

/// Retain exactly this many components.
struct ComponentCount
{
    int k;
};

using Retention = std::variant<CoverageTarget, ComponentCount>;

struct PcaResult
{
    Eigen::VectorXd mean;      ///< D, column-wise sample mean.
    Eigen::MatrixXd basis;     ///< D x K_full orthonormal, decreasing variance.
    Eigen::VectorXd variances; ///< K_full sample variances (M-1 normalisation).
    WhiteningTransform whitening; ///< recover = basis_k * diag(sqrt(variances_k)).
};

/**
 * Principal component analysis of the rows of an M x D sample matrix via
 * thin SVD of the centred data.
 *
 * Components are sorted by decreasing variance; each column's sign is fixed
 * so that its largest-magnitude entry is positive. K_full is the numerical
 * rank of the centred data. Variances use the (M-1) normalisation, so the
 * whitened training samples have unit sample variance under that convention.
 *
 * Throws ModelError if M < 2, any value is non-finite or the data has zero
 * variance; ArgumentError for a coverage outside (0, 1] or a component count
 * outside [1, K_full].
 */
PcaResult build_pca(const Eigen::MatrixXd& samples, const Retention& retention);

/// Fraction of total variance carried by the first k entries of a
/// decreasing variance spectrum.
double cumulative_coverage(const Eigen::VectorXd& variances, int k);

} // namespace model
} // namespace earfit

#endif /* EARFIT_MODEL_PCA_HPP */
