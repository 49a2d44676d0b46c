/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/pca.cpp
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
#include "earfit/model/pca.hpp"
#include "earfit/core/error.hpp"

#include "Eigen/Cholesky"
#include "Eigen/SVD"

#include <algorithm>
#include <cmath>
#include <string>

namespace earfit {
namespace model {

WhiteningTransform::WhiteningTransform(Eigen::MatrixXd recover, double coverage)
    : recover_(std::move(recover)), coverage_(coverage)
{
    if (!(coverage_ > 0.0 && coverage_ <= 1.0))
    {
        throw ArgumentError("Whitening coverage must lie in (0, 1], got " + std::to_string(coverage_));
    }
    if (recover_.cols() == 0 || recover_.rows() < recover_.cols())
    {
        throw ModelError("Whitening recovery matrix must be tall with at least one column");
    }
    if (!recover_.allFinite())
    {
        throw ModelError("Whitening recovery matrix contains non-finite values");
    }
    // Left inverse (U^T U)^-1 U^T. For U = B diag(s) with orthonormal B this is diag(1/s) B^T.
    const Eigen::MatrixXd gram = recover_.transpose() * recover_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    {
        throw ModelError("Whitening recovery matrix is rank deficient");
    }
    whiten_ = ldlt.solve(recover_.transpose());
}

Eigen::VectorXd WhiteningTransform::unwhiten(const Eigen::VectorXd& alpha) const
{
    if (alpha.size() != k_white())
    {
        throw ArgumentError("unwhiten: expected " + std::to_string(k_white()) + " parameters, got " +
                            std::to_string(alpha.size()));
    }
    return recover_ * alpha;
}

Eigen::VectorXd WhiteningTransform::whiten(const Eigen::VectorXd& beta) const
{
    if (beta.size() != k_full())
    {
        throw ArgumentError("whiten: expected " + std::to_string(k_full()) + " parameters, got " +
                            std::to_string(beta.size()));
    }
    return whiten_ * beta;
}

double cumulative_coverage(const Eigen::VectorXd& variances, int k)
{
    const double total = variances.sum();
    if (!(total > 0.0))
    {
        return 0.0;
    }
    return variances.head(std::clamp<Eigen::Index>(k, 0, variances.size())).sum() / total;
}

PcaResult build_pca(const Eigen::MatrixXd& samples, const Retention& retention)
{
    const auto m = samples.rows();
    const auto d = samples.cols();
    if (m < 2 || d < 1)
    {
        throw ModelError("PCA needs at least 2 samples of dimension >= 1, got " + std::to_string(m) + "x" +
                         std::to_string(d));
    }
    if (!samples.allFinite())
    {
        throw ModelError("PCA samples contain non-finite values");
    }
    if (const auto* target = std::get_if<CoverageTarget>(&retention))
    {
        if (!(target->fraction > 0.0 && target->fraction <= 1.0))
        {
            throw ArgumentError("Coverage target must lie in (0, 1], got " + std::to_string(target->fraction));
        }
    }

    PcaResult result;
    result.mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centred = samples.rowwise() - result.mean.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const Eigen::VectorXd& singular = svd.singularValues();
    const double largest = singular.size() > 0 ? singular(0) : 0.0;
    const double rank_tol = largest * 1e-12 * static_cast<double>(std::max(m, d));
    Eigen::Index rank = 0;
    while (rank < singular.size() && singular(rank) > rank_tol && singular(rank) > 0.0)
    {
        ++rank;
    }
    if (rank == 0)
    {
        throw ModelError("PCA samples have zero variance (all eigenvalues are zero)");
    }

    result.basis = svd.matrixV().leftCols(rank);
    result.variances = singular.head(rank).array().square() / static_cast<double>(m - 1);
    for (Eigen::Index j = 0; j < rank; ++j)
    {
        Eigen::Index arg = 0;
        result.basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (result.basis(arg, j) < 0.0)
        {
            result.basis.col(j) *= -1.0;
        }
    }

    int k = 0;
    if (const auto* count = std::get_if<ComponentCount>(&retention))
    {
        if (count->k < 1 || count->k > rank)
        {
            throw ArgumentError("Requested " + std::to_string(count->k) + " components but the data has rank " +
                                std::to_string(rank));
        }
        k = count->k;
    } else
    {
        const double target = std::get<CoverageTarget>(retention).fraction;
        const double total = result.variances.sum();
        double running = 0.0;
        for (k = 0; k < rank;)
        {
            running += result.variances(k);
            ++k;
            if (running / total >= target)
            {
                break;
            }
        }
    }

    const Eigen::VectorXd sigma = result.variances.head(k).cwiseSqrt();
    Eigen::MatrixXd recover = result.basis.leftCols(k) * sigma.asDiagonal();
    const double coverage = std::min(1.0, cumulative_coverage(result.variances, k));
    result.whitening = WhiteningTransform(std::move(recover), coverage);
    return result;
}

} // namespace model
} // namespace earfit
