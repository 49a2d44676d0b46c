/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/landmark_fit.cpp
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
#include "earfit/fitting/landmark_fit.hpp"
#include "earfit/core/error.hpp"
#include "earfit/projection/projection.hpp"

#include "Eigen/Cholesky"

#include <chrono>
#include <cmath>
#include <string>

namespace earfit {
namespace fitting {

namespace {

/// Landmark-only slice of the model: mean and whitened basis rows of the 55 vertices.
struct LandmarkProblem
{
    Eigen::MatrixXd mean; ///< 55 x 3
    Eigen::MatrixXd basis; ///< 165 x k, rows 3i..3i+2 belong to landmark i.
    const Landmarks* gt;
    const Frame* frame;
    int k;

    struct Evaluation
    {
        Eigen::VectorXd residual; ///< 110, (x0 y0 x1 y1 ...)
        Eigen::MatrixXd jacobian; ///< 110 x (6 + k)
        double energy = 0.0;      ///< Mean landmark distance, pixels.
    };

    /// params = (az, el, roll, tx, ty, scale, shape...), pose normalised.
    Evaluation evaluate(const Eigen::VectorXd& params, bool with_jacobian) const
    {
        const Eigen::Vector3d angles = params.head<3>();
        projection::Pose normalised;
        normalised.rotation = angles;
        normalised.translation = params.segment<2>(3);
        normalised.scale = params(5);
        const projection::Pose pose = frame->to_pixels(normalised);
        const Eigen::Matrix3d r = projection::rotation_from_euler(angles);
        const Eigen::VectorXd offsets = basis * params.tail(k);

        Evaluation out;
        out.residual.resize(2 * kNumLandmarks);
        if (with_jacobian)
        {
            out.jacobian.resize(2 * kNumLandmarks, CodeVector::kPoseDims + k);
        }
        const auto dr = projection::rotation_derivatives(angles);
        const Eigen::Matrix<double, 2, 3> pr = r.topRows<2>();
        double energy = 0.0;
        for (int i = 0; i < kNumLandmarks; ++i)
        {
            const Eigen::Vector3d s = mean.row(i).transpose() + offsets.segment<3>(3 * i);
            const Eigen::Vector2d x = pose.scale * (pr * s) + pose.translation;
            const Eigen::Vector2d d = x - gt->row(i).transpose();
            out.residual.segment<2>(2 * i) = d;
            energy += d.norm();
            if (!with_jacobian)
            {
                continue;
            }
            auto rows = out.jacobian.middleRows<2>(2 * i);
            for (int a = 0; a < 3; ++a)
            {
                rows.col(a) = pose.scale * (dr[a] * s).head<2>();
            }
            rows.col(3) = Eigen::Vector2d(frame->half_extent(), 0.0);
            rows.col(4) = Eigen::Vector2d(0.0, frame->half_extent());
            rows.col(5) = frame->unit_scale * (pr * s);
            rows.rightCols(k) = pose.scale * (pr * basis.middleRows<3>(3 * i));
        }
        out.energy = energy / kNumLandmarks;
        return out;
    }
};

Eigen::VectorXd to_params(const CodeVector& v)
{
    Eigen::VectorXd p(CodeVector::kPoseDims + v.shape.size());
    p.head<3>() = v.pose.rotation;
    p.segment<2>(3) = v.pose.translation;
    p(5) = v.pose.scale;
    p.tail(v.shape.size()) = v.shape;
    return p;
}

CodeVector from_params(const Eigen::VectorXd& p, const Eigen::VectorXd& colour)
{
    CodeVector v;
    v.pose.rotation = p.head<3>();
    v.pose.translation = p.segment<2>(3);
    v.pose.scale = p(5);
    v.shape = p.tail(p.size() - CodeVector::kPoseDims);
    v.colour = colour;
    return v;
}

LossTerms energy_terms(double energy, double diagonal)
{
    LossTerms t;
    t.total = energy;
    t.landmark = energy / diagonal;
    return t;
}

} // namespace

CodeVector landmark_initialisation(const model::MorphableModel& model, const Landmarks& gt, const Frame& frame,
                                   int k_colour)
{
    if (gt.rows() != kNumLandmarks || !gt.allFinite())
    {
        throw ArgumentError("Expected 55 finite ground-truth landmarks");
    }
    projection::Pose unit;
    const auto projected = projection::project_sop(model.mean_vertices(), unit);
    const Landmarks x0 = projection::select_landmarks(projected, model.landmark_indices());
    const double d0 = bbox_diagonal(x0);
    const double d1 = bbox_diagonal(gt);
    if (!(d0 > 0.0) || !(d1 > 0.0))
    {
        throw ArgumentError("Landmark bounding box has zero diagonal");
    }
    const Eigen::Vector2d c0 = 0.5 * (x0.colwise().minCoeff() + x0.colwise().maxCoeff()).transpose();
    const Eigen::Vector2d c1 = 0.5 * (gt.colwise().minCoeff() + gt.colwise().maxCoeff()).transpose();

    projection::Pose px;
    px.scale = d1 / d0;
    px.translation = c1 - px.scale * c0;
    CodeVector v = CodeVector::zero(model.k_white(), k_colour);
    v.pose = frame.to_normalised(px);
    return v;
}

FitReport fit_landmarks(const model::MorphableModel& model, const Landmarks& gt, const Frame& frame,
                        const CodeVector& init, const LandmarkFitOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    if (gt.rows() != kNumLandmarks || !gt.allFinite())
    {
        throw ArgumentError("Expected 55 finite ground-truth landmarks");
    }
    init.validate(model.k_white(), static_cast<int>(init.colour.size()));
    if (options.max_iterations < 0 || !(options.initial_damping > 0.0))
    {
        throw ArgumentError("Invalid landmark-fit options");
    }
    const double diagonal = bbox_diagonal(gt);
    if (!(diagonal > 0.0))
    {
        throw ArgumentError("Ground-truth landmark bounding box has zero diagonal");
    }

    LandmarkProblem problem;
    problem.k = model.k_white();
    problem.gt = &gt;
    problem.frame = &frame;
    problem.mean.resize(kNumLandmarks, 3);
    problem.basis.resize(3 * kNumLandmarks, problem.k);
    const auto& indices = model.landmark_indices();
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        problem.mean.row(i) = model.mean_shape().segment<3>(3 * indices[i]).transpose();
        problem.basis.middleRows<3>(3 * i) = model.whitened_basis().middleRows<3>(3 * indices[i]);
    }

    FitReport report;
    Eigen::VectorXd params = to_params(init);
    auto current = problem.evaluate(params, true);
    report.code = init;
    report.trace.push_back(energy_terms(current.energy, diagonal));
    auto finish = [&](bool converged, const char* reason) {
        report.code = from_params(params, init.colour);
        report.converged = converged;
        report.stop_reason = reason;
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    };
    if (!std::isfinite(current.energy))
    {
        throw FitDivergedError("Landmark fit: non-finite residual at the initial state", finish(false, "diverged"));
    }

    double mu = options.initial_damping;
    for (int iter = 1; iter <= options.max_iterations; ++iter)
    {
        if (current.energy == 0.0)
        {
            return finish(true, "zero energy");
        }
        const Eigen::VectorXd gradient = current.jacobian.transpose() * current.residual;
        if (gradient.norm() < options.gradient_tolerance)
        {
            return finish(true, "gradient tolerance");
        }
        const Eigen::MatrixXd normal = current.jacobian.transpose() * current.jacobian;
        const Eigen::VectorXd diag = normal.diagonal().cwiseMax(1e-12 * normal.diagonal().maxCoeff());
        Eigen::MatrixXd damped = normal;
        damped.diagonal() += mu * diag;
        const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
        const Eigen::VectorXd trial = params + step;

        bool accepted = false;
        if (step.allFinite() && trial(5) > 0.0)
        {
            auto candidate = problem.evaluate(trial, false);
            if (!std::isfinite(candidate.energy))
            {
                report.iterations = iter - 1;
                throw FitDivergedError("Landmark fit: non-finite residual", finish(false, "diverged"));
            }
            if (candidate.energy < current.energy)
            {
                const double relative = (current.energy - candidate.energy) / current.energy;
                params = trial;
                current = problem.evaluate(params, true);
                mu = std::max(mu / 10.0, 1e-15);
                accepted = true;
                report.iterations = iter;
                report.trace.push_back(energy_terms(current.energy, diagonal));
                if (relative < options.relative_tolerance)
                {
                    return finish(true, "relative tolerance");
                }
            }
        }
        if (!accepted)
        {
            mu *= 10.0;
            report.iterations = iter;
            report.trace.push_back(energy_terms(current.energy, diagonal));
            if (mu > options.max_damping)
            {
                return finish(true, "damping limit");
            }
        }
    }
    return finish(false, "iteration limit");
}

} // namespace fitting
} // namespace earfit
