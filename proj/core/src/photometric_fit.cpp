/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/photometric_fit.cpp
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
#include "earfit/fitting/photometric_fit.hpp"
#include "earfit/core/error.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>

namespace earfit {
namespace fitting {

CodeVector pose_grid_initialisation(const Objective& objective)
{
    const int ks = objective.shape_model().k_white();
    const int kc = objective.colour_model().k();
    CodeVector best;
    double best_loss = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int roll_deg = -60; roll_deg <= 60; roll_deg += 15)
    {
        for (const double scale : {0.7, 1.0, 1.3})
        {
            CodeVector v = CodeVector::zero(ks, kc);
            v.pose.rotation(2) = roll_deg * std::numbers::pi / 180.0;
            v.pose.scale = scale;
            const double loss = objective.evaluate(v, false).terms.total;
            if (!found || loss < best_loss)
            {
                best = v;
                best_loss = loss;
                found = true;
            }
        }
    }
    return best;
}

FitReport fit_photometric(const Objective& objective, const CodeVector& init, const PhotometricFitOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    const int ks = objective.shape_model().k_white();
    const int kc = objective.colour_model().k();
    init.validate(ks, kc);
    if (options.max_iterations < 0 || !(options.learning_rate > 0.0) || options.stop_window < 1 ||
        options.plateau_patience < 1)
    {
        throw ArgumentError("Invalid photometric-fit options");
    }

    FitReport report;
    Eigen::VectorXd x = init.flatten();
    LossEvaluation current = objective.evaluate(init, true);
    report.trace.push_back(current.terms);
    Eigen::VectorXd best = x;
    double best_loss = current.terms.total;

    auto finish = [&](bool converged, const char* reason) {
        report.code = CodeVector::unflatten(best, ks, kc);
        report.converged = converged;
        report.stop_reason = reason;
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    };
    if (!std::isfinite(current.terms.total) || !current.gradient.allFinite())
    {
        throw FitDivergedError("Photometric fit: non-finite loss at the initial state", finish(false, "diverged"));
    }

    Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(x.size());
    double lr = options.learning_rate;
    double b1t = 1.0, b2t = 1.0;
    int since_best = 0;
    for (int iter = 1; iter <= options.max_iterations; ++iter)
    {
        const Eigen::VectorXd& g = current.gradient;
        m = options.beta1 * m + (1.0 - options.beta1) * g;
        s = options.beta2 * s + (1.0 - options.beta2) * g.cwiseAbs2();
        b1t *= options.beta1;
        b2t *= options.beta2;
        const Eigen::VectorXd m_hat = m / (1.0 - b1t);
        const Eigen::VectorXd s_hat = s / (1.0 - b2t);
        x.array() -= lr * m_hat.array() / (s_hat.array().sqrt() + options.epsilon);
        x(5) = std::max(x(5), options.min_scale);

        if (!x.allFinite())
        {
            report.iterations = iter - 1;
            throw FitDivergedError("Photometric fit: non-finite parameters", finish(false, "diverged"));
        }
        current = objective.evaluate(CodeVector::unflatten(x, ks, kc), true);
        if (!std::isfinite(current.terms.total) || !current.gradient.allFinite())
        {
            report.iterations = iter - 1;
            throw FitDivergedError("Photometric fit: non-finite loss", finish(false, "diverged"));
        }
        report.trace.push_back(current.terms);
        report.iterations = iter;

        if (current.terms.total < best_loss)
        {
            best_loss = current.terms.total;
            best = x;
            since_best = 0;
        }
        else if (++since_best >= options.plateau_patience)
        {
            lr = std::max(lr * options.decay, options.min_learning_rate);
            since_best = 0;
        }

        if (iter >= options.stop_window)
        {
            const double then = report.trace[static_cast<std::size_t>(iter - options.stop_window)].total;
            const double now = current.terms.total;
            if (std::abs(then - now) <= options.stop_tolerance * std::abs(then))
            {
                return finish(true, "relative tolerance");
            }
        }
    }
    return finish(false, "iteration limit");
}

} // namespace fitting
} // namespace earfit
