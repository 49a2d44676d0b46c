/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/fitting/fit_report.hpp
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

#ifndef EARFIT_FITTING_FIT_REPORT_HPP
#define EARFIT_FITTING_FIT_REPORT_HPP

#include "earfit/core/error.hpp"
#include "earfit/fitting/code_vector.hpp"
#include "earfit/fitting/losses.hpp"

#include <string>
#include <vector>

namespace earfit {
namespace fitting {

/**
 * Outcome of an optimisation run. trace[0] holds the terms at the initial
 * state and trace[i] the terms after iteration i, so trace.size() equals
 * iterations + 1.
 *
 * Landmark fits record the mean landmark distance in pixels in
 * LossTerms::total and the normalised landmark loss in LossTerms::landmark.
 */
struct FitReport
{
    CodeVector code;
    std::vector<LossTerms> trace;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    double seconds = 0.0;
};

/// Thrown when an optimiser meets non-finite values; carries the best state seen.
class FitDivergedError : public DivergenceError
{
public:
    FitDivergedError(const std::string& what, FitReport best) : DivergenceError(what), best_(std::move(best)) {}

    const FitReport& best() const noexcept { return best_; }

private:
    FitReport best_;
};

} // namespace fitting
} // namespace earfit

#endif /* EARFIT_FITTING_FIT_REPORT_HPP */
