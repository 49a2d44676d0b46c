/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/eval/evaluation.hpp
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

#ifndef EARFIT_EVAL_EVALUATION_HPP
#define EARFIT_EVAL_EVALUATION_HPP

#include "earfit/core/image.hpp"
#include "earfit/core/types.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace earfit {
namespace eval {

/**
 * Normalised landmark error statistics. std_dev is the population standard
 * deviation; fractions count errors <= the threshold; ced[i] is the
 * fraction of errors <= thresholds[i].
 */
struct EvalReport
{
    std::vector<std::string> ids;
    std::vector<double> errors;
    double mean = 0.0;
    double std_dev = 0.0;
    double median = 0.0;
    double fraction_below_0_1 = 0.0;
    double fraction_below_0_06 = 0.0;
    std::vector<double> thresholds;
    std::vector<double> ced;
    std::optional<std::uint64_t> seed; ///< Recorded only; evaluation is deterministic.
};

struct CedOptions
{
    double step = 0.01;
    double max = 0.1;
};

/// Statistics of a list of per-item errors. Throws ArgumentError when empty.
EvalReport summarise(std::vector<double> errors, std::vector<std::string> ids = {}, const CedOptions& ced = {});

/**
 * Per-item landmark_loss of predictions against ground truth, then
 * summarise(). Throws ArgumentError for empty or unequal lists.
 */
EvalReport evaluate(const std::vector<Landmarks>& predictions, const std::vector<Landmarks>& ground_truth,
                    const std::vector<std::string>& ids = {}, const CedOptions& ced = {});

/// JSON, schema "eval/1". Doubles round-trip exactly.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// CSV with header "threshold,fraction" and one row per CED sample.
std::string ced_to_csv(const EvalReport& report);

/// Writes <prefix>.json and <prefix>_ced.csv. Throws DataError with the path.
void emit_report(const EvalReport& report, const std::filesystem::path& prefix);

/// Marker colour used by draw_landmarks().
inline const Eigen::Vector3d kMarkerColour{0.0, 1.0, 0.0};

/// Draws a 3 x 3 marker of kMarkerColour centred on the pixel containing each point.
void draw_landmarks(Image& image, const Points2& points);

} // namespace eval
} // namespace earfit

#endif /* EARFIT_EVAL_EVALUATION_HPP */
