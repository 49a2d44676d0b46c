/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/fitting/landmark_fit.hpp
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

#ifndef EARFIT_FITTING_LANDMARK_FIT_HPP
#define EARFIT_FITTING_LANDMARK_FIT_HPP

#include "earfit/core/types.hpp"
#include "earfit/fitting/code_vector.hpp"
#include "earfit/fitting/fit_report.hpp"
#include "earfit/model/morphable_model.hpp"

namespace earfit {
namespace fitting {

struct LandmarkFitOptions
{
    int max_iterations = 200;
    double relative_tolerance = 1e-8; ///< On the mean landmark distance.
    double gradient_tolerance = 1e-10;
    double initial_damping = 1e-3;
    double max_damping = 1e12;
};

/**
 * Starting point with zero shape and rotation: translation and scale align
 * the bounding box of the mean-shape landmarks with that of gt.
 */
CodeVector landmark_initialisation(const model::MorphableModel& model, const Landmarks& gt, const Frame& frame,
                                   int k_colour);

/**
 * Levenberg-Marquardt on the 110 landmark residuals over the normalised pose
 * and the whitened shape parameters; colour parameters pass through
 * unchanged. A step is accepted only if it lowers the mean landmark distance.
 *
 * Throws FitDivergedError on non-finite residuals.
 */
FitReport fit_landmarks(const model::MorphableModel& model, const Landmarks& gt, const Frame& frame,
                        const CodeVector& init, const LandmarkFitOptions& options = {});

} // namespace fitting
} // namespace earfit

#endif /* EARFIT_FITTING_LANDMARK_FIT_HPP */
