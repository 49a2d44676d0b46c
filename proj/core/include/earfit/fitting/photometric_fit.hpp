/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/fitting/photometric_fit.hpp
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

#ifndef EARFIT_FITTING_PHOTOMETRIC_FIT_HPP
#define EARFIT_FITTING_PHOTOMETRIC_FIT_HPP

#include "earfit/fitting/code_vector.hpp"
#include "earfit/fitting/fit_report.hpp"
#include "earfit/fitting/losses.hpp"

namespace earfit {
namespace fitting {

struct PhotometricFitOptions
{
    int max_iterations = 400;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int plateau_patience = 25;    ///< Iterations without a new best before the step is decayed.
    double decay = 0.5;
    double min_learning_rate = 1e-5;
    int stop_window = 20;          ///< Early stop when the loss changed less than
    double stop_tolerance = 1e-6;  ///< this (relative) over the last stop_window iterations.
    double min_scale = 1e-3;       ///< Normalised scale is kept above this.
};

/**
 * Coarse search used when no landmarks are available: roll from -60 to 60
 * degrees in 15 degree steps and normalised scale in {0.7, 1.0, 1.3}, centred,
 * zero shape and colour. Returns the grid point with the lowest total loss
 * (the first one on ties).
 */
CodeVector pose_grid_initialisation(const Objective& objective);

/**
 * Minimises the objective with Adam from init. Returns the best state seen;
 * throws FitDivergedError (carrying it) when the loss becomes non-finite.
 */
FitReport fit_photometric(const Objective& objective, const CodeVector& init,
                          const PhotometricFitOptions& options = {});

} // namespace fitting
} // namespace earfit

#endif /* EARFIT_FITTING_PHOTOMETRIC_FIT_HPP */
