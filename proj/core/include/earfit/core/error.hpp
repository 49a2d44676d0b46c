/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/core/error.hpp
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

#ifndef EARFIT_CORE_ERROR_HPP
#define EARFIT_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace earfit {

/**
 * Base class of every exception thrown by the library.
 *
 * The command-line tool maps the subclasses onto process exit codes:
 * ArgumentError -> 2, DataError / ModelError -> 3, DivergenceError -> 4.
 */
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument: wrong length, out-of-range index, bad option value.
class ArgumentError : public Error
{
public:
    using Error::Error;
};

/// A statistical model cannot be built or is internally inconsistent.
class ModelError : public Error
{
public:
    using Error::Error;
};

/// I/O failure or malformed file contents.
class DataError : public Error
{
public:
    using Error::Error;
};

/// An optimiser produced non-finite values. Fitting code throws a subclass
/// that carries the best state seen before divergence.
class DivergenceError : public Error
{
public:
    using Error::Error;
};

} // namespace earfit

#endif /* EARFIT_CORE_ERROR_HPP */
