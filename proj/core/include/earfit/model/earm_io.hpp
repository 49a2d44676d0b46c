/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/model/earm_io.hpp
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

#ifndef EARFIT_MODEL_EARM_IO_HPP
#define EARFIT_MODEL_EARM_IO_HPP

#include "earfit/model/morphable_model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace earfit {
namespace model {

/**
 * Contents of an EARM v1 model file.
 *
 * Byte layout (all integers and floats little-endian):
 *
 *   offset 0   4 bytes  magic "EARM"
 *   offset 4   uint32   format version (1)
 *   offset 8   uint64   H, byte length of the JSON header
 *   offset 16  H bytes  UTF-8 JSON header
 *   then the binary blocks listed in header["blocks"], in order, unpadded:
 *     mean_shape      float64[3N]
 *     shape_basis     float64[3N * K_full]   column-major (component-contiguous)
 *     recover_matrix  float64[K_full * K_white] column-major
 *     triangles       uint32[3F]             row-major (v0 v1 v2 per triangle)
 *     mean_colour     float64[3N]            optional
 *     colour_basis    float64[3N * K_colour] optional, column-major
 *
 * The header holds n_vertices, k_full, k_white, coverage, n_triangles,
 * landmark_indices and, when colour blocks are present, a "colour" object
 * with k and coverage. Loaders reject block counts that disagree with these
 * dimensions and files whose size differs from the declared layout.
 */
struct EarmContents
{
    MorphableModel shape;
    std::optional<ColourModel> colour;
};

std::vector<std::uint8_t> encode_earm(const MorphableModel& shape, const ColourModel* colour = nullptr);
EarmContents decode_earm(const std::vector<std::uint8_t>& bytes);

/// Throws DataError (with the path) on I/O failure or malformed contents.
void write_earm(const std::filesystem::path& path, const MorphableModel& shape,
                const ColourModel* colour = nullptr);
EarmContents read_earm(const std::filesystem::path& path);

} // namespace model
} // namespace earfit

#endif /* EARFIT_MODEL_EARM_IO_HPP */
