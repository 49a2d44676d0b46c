/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/data/io.hpp
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

#ifndef EARFIT_DATA_IO_HPP
#define EARFIT_DATA_IO_HPP

#include "earfit/core/types.hpp"
#include "earfit/data/annotated_image.hpp"
#include "earfit/fitting/code_vector.hpp"
#include "earfit/fitting/fit_report.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace earfit {
namespace data {

/// Reads a landmark file: 55 non-empty lines of "x y" in pixels. Blank lines
/// and lines starting with '#' are ignored. Throws DataError.
Landmarks read_landmarks(const std::filesystem::path& path);
void write_landmarks(const std::filesystem::path& path, const Landmarks& landmarks);

/**
 * One manifest entry. Paths are stored relative to the manifest's directory
 * when written and resolved against it when read.
 */
struct ManifestItem
{
    std::string id;
    std::filesystem::path image;
    std::optional<std::filesystem::path> landmarks;
    std::optional<std::filesystem::path> code_vector;
    std::optional<std::array<int, 4>> crop; ///< x, y, width, height in the source image.
};

/**
 * Manifest JSON, schema "manifest/1":
 *
 *   {"schema": "manifest/1", "seed": 7,
 *    "items": [{"id": "...", "image": "a.png", "landmarks": "a.txt",
 *               "code_vector": "a.json", "crop": [x, y, w, h]}]}
 *
 * "seed" and the optional item keys may be absent. Stored paths are relative
 * to the manifest's directory. read_manifest() resolves them against that
 * directory and write_manifest() takes paths as seen from the working
 * directory, so the two are inverses.
 */
struct Manifest
{
    std::optional<std::uint64_t> seed;
    std::vector<ManifestItem> items;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Loads an item's image and landmarks (and code vector when listed).
AnnotatedImage load_item(const ManifestItem& item);

/**
 * Code vector JSON, schema "code_vector/1":
 *
 *   {"schema": "code_vector/1",
 *    "pose": {"azimuth": ., "elevation": ., "roll": ., "translation": [tx, ty], "scale": .},
 *    "shape": [...], "colour": [...]}
 *
 * Pose values are in the normalised frame.
 */
std::string code_vector_to_json(const fitting::CodeVector& v);
fitting::CodeVector code_vector_from_json(const std::string& text);
void write_code_vector(const std::filesystem::path& path, const fitting::CodeVector& v);
fitting::CodeVector read_code_vector(const std::filesystem::path& path);

/// Fit report JSON, schema "fit_report/1". Wall-clock time is left out so
/// that reports are reproducible byte for byte.
std::string fit_report_to_json(const fitting::FitReport& report, const std::string& stage);

struct FitStage
{
    std::string name; ///< "landmarks", "photometric" or "diverged".
    fitting::FitReport report;
};

/// Reports of the stages of one fit, schema "fit_run/1":
/// {"schema", "seed" (null when unknown), "stages": [fit_report/1, ...]}.
std::string fit_run_to_json(const std::vector<FitStage>& stages, std::optional<std::uint64_t> seed);

/// Writes text to a file, throwing DataError with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace data
} // namespace earfit

#endif /* EARFIT_DATA_IO_HPP */
