/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/core/config.hpp
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

#ifndef EARFIT_CORE_CONFIG_HPP
#define EARFIT_CORE_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>

namespace earfit {

/**
 * Flat key/value configuration in a TOML-like subset:
 *
 *   # comment
 *   seed = 7
 *   [raster]
 *   edge_sigma = 1.0       -> key "raster.edge_sigma"
 *   preset = "with-landmarks"
 *
 * Values are kept as strings; surrounding single or double quotes are removed and
 * trailing comments after unquoted values are dropped.
 */
using Config = std::map<std::string, std::string>;

/// Throws DataError naming the line on malformed input or duplicate keys.
Config parse_config(const std::string& text, const std::string& source = "config");

/// Throws DataError with the path when the file cannot be read.
Config read_config(const std::filesystem::path& path);

/// Serialises a config (sorted keys, sections flattened as dotted keys).
std::string format_config(const Config& config);

} // namespace earfit

#endif /* EARFIT_CORE_CONFIG_HPP */
