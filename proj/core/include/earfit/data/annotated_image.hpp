/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/data/annotated_image.hpp
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

#ifndef EARFIT_DATA_ANNOTATED_IMAGE_HPP
#define EARFIT_DATA_ANNOTATED_IMAGE_HPP

#include "earfit/core/image.hpp"
#include "earfit/core/types.hpp"
#include "earfit/fitting/code_vector.hpp"

#include <optional>
#include <string>

namespace earfit {
namespace data {

/// An ear image with its 55 landmarks and, for synthetic data, the code
/// vector it was rendered from.
struct AnnotatedImage
{
    std::string id;
    Image image;
    Landmarks landmarks;
    std::optional<fitting::CodeVector> truth;
};

/**
 * Throws DataError unless the item has a non-empty image and 55 finite
 * landmarks lying within the image extended by a 10% margin on each side.
 */
void validate(const AnnotatedImage& item);

} // namespace data
} // namespace earfit

#endif /* EARFIT_DATA_ANNOTATED_IMAGE_HPP */
