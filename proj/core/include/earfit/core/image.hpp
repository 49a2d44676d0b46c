/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/core/image.hpp
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

#ifndef EARFIT_CORE_IMAGE_HPP
#define EARFIT_CORE_IMAGE_HPP

#include "Eigen/Core"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace earfit {

/**
 * A linear-RGB float image, row-major with interleaved channels.
 *
 * Pixel (x, y) covers [x, x+1) x [y, y+1) with its centre at (x+0.5, y+0.5);
 * the origin is the top-left corner, x grows right and y grows down.
 */
class Image
{
public:
    Image() = default;
    Image(int width, int height, const Eigen::Vector3d& fill = Eigen::Vector3d::Zero());

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t num_pixels() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    double& operator()(int x, int y, int c) { return data_[index(x, y) + c]; }
    double operator()(int x, int y, int c) const { return data_[index(x, y) + c]; }

    Eigen::Vector3d pixel(int x, int y) const
    {
        const auto i = index(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set_pixel(int x, int y, const Eigen::Vector3d& rgb)
    {
        const auto i = index(x, y);
        data_[i] = rgb.x();
        data_[i + 1] = rgb.y();
        data_[i + 2] = rgb.z();
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/**
 * Bilinearly samples the image at a continuous pixel coordinate, with
 * edge-replicate behaviour outside the image. A point exactly on a pixel
 * centre returns that pixel's value.
 */
Eigen::Vector3d sample_bilinear(const Image& image, const Eigen::Vector2d& point);

/// True if the point lies inside the closed image rectangle [0,W] x [0,H].
bool inside_image(const Image& image, const Eigen::Vector2d& point) noexcept;

double srgb_to_linear(double encoded) noexcept;
double linear_to_srgb(double linear) noexcept;

/// Quantises a linear value to the 8-bit sRGB code written to PNG files.
std::uint8_t encode_srgb8(double linear) noexcept;

/// Reads an 8-bit (grey, grey+alpha, RGB or RGBA) PNG and converts it to linear RGB.
/// Throws DataError with the path on failure.
Image read_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG (sRGB encoded). Encoder settings are fixed so the
/// same image always produces the same bytes.
void write_png(const Image& image, const std::filesystem::path& path);

} // namespace earfit

#endif /* EARFIT_CORE_IMAGE_HPP */
