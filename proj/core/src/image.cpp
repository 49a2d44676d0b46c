/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/image.cpp
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
#include "earfit/core/image.hpp"
#include "earfit/core/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace earfit {

Image::Image(int width, int height, const Eigen::Vector3d& fill) : width_(width), height_(height)
{
    if (width < 1 || height < 1)
    {
        throw ArgumentError("Image dimensions must be positive, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    data_.resize(num_pixels() * 3);
    for (std::size_t i = 0; i < num_pixels(); ++i)
    {
        data_[3 * i] = fill.x();
        data_[3 * i + 1] = fill.y();
        data_[3 * i + 2] = fill.z();
    }
}

Eigen::Vector3d sample_bilinear(const Image& image, const Eigen::Vector2d& point)
{
    const double u = point.x() - 0.5;
    const double v = point.y() - 0.5;
    const double fx = std::floor(u);
    const double fy = std::floor(v);
    const double ax = u - fx;
    const double ay = v - fy;
    const auto clamp_x = [&](double x) { return static_cast<int>(std::clamp(x, 0.0, image.width() - 1.0)); };
    const auto clamp_y = [&](double y) { return static_cast<int>(std::clamp(y, 0.0, image.height() - 1.0)); };
    const int x0 = clamp_x(fx);
    const int x1 = clamp_x(fx + 1.0);
    const int y0 = clamp_y(fy);
    const int y1 = clamp_y(fy + 1.0);
    if (ax == 0.0 && ay == 0.0)
    {
        return image.pixel(x0, y0);
    }
    // Difference form: exact on constant regions.
    const Eigen::Vector3d p00 = image.pixel(x0, y0);
    const Eigen::Vector3d p01 = image.pixel(x0, y1);
    const Eigen::Vector3d top = p00 + ax * (image.pixel(x1, y0) - p00);
    const Eigen::Vector3d bottom = p01 + ax * (image.pixel(x1, y1) - p01);
    return top + ay * (bottom - top);
}

bool inside_image(const Image& image, const Eigen::Vector2d& point) noexcept
{
    return point.x() >= 0.0 && point.y() >= 0.0 && point.x() <= image.width() &&
           point.y() <= image.height();
}

double srgb_to_linear(double encoded) noexcept
{
    if (encoded <= 0.04045)
    {
        return encoded / 12.92;
    }
    return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) noexcept
{
    if (linear <= 0.0031308)
    {
        return 12.92 * linear;
    }
    return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

std::uint8_t encode_srgb8(double linear) noexcept
{
    const double encoded = linear_to_srgb(std::clamp(linear, 0.0, 1.0));
    return static_cast<std::uint8_t>(std::lround(encoded * 255.0));
}

namespace {

struct FileCloser
{
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Lookup table: 8-bit sRGB code -> linear value.
const std::array<double, 256>& decode_table()
{
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i)
        {
            t[i] = srgb_to_linear(i / 255.0);
        }
        return t;
    }();
    return table;
}

} // namespace

Image read_png(const std::filesystem::path& path)
{
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file)
    {
        throw DataError("Cannot open PNG file: " + path.string());
    }
    png_byte signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
    {
        throw DataError("Not a PNG file: " + path.string());
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info)
    {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng initialisation failed reading " + path.string());
    }
    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    if (setjmp(png_jmpbuf(png)))
    {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("Corrupt PNG file: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int colour_type = png_get_color_type(png, info);
    if (bit_depth == 16)
    {
        png_set_strip_16(png);
    }
    if (colour_type == PNG_COLOR_TYPE_PALETTE)
    {
        png_set_palette_to_rgb(png);
    }
    if (colour_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (colour_type == PNG_COLOR_TYPE_GRAY || colour_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    {
        png_set_gray_to_rgb(png);
    }
    if (colour_type & PNG_COLOR_MASK_ALPHA)
    {
        png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);
    const auto row_bytes = png_get_rowbytes(png, info);
    pixels.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
    {
        rows[y] = pixels.data() + y * row_bytes;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (row_bytes != width * 3)
    {
        throw DataError("Unsupported PNG pixel layout in " + path.string());
    }
    const auto& table = decode_table();
    Image image(static_cast<int>(width), static_cast<int>(height));
    auto out = image.data();
    for (std::size_t i = 0; i < pixels.size(); ++i)
    {
        out[i] = table[pixels[i]];
    }
    return image;
}

void write_png(const Image& image, const std::filesystem::path& path)
{
    if (image.empty())
    {
        throw ArgumentError("Cannot write an empty image to " + path.string());
    }
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file)
    {
        throw DataError("Cannot open PNG file for writing: " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info)
    {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng initialisation failed writing " + path.string());
    }
    const auto width = static_cast<std::size_t>(image.width());
    const auto height = static_cast<std::size_t>(image.height());
    std::vector<png_byte> pixels(width * height * 3);
    const auto in = image.data();
    for (std::size_t i = 0; i < pixels.size(); ++i)
    {
        pixels[i] = encode_srgb8(in[i]);
    }
    std::vector<png_bytep> rows(height);
    for (std::size_t y = 0; y < height; ++y)
    {
        rows[y] = pixels.data() + y * width * 3;
    }
    if (setjmp(png_jmpbuf(png)))
    {
        png_destroy_write_struct(&png, &info);
        throw DataError("Failed writing PNG file: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_set_compression_level(png, 6);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0)
    {
        throw DataError("Failed flushing PNG file: " + path.string());
    }
}

} // namespace earfit
