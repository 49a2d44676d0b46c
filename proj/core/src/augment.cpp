/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/augment.cpp
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
#include "earfit/data/augment.hpp"
#include "earfit/core/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace earfit {
namespace data {

void validate(const AnnotatedImage& item)
{
    if (item.image.empty())
    {
        throw DataError("Item '" + item.id + "' has an empty image");
    }
    if (item.landmarks.rows() != kNumLandmarks || !item.landmarks.allFinite())
    {
        throw DataError("Item '" + item.id + "' needs 55 finite landmarks, got " +
                        std::to_string(item.landmarks.rows()));
    }
    const double mx = 0.1 * item.image.width();
    const double my = 0.1 * item.image.height();
    for (Eigen::Index i = 0; i < item.landmarks.rows(); ++i)
    {
        const double x = item.landmarks(i, 0);
        const double y = item.landmarks(i, 1);
        if (x < -mx || x > item.image.width() + mx || y < -my || y > item.image.height() + my)
        {
            throw DataError("Item '" + item.id + "': landmark " + std::to_string(i) +
                            " lies outside the image margin");
        }
    }
}

Eigen::Vector2d ear_direction(const Landmarks& landmarks, int lobe, int helix)
{
    const auto n = static_cast<int>(landmarks.rows());
    if (lobe < 0 || lobe >= n || helix < 0 || helix >= n || lobe == helix)
    {
        throw ArgumentError("ear_direction needs two distinct landmark indices in [0, " + std::to_string(n) + ")");
    }
    const Eigen::Vector2d d = (landmarks.row(helix) - landmarks.row(lobe)).transpose();
    const double length = d.norm();
    if (!(length > 0.0))
    {
        throw DataError("Lobe and helix landmarks coincide");
    }
    return d / length;
}

double direction_angle(const Eigen::Vector2d& direction) noexcept
{
    return std::atan2(direction.x(), -direction.y());
}

namespace {

Eigen::Matrix2d rotation(double angle)
{
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

Eigen::Vector2d image_centre(const Image& image)
{
    return {0.5 * image.width(), 0.5 * image.height()};
}

} // namespace

Points2 rotate_points(const Points2& points, const Eigen::Vector2d& centre, double angle)
{
    const Eigen::Matrix2d r = rotation(angle);
    Points2 out(points.rows(), 2);
    for (Eigen::Index i = 0; i < points.rows(); ++i)
    {
        out.row(i) = (centre + r * (points.row(i).transpose() - centre)).transpose();
    }
    return out;
}

Image rotate_image(const Image& image, double angle)
{
    const Eigen::Matrix2d inverse = rotation(-angle);
    const Eigen::Vector2d centre = image_centre(image);
    Image out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
    {
        for (int x = 0; x < image.width(); ++x)
        {
            const Eigen::Vector2d q(x + 0.5, y + 0.5);
            out.set_pixel(x, y, sample_bilinear(image, centre + inverse * (q - centre)));
        }
    }
    return out;
}

std::vector<AnnotatedImage> augment(const AnnotatedImage& item, const AugmentOptions& options, std::uint64_t seed)
{
    validate(item);
    if (options.count < 1)
    {
        throw ArgumentError("Augmentation count must be at least 1");
    }
    if (!(options.range_degrees >= 0.0) || options.range_degrees > 180.0)
    {
        throw ArgumentError("Augmentation range must lie in [0, 180] degrees");
    }
    const double current = direction_angle(ear_direction(item.landmarks, options.lobe, options.helix));
    const double range = options.range_degrees * std::numbers::pi / 180.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(-range, range);
    const Eigen::Vector2d centre = image_centre(item.image);

    std::vector<AnnotatedImage> out;
    out.reserve(static_cast<std::size_t>(options.count));
    for (int i = 0; i < options.count; ++i)
    {
        const double target = draw(rng);
        const double angle = target - current;
        AnnotatedImage copy;
        copy.id = item.id + "_rot" + std::to_string(i);
        copy.image = rotate_image(item.image, angle);
        copy.landmarks = rotate_points(item.landmarks, centre, angle);
        if (item.truth)
        {
            // Rotating the image about its centre composes with the roll
            // angle and rotates the centre-relative translation.
            fitting::CodeVector v = *item.truth;
            v.pose.rotation(2) += angle;
            v.pose.translation = rotation(angle) * v.pose.translation;
            copy.truth = v;
        }
        out.push_back(std::move(copy));
    }
    return out;
}

} // namespace data
} // namespace earfit
