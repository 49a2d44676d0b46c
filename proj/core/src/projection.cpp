/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/projection.cpp
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
#include "earfit/projection/projection.hpp"
#include "earfit/core/error.hpp"

#include <cmath>
#include <string>

namespace earfit {
namespace projection {

namespace {

Eigen::Matrix3d rot_x(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

Eigen::Matrix3d rot_y(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

Eigen::Matrix3d rot_z(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

Eigen::Matrix3d d_rot_x(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d r;
    r << 0, 0, 0, 0, -s, -c, 0, c, -s;
    return r;
}

Eigen::Matrix3d d_rot_y(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d r;
    r << -s, 0, c, 0, 0, 0, -c, 0, -s;
    return r;
}

Eigen::Matrix3d d_rot_z(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d r;
    r << -s, -c, 0, c, -s, 0, 0, 0, 0;
    return r;
}

} // namespace

void validate(const Pose& pose)
{
    if (!pose.rotation.allFinite() || !pose.translation.allFinite() || !std::isfinite(pose.scale))
    {
        throw ArgumentError("Pose has non-finite components");
    }
    if (!(pose.scale > 0.0))
    {
        throw ArgumentError("Pose scale must be positive, got " + std::to_string(pose.scale));
    }
}

Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& angles)
{
    return rot_z(angles(2)) * rot_y(angles(0)) * rot_x(angles(1));
}

std::array<Eigen::Matrix3d, 3> rotation_derivatives(const Eigen::Vector3d& angles)
{
    const Eigen::Matrix3d rx = rot_x(angles(1));
    const Eigen::Matrix3d ry = rot_y(angles(0));
    const Eigen::Matrix3d rz = rot_z(angles(2));
    return {rz * d_rot_y(angles(0)) * rx, rz * ry * d_rot_x(angles(1)), d_rot_z(angles(2)) * ry * rx};
}

ProjectedShape project_sop(const Vertices& shape, const Pose& pose)
{
    const Eigen::Matrix3d r = rotation_from_euler(pose.rotation);
    const Vertices rotated = shape * r.transpose();
    ProjectedShape out;
    out.points = pose.scale * rotated.leftCols<2>();
    out.points.rowwise() += pose.translation.transpose();
    out.depth = rotated.col(2);
    return out;
}

Landmarks select_landmarks(const ProjectedShape& projected, std::span<const int> indices)
{
    const auto n = projected.points.rows();
    Landmarks out(static_cast<Eigen::Index>(indices.size()), 2);
    for (std::size_t i = 0; i < indices.size(); ++i)
    {
        const int v = indices[i];
        if (v < 0 || v >= n)
        {
            throw ArgumentError("Landmark index " + std::to_string(v) + " out of range for " + std::to_string(n) +
                                " projected vertices");
        }
        out.row(static_cast<Eigen::Index>(i)) = projected.points.row(v);
    }
    return out;
}

} // namespace projection
} // namespace earfit
