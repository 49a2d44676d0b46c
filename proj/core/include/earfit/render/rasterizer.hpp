/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/include/earfit/render/rasterizer.hpp
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

#ifndef EARFIT_RENDER_RASTERIZER_HPP
#define EARFIT_RENDER_RASTERIZER_HPP

#include "earfit/core/image.hpp"
#include "earfit/core/types.hpp"
#include "earfit/projection/projection.hpp"

#include "Eigen/Core"

#include <array>
#include <limits>
#include <vector>

namespace earfit {
namespace render {

struct RasterConfig
{
    int width = 128;
    int height = 128;
    double edge_sigma = 1.0; ///< Soft silhouette falloff in pixels; 0 = hard edges.
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
};

/// Throws ArgumentError for non-positive dimensions or a negative edge_sigma.
void validate(const RasterConfig& config);

/// The soft edge reaches exactly 0 (outside) and 1 (inside) at this many
/// edge_sigma from a silhouette edge.
inline constexpr double kEdgeSupport = 4.0;

/// Triangles with |2 * signed area| below this (pixels^2) are skipped.
inline constexpr double kDegenerateArea = 1e-10;

/// Twice the signed area of (a, b, p); positive when p is left of a->b in
/// a y-up frame.
inline double edge_function(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) noexcept
{
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

/**
 * Rescaled logistic coverage of a pixel at a signed distance (positive
 * inside) from the silhouette: 0.5 on the edge, exactly 0 / 1 beyond
 * kEdgeSupport * sigma.
 */
double soft_coverage(double signed_distance, double sigma) noexcept;

/// d soft_coverage / d signed_distance (zero outside the support band).
double soft_coverage_derivative(double signed_distance, double sigma) noexcept;

/// Mesh edge on the screen-space silhouette, v0 < v1.
struct SilhouetteEdge
{
    int v0;
    int v1;
};

/**
 * Edges bounding the projected mesh: edges with a single non-degenerate
 * adjacent triangle, edges whose two adjacent triangles have opposite
 * screen-space winding (folds), and non-manifold edges. Sorted by (v0, v1).
 */
std::vector<SilhouetteEdge> silhouette_edges(const Points2& points, const TriangleList& triangles);

/// Per-pixel record of what produced the pixel, consumed by the backward pass.
struct Fragment
{
    int triangle = -1; ///< Nearest covering triangle, -1 if uncovered.
    std::array<double, 3> bary{0.0, 0.0, 0.0};
    double depth = std::numeric_limits<double>::infinity();
    int edge = -1;             ///< Nearest silhouette edge within the soft band, -1 if none.
    double edge_distance = 0.0; ///< Unsigned distance to that edge, pixels.
    double edge_t = 0.0;        ///< Closest-point parameter along the edge, in [0, 1].
    double coverage = 0.0;      ///< Mask value.
};

struct RasterOutput
{
    int width = 0;
    int height = 0;
    Image image;
    std::vector<double> mask;          ///< H x W, row-major.
    std::vector<Fragment> fragments;   ///< H x W, row-major.
    std::vector<SilhouetteEdge> silhouette;

    const Fragment& fragment(int x, int y) const { return fragments[static_cast<std::size_t>(y) * width + x]; }
    double coverage(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x]; }
};

/**
 * Renders per-vertex coloured triangles under a hard z-buffer (smallest
 * interpolated depth wins, earlier triangle on exact ties) with a top-left
 * fill rule, colours interpolated barycentrically and clamped to [0, 1].
 *
 * With edge_sigma > 0, pixels within kEdgeSupport * edge_sigma of a
 * silhouette edge get mask = soft_coverage(+-distance) and colour blended
 * towards the background by that weight; uncovered pixels in the band take
 * the colour interpolated along their nearest silhouette edge.
 */
RasterOutput rasterize(const projection::ProjectedShape& projected, const Colours& colours,
                       const TriangleList& triangles, const RasterConfig& config);

struct RasterGradients
{
    Points2 positions;     ///< N x 2
    Eigen::VectorXd depth; ///< N, zero under the hard z-buffer.
    Colours colours;       ///< N x 3
};

/**
 * Gradients of sum(d_image * image) with respect to projected positions,
 * depths and vertex colours, for the output of rasterize() on the same
 * inputs. The background receives no gradient.
 */
RasterGradients rasterize_backward(const RasterOutput& output, const Image& d_image,
                                   const projection::ProjectedShape& projected, const Colours& colours,
                                   const TriangleList& triangles, const RasterConfig& config);

} // namespace render
} // namespace earfit

#endif /* EARFIT_RENDER_RASTERIZER_HPP */
