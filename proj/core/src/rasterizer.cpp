/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/rasterizer.cpp
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
#include "earfit/render/rasterizer.hpp"
#include "earfit/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace earfit {
namespace render {

namespace {

double logistic(double x) noexcept
{
    return 1.0 / (1.0 + std::exp(-x));
}

Eigen::Vector2d point(const Points2& points, int i)
{
    return points.row(i).transpose();
}

// Edge function evaluated with the lower vertex index first, so a shared edge
// yields exactly negated values for the two triangles on either side.
double canonical_edge(const Points2& points, int ia, int ib, const Eigen::Vector2d& p)
{
    if (ia < ib)
    {
        return edge_function(point(points, ia), point(points, ib), p);
    }
    return -edge_function(point(points, ib), point(points, ia), p);
}

// Top-left rule on an edge traversed a->b with orientation sign s.
bool owns_boundary(const Points2& points, int ia, int ib, double s)
{
    const double dx = s * (points(ib, 0) - points(ia, 0));
    const double dy = s * (points(ib, 1) - points(ia, 1));
    return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

struct SegmentPoint
{
    double distance;
    double t;
};

SegmentPoint closest_on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p)
{
    const Eigen::Vector2d e = b - a;
    const double len2 = e.squaredNorm();
    double t = 0.0;
    if (len2 > 0.0)
    {
        t = std::clamp((p - a).dot(e) / len2, 0.0, 1.0);
    }
    return {(p - (a + t * e)).norm(), t};
}

Eigen::Vector3d clamp01(const Eigen::Vector3d& c)
{
    return c.cwiseMax(0.0).cwiseMin(1.0);
}

void check_inputs(const projection::ProjectedShape& projected, const Colours& colours,
                  const TriangleList& triangles)
{
    const auto n = projected.points.rows();
    if (projected.depth.size() != n || colours.rows() != n)
    {
        throw ArgumentError("rasterize: " + std::to_string(n) + " projected points but " +
                            std::to_string(projected.depth.size()) + " depths and " +
                            std::to_string(colours.rows()) + " colours");
    }
    if (!projected.points.allFinite() || !projected.depth.allFinite() || !colours.allFinite())
    {
        throw ArgumentError("rasterize: non-finite input");
    }
    for (const auto& tri : triangles)
    {
        for (int v : tri)
        {
            if (v < 0 || v >= n)
            {
                throw ArgumentError("rasterize: triangle index " + std::to_string(v) + " out of range");
            }
        }
    }
}

// Written relative to the first vertex so that a constant colour is reproduced exactly.
Eigen::Vector3d interpolate(const Colours& colours, const Triangle& tri, const std::array<double, 3>& bary)
{
    const Eigen::Vector3d c0 = colours.row(tri[0]).transpose();
    return c0 + bary[1] * (colours.row(tri[1]).transpose() - c0) + bary[2] * (colours.row(tri[2]).transpose() - c0);
}

Eigen::Vector3d interpolate_edge(const Colours& colours, const SilhouetteEdge& edge, double t)
{
    const Eigen::Vector3d c0 = colours.row(edge.v0).transpose();
    return c0 + t * (colours.row(edge.v1).transpose() - c0);
}

} // namespace

void validate(const RasterConfig& config)
{
    if (config.width < 1 || config.height < 1)
    {
        throw ArgumentError("Raster dimensions must be positive, got " + std::to_string(config.width) + "x" +
                            std::to_string(config.height));
    }
    if (!(config.edge_sigma >= 0.0) || !std::isfinite(config.edge_sigma))
    {
        throw ArgumentError("edge_sigma must be a finite value >= 0");
    }
}

double soft_coverage(double signed_distance, double sigma) noexcept
{
    if (sigma <= 0.0)
    {
        return signed_distance >= 0.0 ? 1.0 : 0.0;
    }
    const double x = signed_distance / sigma;
    if (x <= -kEdgeSupport)
    {
        return 0.0;
    }
    if (x >= kEdgeSupport)
    {
        return 1.0;
    }
    const double lo = logistic(-kEdgeSupport);
    const double hi = logistic(kEdgeSupport);
    return (logistic(x) - lo) / (hi - lo);
}

double soft_coverage_derivative(double signed_distance, double sigma) noexcept
{
    if (sigma <= 0.0)
    {
        return 0.0;
    }
    const double x = signed_distance / sigma;
    if (x <= -kEdgeSupport || x >= kEdgeSupport)
    {
        return 0.0;
    }
    const double lo = logistic(-kEdgeSupport);
    const double hi = logistic(kEdgeSupport);
    const double s = logistic(x);
    return s * (1.0 - s) / (sigma * (hi - lo));
}

std::vector<SilhouetteEdge> silhouette_edges(const Points2& points, const TriangleList& triangles)
{
    struct Incidence
    {
        int v0, v1;
        int sign;
    };
    std::vector<Incidence> incidences;
    incidences.reserve(triangles.size() * 3);
    for (const auto& tri : triangles)
    {
        const double area = edge_function(point(points, tri[0]), point(points, tri[1]), point(points, tri[2]));
        if (!(std::abs(area) > kDegenerateArea))
        {
            continue;
        }
        const int sign = area > 0.0 ? 1 : -1;
        for (int k = 0; k < 3; ++k)
        {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            if (a != b)
            {
                incidences.push_back({std::min(a, b), std::max(a, b), sign});
            }
        }
    }
    std::sort(incidences.begin(), incidences.end(), [](const Incidence& l, const Incidence& r) {
        return std::tie(l.v0, l.v1) < std::tie(r.v0, r.v1);
    });

    std::vector<SilhouetteEdge> edges;
    for (std::size_t i = 0; i < incidences.size();)
    {
        std::size_t j = i;
        int positive = 0;
        int negative = 0;
        while (j < incidences.size() && incidences[j].v0 == incidences[i].v0 && incidences[j].v1 == incidences[i].v1)
        {
            (incidences[j].sign > 0 ? positive : negative)++;
            ++j;
        }
        const int count = positive + negative;
        if (count == 1 || count > 2 || (positive == 1 && negative == 1))
        {
            edges.push_back({incidences[i].v0, incidences[i].v1});
        }
        i = j;
    }
    return edges;
}

RasterOutput rasterize(const projection::ProjectedShape& projected, const Colours& colours,
                       const TriangleList& triangles, const RasterConfig& config)
{
    validate(config);
    check_inputs(projected, colours, triangles);
    const Points2& pts = projected.points;
    const int w = config.width;
    const int h = config.height;

    RasterOutput out;
    out.width = w;
    out.height = h;
    out.fragments.assign(static_cast<std::size_t>(w) * h, Fragment{});
    out.mask.assign(static_cast<std::size_t>(w) * h, 0.0);
    out.image = Image(w, h, config.background);

    // Hard pass: z-buffered triangle ownership.
    for (std::size_t t = 0; t < triangles.size(); ++t)
    {
        const auto& tri = triangles[t];
        const Eigen::Vector2d p0 = point(pts, tri[0]);
        const Eigen::Vector2d p1 = point(pts, tri[1]);
        const Eigen::Vector2d p2 = point(pts, tri[2]);
        const double area = edge_function(p0, p1, p2);
        if (!(std::abs(area) > kDegenerateArea))
        {
            continue;
        }
        const double s = area > 0.0 ? 1.0 : -1.0;
        const bool own0 = owns_boundary(pts, tri[1], tri[2], s);
        const bool own1 = owns_boundary(pts, tri[2], tri[0], s);
        const bool own2 = owns_boundary(pts, tri[0], tri[1], s);

        const double min_x = std::min({p0.x(), p1.x(), p2.x()});
        const double max_x = std::max({p0.x(), p1.x(), p2.x()});
        const double min_y = std::min({p0.y(), p1.y(), p2.y()});
        const double max_y = std::max({p0.y(), p1.y(), p2.y()});
        const int x_begin = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
        const int x_end = std::min(w - 1, static_cast<int>(std::floor(max_x - 0.5)));
        const int y_begin = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
        const int y_end = std::min(h - 1, static_cast<int>(std::floor(max_y - 0.5)));

        for (int y = y_begin; y <= y_end; ++y)
        {
            for (int x = x_begin; x <= x_end; ++x)
            {
                const Eigen::Vector2d p(x + 0.5, y + 0.5);
                const double e0 = s * canonical_edge(pts, tri[1], tri[2], p);
                const double e1 = s * canonical_edge(pts, tri[2], tri[0], p);
                const double e2 = s * canonical_edge(pts, tri[0], tri[1], p);
                if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0)
                {
                    continue;
                }
                if ((e0 == 0.0 && !own0) || (e1 == 0.0 && !own1) || (e2 == 0.0 && !own2))
                {
                    continue;
                }
                const double sum = e0 + e1 + e2;
                const std::array<double, 3> bary{e0 / sum, e1 / sum, e2 / sum};
                const double z = bary[0] * projected.depth(tri[0]) + bary[1] * projected.depth(tri[1]) +
                                 bary[2] * projected.depth(tri[2]);
                auto& frag = out.fragments[static_cast<std::size_t>(y) * w + x];
                if (z < frag.depth)
                {
                    frag.triangle = static_cast<int>(t);
                    frag.bary = bary;
                    frag.depth = z;
                }
            }
        }
    }

    out.silhouette = silhouette_edges(pts, triangles);

    // Soft pass: nearest silhouette edge within the falloff band.
    if (config.edge_sigma > 0.0)
    {
        const double band = kEdgeSupport * config.edge_sigma;
        for (std::size_t e = 0; e < out.silhouette.size(); ++e)
        {
            const Eigen::Vector2d a = point(pts, out.silhouette[e].v0);
            const Eigen::Vector2d b = point(pts, out.silhouette[e].v1);
            const int x_begin = std::max(0, static_cast<int>(std::ceil(std::min(a.x(), b.x()) - band - 0.5)));
            const int x_end = std::min(w - 1, static_cast<int>(std::floor(std::max(a.x(), b.x()) + band - 0.5)));
            const int y_begin = std::max(0, static_cast<int>(std::ceil(std::min(a.y(), b.y()) - band - 0.5)));
            const int y_end = std::min(h - 1, static_cast<int>(std::floor(std::max(a.y(), b.y()) + band - 0.5)));
            for (int y = y_begin; y <= y_end; ++y)
            {
                for (int x = x_begin; x <= x_end; ++x)
                {
                    const auto nearest = closest_on_segment(a, b, Eigen::Vector2d(x + 0.5, y + 0.5));
                    auto& frag = out.fragments[static_cast<std::size_t>(y) * w + x];
                    if (nearest.distance < band && (frag.edge < 0 || nearest.distance < frag.edge_distance))
                    {
                        frag.edge = static_cast<int>(e);
                        frag.edge_distance = nearest.distance;
                        frag.edge_t = nearest.t;
                    }
                }
            }
        }
    }

    // Composite.
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            const auto idx = static_cast<std::size_t>(y) * w + x;
            auto& frag = out.fragments[idx];
            const bool covered = frag.triangle >= 0;
            double m = covered ? 1.0 : 0.0;
            if (frag.edge >= 0)
            {
                m = soft_coverage(covered ? frag.edge_distance : -frag.edge_distance, config.edge_sigma);
            }
            frag.coverage = m;
            out.mask[idx] = m;
            if (m <= 0.0)
            {
                continue;
            }
            Eigen::Vector3d c;
            if (covered)
            {
                c = clamp01(interpolate(colours, triangles[frag.triangle], frag.bary));
            } else
            {
                const auto& edge = out.silhouette[frag.edge];
                c = clamp01(interpolate_edge(colours, edge, frag.edge_t));
            }
            out.image.set_pixel(x, y, m * c + (1.0 - m) * config.background);
        }
    }
    return out;
}

RasterGradients rasterize_backward(const RasterOutput& output, const Image& d_image,
                                   const projection::ProjectedShape& projected, const Colours& colours,
                                   const TriangleList& triangles, const RasterConfig& config)
{
    validate(config);
    check_inputs(projected, colours, triangles);
    if (output.width != config.width || output.height != config.height ||
        d_image.width() != config.width || d_image.height() != config.height ||
        output.fragments.size() != static_cast<std::size_t>(config.width) * config.height)
    {
        throw ArgumentError("rasterize_backward: image dimensions do not match the raster config");
    }
    const Points2& pts = projected.points;
    const auto n = pts.rows();
    RasterGradients grad;
    grad.positions = Points2::Zero(n, 2);
    grad.depth = Eigen::VectorXd::Zero(n);
    grad.colours = Colours::Zero(n, 3);

    const int w = config.width;
    for (int y = 0; y < config.height; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            const auto& frag = output.fragments[static_cast<std::size_t>(y) * w + x];
            const double m = frag.coverage;
            if (m <= 0.0)
            {
                continue;
            }
            const Eigen::Vector3d g = d_image.pixel(x, y);
            if (g.isZero(0.0))
            {
                continue;
            }
            const Eigen::Vector2d p(x + 0.5, y + 0.5);
            const bool covered = frag.triangle >= 0;

            Eigen::Vector3d raw;
            if (covered)
            {
                raw = interpolate(colours, triangles[frag.triangle], frag.bary);
            } else
            {
                const auto& edge = output.silhouette[frag.edge];
                raw = interpolate_edge(colours, edge, frag.edge_t);
            }
            const Eigen::Vector3d c = clamp01(raw);
            Eigen::Vector3d dc = m * g;
            for (int ch = 0; ch < 3; ++ch)
            {
                if (raw(ch) < 0.0 || raw(ch) > 1.0)
                {
                    dc(ch) = 0.0;
                }
            }

            if (covered)
            {
                const auto& tri = triangles[frag.triangle];
                std::array<double, 3> gb{};
                for (int k = 0; k < 3; ++k)
                {
                    grad.colours.row(tri[k]) += frag.bary[k] * dc.transpose();
                    gb[k] = dc.dot(colours.row(tri[k]).transpose());
                }
                // b_k = E_k / (E_0 + E_1 + E_2); E_k is the edge function of the edge opposite vertex k.
                const double e0 = edge_function(point(pts, tri[1]), point(pts, tri[2]), p);
                const double e1 = edge_function(point(pts, tri[2]), point(pts, tri[0]), p);
                const double e2 = edge_function(point(pts, tri[0]), point(pts, tri[1]), p);
                const double sum = e0 + e1 + e2;
                const double weighted = gb[0] * frag.bary[0] + gb[1] * frag.bary[1] + gb[2] * frag.bary[2];
                const std::array<double, 3> de{(gb[0] - weighted) / sum, (gb[1] - weighted) / sum,
                                               (gb[2] - weighted) / sum};
                for (int k = 0; k < 3; ++k)
                {
                    if (de[k] == 0.0)
                    {
                        continue;
                    }
                    const int ia = tri[(k + 1) % 3];
                    const int ib = tri[(k + 2) % 3];
                    const Eigen::Vector2d a = point(pts, ia);
                    const Eigen::Vector2d b = point(pts, ib);
                    grad.positions(ia, 0) += de[k] * (b.y() - p.y());
                    grad.positions(ia, 1) += de[k] * (p.x() - b.x());
                    grad.positions(ib, 0) += de[k] * (p.y() - a.y());
                    grad.positions(ib, 1) += de[k] * (a.x() - p.x());
                }
            } else
            {
                const auto& edge = output.silhouette[frag.edge];
                const double t = frag.edge_t;
                grad.colours.row(edge.v0) += (1.0 - t) * dc.transpose();
                grad.colours.row(edge.v1) += t * dc.transpose();
                if (t > 0.0 && t < 1.0)
                {
                    const double gt = dc.dot(colours.row(edge.v1).transpose() - colours.row(edge.v0).transpose());
                    const Eigen::Vector2d a = point(pts, edge.v0);
                    const Eigen::Vector2d b = point(pts, edge.v1);
                    const Eigen::Vector2d e = b - a;
                    const Eigen::Vector2d wv = p - a;
                    const double len2 = e.squaredNorm();
                    const Eigen::Vector2d dt_db = (wv - 2.0 * t * e) / len2;
                    const Eigen::Vector2d dt_da = (-e - wv + 2.0 * t * e) / len2;
                    grad.positions.row(edge.v0) += gt * dt_da.transpose();
                    grad.positions.row(edge.v1) += gt * dt_db.transpose();
                }
            }

            // Soft silhouette weight.
            if (frag.edge >= 0 && frag.edge_distance > 0.0)
            {
                const double signed_distance = covered ? frag.edge_distance : -frag.edge_distance;
                const double slope = soft_coverage_derivative(signed_distance, config.edge_sigma);
                if (slope != 0.0)
                {
                    const double dm = g.dot(c - config.background);
                    const double ds = dm * slope * (covered ? 1.0 : -1.0);
                    const auto& edge = output.silhouette[frag.edge];
                    const Eigen::Vector2d a = point(pts, edge.v0);
                    const Eigen::Vector2d b = point(pts, edge.v1);
                    const double t = frag.edge_t;
                    const Eigen::Vector2d q = a + t * (b - a);
                    const Eigen::Vector2d normal = (p - q) / frag.edge_distance;
                    grad.positions.row(edge.v0) -= ds * (1.0 - t) * normal.transpose();
                    grad.positions.row(edge.v1) -= ds * t * normal.transpose();
                }
            }
        }
    }
    return grad;
}

} // namespace render
} // namespace earfit
