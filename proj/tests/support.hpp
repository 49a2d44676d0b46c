/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tests/support.hpp
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

#ifndef EARFIT_TESTS_SUPPORT_HPP
#define EARFIT_TESTS_SUPPORT_HPP

#include "earfit/core/image.hpp"
#include "earfit/core/types.hpp"
#include "earfit/colour/colour_builder.hpp"
#include "earfit/data/synthetic.hpp"
#include "earfit/fitting/losses.hpp"
#include "earfit/model/morphable_model.hpp"
#include "earfit/projection/projection.hpp"
#include "earfit/render/rasterizer.hpp"

#include "Eigen/Core"
#include "Eigen/QR"
#include "Eigen/SVD"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace earfit {
namespace fixtures {

/// Small ear model shared by the fast unit tests.
inline const data::SyntheticModel& small_model()
{
    static const data::SyntheticModel model = [] {
        data::SyntheticModelOptions options;
        options.k_white = 10;
        options.k_colour = 10;
        return data::generate_synthetic_model(400, 30, 3, options);
    }();
    return model;
}

/// Full-size model: 40 whitened shape and 40 colour parameters (86-dim code vectors).
inline const data::SyntheticModel& full_model()
{
    static const data::SyntheticModel model = data::generate_synthetic_model(2000, 120, 7);
    return model;
}

struct Scene
{
    projection::ProjectedShape projected;
    Colours colours;
    TriangleList triangles;
};

/// Random triangles scattered over (and slightly beyond) a width x height viewport.
inline Scene random_scene(std::mt19937_64& rng, int n_triangles, int width, int height)
{
    std::uniform_real_distribution<double> ux(-0.2 * width, 1.2 * width);
    std::uniform_real_distribution<double> uy(-0.2 * height, 1.2 * height);
    std::uniform_real_distribution<double> spread(-0.3, 0.3);
    std::uniform_real_distribution<double> depth(0.0, 10.0);
    std::uniform_real_distribution<double> colour(-0.2, 1.2);
    Scene s;
    const int n = 3 * n_triangles;
    s.projected.points.resize(n, 2);
    s.projected.depth.resize(n);
    s.colours.resize(n, 3);
    for (int t = 0; t < n_triangles; ++t)
    {
        const double cx = ux(rng), cy = uy(rng);
        for (int k = 0; k < 3; ++k)
        {
            const int v = 3 * t + k;
            s.projected.points(v, 0) = cx + spread(rng) * width;
            s.projected.points(v, 1) = cy + spread(rng) * height;
            s.projected.depth(v) = depth(rng);
            for (int c = 0; c < 3; ++c)
            {
                s.colours(v, c) = colour(rng);
            }
        }
        s.triangles.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    }
    return s;
}

/// Per-pixel ownership from a brute-force scan over all triangles.
struct OracleOutput
{
    std::vector<int> owner;
    Image image;
};

inline OracleOutput brute_force_raster(const Scene& s, int width, int height)
{
    OracleOutput out;
    out.owner.assign(static_cast<std::size_t>(width) * height, -1);
    out.image = Image(width, height);
    const auto& p = s.projected.points;
    auto edge = [&](int a, int b, double px, double py) {
        // Evaluate with the lower index first so shared edges agree exactly.
        if (a > b)
        {
            return -((p(a, 0) - p(b, 0)) * (py - p(b, 1)) - (p(a, 1) - p(b, 1)) * (px - p(b, 0)));
        }
        return (p(b, 0) - p(a, 0)) * (py - p(a, 1)) - (p(b, 1) - p(a, 1)) * (px - p(a, 0));
    };
    for (int y = 0; y < height; ++y)
    {
        for (int x = 0; x < width; ++x)
        {
            const double px = x + 0.5, py = y + 0.5;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < s.triangles.size(); ++t)
            {
                const auto& tri = s.triangles[t];
                const double area = (p(tri[1], 0) - p(tri[0], 0)) * (p(tri[2], 1) - p(tri[0], 1)) -
                                    (p(tri[1], 1) - p(tri[0], 1)) * (p(tri[2], 0) - p(tri[0], 0));
                if (!(std::abs(area) > render::kDegenerateArea))
                {
                    continue;
                }
                const double sg = area > 0 ? 1.0 : -1.0;
                const double e[3] = {sg * edge(tri[1], tri[2], px, py), sg * edge(tri[2], tri[0], px, py),
                                     sg * edge(tri[0], tri[1], px, py)};
                bool inside = true;
                for (int k = 0; k < 3; ++k)
                {
                    const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
                    const double dx = sg * (p(b, 0) - p(a, 0)), dy = sg * (p(b, 1) - p(a, 1));
                    const bool top_left = dy < 0.0 || (dy == 0.0 && dx > 0.0);
                    if (e[k] < 0.0 || (e[k] == 0.0 && !top_left))
                    {
                        inside = false;
                    }
                }
                if (!inside)
                {
                    continue;
                }
                const double sum = e[0] + e[1] + e[2];
                const double b0 = e[0] / sum;
                const double b1 = e[1] / sum, b2 = e[2] / sum;
                const double z = b0 * s.projected.depth(tri[0]) + b1 * s.projected.depth(tri[1]) +
                                 b2 * s.projected.depth(tri[2]);
                if (z < best)
                {
                    best = z;
                    out.owner[static_cast<std::size_t>(y) * width + x] = static_cast<int>(t);
                    const Eigen::Vector3d c0 = s.colours.row(tri[0]).transpose();
                    const Eigen::Vector3d c = c0 + b1 * (s.colours.row(tri[1]).transpose() - c0) +
                                              b2 * (s.colours.row(tri[2]).transpose() - c0);
                    out.image.set_pixel(x, y, c.cwiseMax(0.0).cwiseMin(1.0));
                }
            }
        }
    }
    return out;
}

/// Discrete structure of a render: anything that changes here makes the
/// forward pass non-smooth, so finite differences across it are meaningless.
inline std::vector<std::int64_t> raster_signature(const render::RasterOutput& out, const Colours& colours,
                                                  const TriangleList& triangles)
{
    std::vector<std::int64_t> sig;
    for (const auto& e : out.silhouette)
    {
        sig.push_back(e.v0);
        sig.push_back(e.v1);
    }
    for (const auto& f : out.fragments)
    {
        sig.push_back(f.triangle);
        sig.push_back(f.edge);
        sig.push_back(f.coverage <= 0.0 ? 0 : (f.coverage >= 1.0 ? 2 : 1));
        sig.push_back(f.coverage > 0.5);
        sig.push_back(f.edge >= 0 && (f.edge_t <= 0.0 || f.edge_t >= 1.0));
        Eigen::Vector3d raw = Eigen::Vector3d::Zero();
        if (f.triangle >= 0)
        {
            const auto& tri = triangles[f.triangle];
            for (int k = 0; k < 3; ++k)
            {
                raw += f.bary[k] * colours.row(tri[k]).transpose();
            }
        } else if (f.edge >= 0)
        {
            const auto& e = out.silhouette[f.edge];
            raw = (1.0 - f.edge_t) * colours.row(e.v0).transpose() + f.edge_t * colours.row(e.v1).transpose();
        }
        for (int c = 0; c < 3; ++c)
        {
            sig.push_back(raw(c) < 0.0 ? 0 : (raw(c) > 1.0 ? 2 : 1));
        }
    }
    return sig;
}

struct GradientCheck
{
    int checked = 0;
    int passed = 0;
    int skipped = 0;          ///< Coordinates whose step changed the render structure.
    double worst_error = 0.0; ///< Largest |fd - analytic| / max(|fd|, |analytic|) above the floor.
};

/// Central differences of the objective over every code-vector coordinate.
/// A coordinate passes when |fd - analytic| <= max(1e-6, 1e-3 * max(|fd|, |analytic|)).
inline GradientCheck check_gradient(const fitting::Objective& objective, const fitting::CodeVector& v, double step)
{
    const auto& shape = objective.shape_model();
    const auto& colour = objective.colour_model();
    auto signature = [&](const fitting::CodeVector& c) {
        return raster_signature(objective.render(c), model::reconstruct_colour(colour, c.colour), shape.triangles());
    };
    const auto base = signature(v);
    const Eigen::VectorXd analytic = objective.evaluate(v, true).gradient;
    const Eigen::VectorXd flat = v.flatten();
    GradientCheck out;
    for (Eigen::Index i = 0; i < flat.size(); ++i)
    {
        Eigen::VectorXd plus = flat, minus = flat;
        plus(i) += step;
        minus(i) -= step;
        const auto vp = fitting::CodeVector::unflatten(plus, shape.k_white(), colour.k());
        const auto vm = fitting::CodeVector::unflatten(minus, shape.k_white(), colour.k());
        if (signature(vp) != base || signature(vm) != base)
        {
            ++out.skipped;
            continue;
        }
        const double fd =
            (objective.evaluate(vp, false).terms.total - objective.evaluate(vm, false).terms.total) / (2.0 * step);
        const double diff = std::abs(fd - analytic(i));
        const double scale = std::max(std::abs(fd), std::abs(analytic(i)));
        ++out.checked;
        if (diff <= std::max(1e-6, 1e-3 * scale))
        {
            ++out.passed;
        } else
        {
            out.worst_error = std::max(out.worst_error, diff / scale);
        }
    }
    return out;
}

/// Corpus of mean-shape renders whose vertex colours span a known linear
/// family of affine functions of the vertex (x, y) position. Rasterisation
/// and bilinear sampling both reproduce affine fields exactly.
struct ColourFamily
{
    std::vector<data::AnnotatedImage> corpus;
    Eigen::MatrixXd basis;   ///< 3N x dims, the family directions.
    std::vector<bool> valid; ///< Vertices sampled (not mean filled) in every image.
};

inline ColourFamily affine_colour_family(const data::SyntheticModel& m, int dims, int count, int size,
                                         std::uint64_t seed)
{
    const Vertices mean = m.shape.mean_vertices();
    const auto n = mean.rows();
    const Eigen::Vector2d lo = mean.leftCols<2>().colwise().minCoeff().transpose();
    const Eigen::Vector2d hi = mean.leftCols<2>().colwise().maxCoeff().transpose();
    const std::array<Eigen::Vector3d, 5> tint{Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(0.0, 1.0, 0.0),
                                              Eigen::Vector3d(0.0, 0.0, 1.0), Eigen::Vector3d(1.0, 1.0, 1.0),
                                              Eigen::Vector3d(1.0, 0.5, 0.25)};
    ColourFamily out;
    out.basis = Eigen::MatrixXd::Zero(3 * n, dims);
    for (Eigen::Index v = 0; v < n; ++v)
    {
        const double x = 2.0 * (mean(v, 0) - lo.x()) / (hi.x() - lo.x()) - 1.0;
        const double y = 2.0 * (mean(v, 1) - lo.y()) / (hi.y() - lo.y()) - 1.0;
        const std::array<double, 5> weight{1.0, 1.0, 1.0, x, y};
        for (int d = 0; d < dims; ++d)
        {
            out.basis.block<3, 1>(3 * v, d) = weight[d % 5] * tint[d % 5];
        }
    }
    const auto frame = fitting::Frame::canonical(m.shape, size, size);
    const auto projected = projection::project_sop(mean, frame.to_pixels(projection::Pose{}));
    render::RasterConfig raster;
    raster.width = raster.height = size;
    raster.edge_sigma = 0.0;
    raster.background = Eigen::Vector3d::Constant(0.05);
    out.valid.assign(static_cast<std::size_t>(n), true);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coefficient(-0.1, 0.1);
    for (int i = 0; i < count; ++i)
    {
        Eigen::VectorXd t(dims);
        for (auto& c : t)
        {
            c = coefficient(rng);
        }
        const Eigen::VectorXd flat = Eigen::VectorXd::Constant(3 * n, 0.5) + out.basis * t;
        const Colours colours = model::as_rows(flat);
        data::AnnotatedImage item;
        item.id = "family_" + std::to_string(i);
        item.image = render::rasterize(projected, colours, m.shape.triangles(), raster).image;
        item.landmarks = projection::select_landmarks(projected, m.shape.landmark_indices());
        const auto sample = colour::sample_vertex_colours(item.image, projected, m.shape.triangles());
        for (Eigen::Index v = 0; v < n; ++v)
        {
            out.valid[static_cast<std::size_t>(v)] = out.valid[static_cast<std::size_t>(v)] && sample.valid[v];
        }
        out.corpus.push_back(std::move(item));
    }
    return out;
}

/// Principal angles (radians, ascending) between the column spans of a and b.
inline Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                               Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                               Eigen::MatrixXd::Identity(b.rows(), b.cols());
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(qa.transpose() * qb).singularValues();
    Eigen::VectorXd angles(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
    {
        angles(i) = std::acos(std::min(1.0, sv(i)));
    }
    return angles;
}

/// Rows of a 3N-row matrix belonging to the flagged vertices.
inline Eigen::MatrixXd select_vertex_rows(const Eigen::MatrixXd& m, const std::vector<bool>& keep)
{
    Eigen::Index count = 0;
    for (bool k : keep)
    {
        count += k ? 3 : 0;
    }
    Eigen::MatrixXd out(count, m.cols());
    Eigen::Index row = 0;
    for (std::size_t v = 0; v < keep.size(); ++v)
    {
        if (keep[v])
        {
            out.middleRows(row, 3) = m.middleRows(3 * static_cast<Eigen::Index>(v), 3);
            row += 3;
        }
    }
    return out;
}

} // namespace fixtures
} // namespace earfit

#endif /* EARFIT_TESTS_SUPPORT_HPP */
