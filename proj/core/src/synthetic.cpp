/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/synthetic.cpp
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
#include "earfit/data/synthetic.hpp"
#include "earfit/core/error.hpp"
#include "earfit/fitting/code_vector.hpp"
#include "earfit/projection/projection.hpp"
#include "earfit/render/rasterizer.hpp"

#include "Eigen/Geometry"
#include "Eigen/QR"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

namespace earfit {
namespace data {

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d)
{
    return d * kPi / 180.0;
}

struct PolarMesh
{
    std::vector<Eigen::Vector2d> uv; ///< Unit-disc coordinates (rho cos t, rho sin t).
    TriangleList triangles;
};

/// Centre vertex plus rings of roughly 6j vertices, exactly n vertices in total.
PolarMesh polar_mesh(int n)
{
    int rings = 1;
    while (1 + 3 * (rings + 1) * (rings + 2) <= n)
    {
        ++rings;
    }
    std::vector<int> counts(static_cast<std::size_t>(rings + 1), 0);
    counts[0] = 1;
    int total = 1;
    for (int j = 1; j <= rings; ++j)
    {
        counts[static_cast<std::size_t>(j)] = 6 * j;
        total += 6 * j;
    }
    for (int j = rings; total < n; j = (j == 1 ? rings : j - 1))
    {
        ++counts[static_cast<std::size_t>(j)];
        ++total;
    }

    PolarMesh mesh;
    std::vector<int> first(counts.size(), 0);
    std::vector<std::vector<double>> angles(counts.size());
    mesh.uv.emplace_back(0.0, 0.0);
    for (int j = 1; j <= rings; ++j)
    {
        const int c = counts[static_cast<std::size_t>(j)];
        first[static_cast<std::size_t>(j)] = static_cast<int>(mesh.uv.size());
        const double offset = (j % 2 == 0) ? 0.5 : 0.0;
        const double rho = static_cast<double>(j) / rings;
        for (int i = 0; i < c; ++i)
        {
            const double t = 2.0 * kPi * (i + offset) / c - 0.5 * kPi;
            angles[static_cast<std::size_t>(j)].push_back(t);
            mesh.uv.emplace_back(rho * std::cos(t), rho * std::sin(t));
        }
    }

    const int c1 = counts[1];
    for (int i = 0; i < c1; ++i)
    {
        mesh.triangles.push_back({0, first[1] + i, first[1] + (i + 1) % c1});
    }
    for (int j = 1; j < rings; ++j)
    {
        const auto sj = static_cast<std::size_t>(j);
        const int a = counts[sj], b = counts[sj + 1];
        const auto& ain = angles[sj];
        const auto& aout = angles[sj + 1];
        int i = 0, o = 0;
        while (i < a || o < b)
        {
            const double next_in = i < a ? ain[static_cast<std::size_t>((i + 1) % a)] + ((i + 1) >= a ? 2 * kPi : 0.0)
                                         : 1e300;
            const double next_out =
                o < b ? aout[static_cast<std::size_t>((o + 1) % b)] + ((o + 1) >= b ? 2 * kPi : 0.0) : 1e300;
            const int vi = first[sj] + i % a;
            const int vo = first[sj + 1] + o % b;
            if (next_in < next_out)
            {
                mesh.triangles.push_back({vi, vo, first[sj] + (i + 1) % a});
                ++i;
            } else
            {
                mesh.triangles.push_back({vi, vo, first[sj + 1] + (o + 1) % b});
                ++o;
            }
        }
    }
    // Consistent winding in the image plane.
    for (auto& t : mesh.triangles)
    {
        const Eigen::Vector2d& p0 = mesh.uv[static_cast<std::size_t>(t[0])];
        const Eigen::Vector2d& p1 = mesh.uv[static_cast<std::size_t>(t[1])];
        const Eigen::Vector2d& p2 = mesh.uv[static_cast<std::size_t>(t[2])];
        if (render::edge_function(p0, p1, p2) < 0.0)
        {
            std::swap(t[1], t[2]);
        }
    }
    return mesh;
}

double gaussian_bump(double x, double centre, double width)
{
    const double u = (x - centre) / width;
    return std::exp(-u * u);
}

/// Smooth random fields over the unit disc, one per column, orthonormalised.
Eigen::MatrixXd smooth_fields(const std::vector<Eigen::Vector2d>& uv, int columns, double base_frequency,
                              std::mt19937_64& rng)
{
    const auto n = static_cast<Eigen::Index>(uv.size());
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    constexpr int kFeatures = 4;
    Eigen::MatrixXd fields(3 * n, columns);
    for (int c = 0; c < columns; ++c)
    {
        const double frequency = base_frequency * (1.0 + 0.05 * c);
        for (int d = 0; d < 3; ++d)
        {
            Eigen::Vector2d omega[kFeatures];
            double weight[kFeatures], shift[kFeatures];
            for (int m = 0; m < kFeatures; ++m)
            {
                omega[m] = frequency * Eigen::Vector2d(normal(rng), normal(rng));
                weight[m] = normal(rng);
                shift[m] = phase(rng);
            }
            for (Eigen::Index v = 0; v < n; ++v)
            {
                double value = 0.0;
                for (int m = 0; m < kFeatures; ++m)
                {
                    value += weight[m] * std::cos(omega[m].dot(uv[static_cast<std::size_t>(v)]) + shift[m]);
                }
                fields(3 * v + d, c) = value;
            }
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(fields);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(3 * n, columns);
    for (int c = 0; c < columns; ++c)
    {
        Eigen::Index arg = 0;
        q.col(c).cwiseAbs().maxCoeff(&arg);
        if (q(arg, c) < 0.0)
        {
            q.col(c) *= -1.0;
        }
    }
    return q;
}

/// Ratio r of a geometric spectrum r^i (i < total) whose first k terms carry the target fraction.
double geometric_ratio(int k, int total, double target)
{
    auto coverage = [&](double r) { return (1.0 - std::pow(r, k)) / (1.0 - std::pow(r, total)); };
    double lo = 1e-6, hi = 1.0 - 1e-9;
    if (coverage(hi) >= target)
    {
        return hi;
    }
    for (int it = 0; it < 200; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        (coverage(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<int> semantic_landmarks(const std::vector<Eigen::Vector2d>& uv)
{
    std::vector<Eigen::Vector2d> targets;
    auto polar = [&](double rho, double degrees) {
        targets.emplace_back(rho * std::cos(deg(degrees)), rho * std::sin(deg(degrees)));
    };
    for (int i = 0; i < 20; ++i) // helix rim
    {
        polar(0.93, -20.0 - i * 230.0 / 19.0);
    }
    for (int i = 0; i < 5; ++i) // lobe
    {
        polar(0.8, 60.0 + 15.0 * i);
    }
    for (int i = 0; i < 15; ++i) // antihelix
    {
        polar(0.62, -30.0 - i * 180.0 / 14.0);
    }
    for (int i = 0; i < 8; ++i) // concha
    {
        polar(0.3, 45.0 * i);
    }
    for (int i = 0; i < 7; ++i) // tragus towards the canal
    {
        polar(0.75 - 0.1 * i, 30.0);
    }

    std::vector<bool> used(uv.size(), false);
    std::vector<int> indices;
    for (const auto& t : targets)
    {
        int best = -1;
        double best_d = 0.0;
        for (std::size_t v = 0; v < uv.size(); ++v)
        {
            const double d = (uv[v] - t).squaredNorm();
            if (!used[v] && (best < 0 || d < best_d))
            {
                best = static_cast<int>(v);
                best_d = d;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        indices.push_back(best);
    }
    return indices;
}

double truncated_normal(std::mt19937_64& rng, double sigma)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;)
    {
        const double z = normal(rng);
        if (std::abs(z) <= 2.5)
        {
            return sigma * z;
        }
    }
}

std::mt19937_64 item_rng(std::uint64_t seed, int index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x5eedu};
    return std::mt19937_64(seq);
}

} // namespace

SyntheticModel generate_synthetic_model(int n_vertices, int k_full, std::uint64_t seed,
                                        const SyntheticModelOptions& options)
{
    if (n_vertices < 100)
    {
        throw ArgumentError("Synthetic model needs at least 100 vertices, got " + std::to_string(n_vertices));
    }
    if (k_full < 1 || k_full > 3 * n_vertices)
    {
        throw ArgumentError("Synthetic model k_full must lie in [1, 3N], got " + std::to_string(k_full));
    }
    if (options.k_white < 1 || options.k_colour < 1 || options.k_colour > 3 * n_vertices)
    {
        throw ArgumentError("Synthetic model needs positive shape and colour dimensions");
    }
    std::mt19937_64 rng(seed);
    const PolarMesh mesh = polar_mesh(n_vertices);
    const auto n = static_cast<Eigen::Index>(n_vertices);

    Eigen::VectorXd mean(3 * n);
    for (Eigen::Index v = 0; v < n; ++v)
    {
        const Eigen::Vector2d& p = mesh.uv[static_cast<std::size_t>(v)];
        const double rho = p.norm();
        const double x = options.semi_axis_x * p.x();
        const double y = options.semi_axis_y * p.y();
        const double z = options.bowl * (1.0 - rho * rho) - options.helix_height * gaussian_bump(rho, 0.9, 0.07) -
                         options.antihelix_height * gaussian_bump(rho, 0.62, 0.06) +
                         options.concha_depth * std::exp(-(p - Eigen::Vector2d(0.12, 0.1)).squaredNorm() / 0.09) +
                         options.bend * y * y;
        mean.segment<3>(3 * v) << x, y, z;
    }

    const Eigen::MatrixXd shape_basis = smooth_fields(mesh.uv, k_full, 1.5, rng);
    const int k_white = std::min(options.k_white, k_full);
    const double ratio = geometric_ratio(k_white, k_full, options.shape_coverage_at_k);
    Eigen::VectorXd variances(k_full);
    for (int i = 0; i < k_full; ++i)
    {
        variances(i) = std::pow(ratio, i);
    }
    const double sigma0 = options.top_component_rms * std::sqrt(static_cast<double>(n));
    Eigen::MatrixXd recover = Eigen::MatrixXd::Zero(k_full, k_white);
    for (int i = 0; i < k_white; ++i)
    {
        recover(i, i) = sigma0 * std::sqrt(variances(i));
    }
    const double coverage = std::min(1.0, variances.head(k_white).sum() / variances.sum());

    SyntheticModel out;
    out.shape = model::MorphableModel::create(mean, shape_basis, model::WhiteningTransform(recover, coverage),
                                              mesh.triangles, semantic_landmarks(mesh.uv));

    // Mean colour: skin tone under a fixed frontal light.
    const Vertices vertices = out.shape.mean_vertices();
    Vertices normals = Vertices::Zero(n, 3);
    for (const auto& t : mesh.triangles)
    {
        const Eigen::Vector3d a = vertices.row(t[0]), b = vertices.row(t[1]), c = vertices.row(t[2]);
        const Eigen::RowVector3d face = (b - a).cross(c - a).transpose();
        for (const int v : t)
        {
            normals.row(v) += face;
        }
    }
    const Eigen::Vector3d light = Eigen::Vector3d(-0.4, -0.5, -1.0).normalized();
    Eigen::VectorXd mean_colour(3 * n);
    for (Eigen::Index v = 0; v < n; ++v)
    {
        Eigen::Vector3d normal = normals.row(v).transpose().normalized();
        if (normal.z() > 0.0)
        {
            normal = -normal;
        }
        const double shade = 0.55 + 0.45 * std::max(0.0, normal.dot(light));
        mean_colour.segment<3>(3 * v) = (shade * options.skin).cwiseMin(1.0).cwiseMax(0.0);
    }
    Eigen::MatrixXd colour_basis = smooth_fields(mesh.uv, options.k_colour, 1.0, rng);
    const double colour_sigma0 = options.colour_rms * std::sqrt(3.0 * static_cast<double>(n));
    for (int i = 0; i < options.k_colour; ++i)
    {
        colour_basis.col(i) *= colour_sigma0 * std::pow(options.colour_decay, i);
    }
    out.colour = model::ColourModel::create(mean_colour, colour_basis, 1.0);
    return out;
}

fitting::CodeVector draw_code_vector(const SyntheticModel& model, const CorpusOptions& options,
                                     std::uint64_t seed, int index)
{
    std::mt19937_64 rng = item_rng(seed, index);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    fitting::CodeVector v = fitting::CodeVector::zero(model.shape.k_white(), model.colour.k());
    v.pose.rotation << deg(options.max_out_of_plane_degrees) * unit(rng),
        deg(options.max_out_of_plane_degrees) * unit(rng), deg(options.max_roll_degrees) * unit(rng);
    v.pose.translation << options.max_translation * unit(rng), options.max_translation * unit(rng);
    v.pose.scale = options.min_scale + 0.5 * (unit(rng) + 1.0) * (options.max_scale - options.min_scale);
    for (Eigen::Index i = 0; i < v.shape.size(); ++i)
    {
        v.shape(i) = truncated_normal(rng, options.param_sigma);
    }
    for (Eigen::Index i = 0; i < v.colour.size(); ++i)
    {
        v.colour(i) = truncated_normal(rng, options.param_sigma);
    }
    return v;
}

AnnotatedImage render_item(const SyntheticModel& model, const fitting::CodeVector& v, const CorpusOptions& options,
                           std::string id)
{
    const fitting::Frame frame = fitting::Frame::canonical(model.shape, options.width, options.height);
    const auto projected =
        projection::project_sop(model::reconstruct_shape(model.shape, v.shape), frame.to_pixels(v.pose));
    render::RasterConfig config;
    config.width = options.width;
    config.height = options.height;
    config.edge_sigma = options.edge_sigma;
    config.background = options.background;
    AnnotatedImage item;
    item.id = std::move(id);
    item.image = render::rasterize(projected, model::reconstruct_colour(model.colour, v.colour),
                                   model.shape.triangles(), config)
                     .image;
    item.landmarks = projection::select_landmarks(projected, model.shape.landmark_indices());
    item.truth = v;
    return item;
}

std::vector<AnnotatedImage> render_synthetic_corpus(const SyntheticModel& model, const CorpusOptions& options,
                                                    std::uint64_t seed)
{
    if (options.count < 1)
    {
        throw ArgumentError("Corpus count must be at least 1");
    }
    if (options.pixel_sigma < 0.0 || options.param_sigma < 0.0)
    {
        throw ArgumentError("Noise levels must be non-negative");
    }
    std::vector<AnnotatedImage> corpus;
    corpus.reserve(static_cast<std::size_t>(options.count));
    for (int i = 0; i < options.count; ++i)
    {
        char id[32];
        std::snprintf(id, sizeof(id), "synth_%04d", i);
        AnnotatedImage item = render_item(model, draw_code_vector(model, options, seed, i), options, id);
        if (options.pixel_sigma > 0.0)
        {
            std::mt19937_64 rng = item_rng(seed ^ 0x9e3779b97f4a7c15ull, i);
            std::normal_distribution<double> noise(0.0, options.pixel_sigma);
            for (double& value : item.image.data())
            {
                value = std::clamp(value + noise(rng), 0.0, 1.0);
            }
        }
        corpus.push_back(std::move(item));
    }
    return corpus;
}

} // namespace data
} // namespace earfit
