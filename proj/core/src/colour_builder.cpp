/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/colour_builder.cpp
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
#include "earfit/colour/colour_builder.hpp"
#include "earfit/core/error.hpp"
#include "earfit/fitting/code_vector.hpp"
#include "earfit/model/pca.hpp"
#include "earfit/render/rasterizer.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace earfit {
namespace colour {

int VertexColourSample::valid_count() const
{
    return static_cast<int>(std::count(valid.begin(), valid.end(), true));
}

VertexColourSample sample_vertex_colours(const Image& image, const projection::ProjectedShape& projected,
                                         const TriangleList& triangles, const SamplingOptions& options)
{
    if (image.empty())
    {
        throw ArgumentError("sample_vertex_colours: empty image");
    }
    const auto n = projected.points.rows();
    render::RasterConfig config;
    config.width = image.width();
    config.height = image.height();
    config.edge_sigma = 0.0;
    const auto raster = render::rasterize(projected, Colours::Zero(n, 3), triangles, config);

    auto covered = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < image.width() && y < image.height() && raster.fragment(x, y).triangle >= 0;
    };

    VertexColourSample out;
    out.colours = Colours::Zero(n, 3);
    out.valid.assign(static_cast<std::size_t>(n), false);
    int in_bounds = 0;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    for (Eigen::Index v = 0; v < n; ++v)
    {
        const Eigen::Vector2d p = projected.points.row(v).transpose();
        if (!(p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= image.width() && p.y() <= image.height()))
        {
            continue;
        }
        ++in_bounds;
        const int px = std::min(static_cast<int>(std::floor(p.x())), image.width() - 1);
        const int py = std::min(static_cast<int>(std::floor(p.y())), image.height() - 1);
        const auto& frag = raster.fragment(px, py);
        if (frag.triangle < 0 || projected.depth(v) > frag.depth + options.depth_tolerance)
        {
            continue;
        }
        const int x0 = static_cast<int>(std::floor(p.x() - 0.5));
        const int y0 = static_cast<int>(std::floor(p.y() - 0.5));
        if (!covered(x0, y0) || !covered(x0 + 1, y0) || !covered(x0, y0 + 1) || !covered(x0 + 1, y0 + 1))
        {
            continue;
        }
        const Eigen::Vector3d c = sample_bilinear(image, p).cwiseMax(0.0).cwiseMin(1.0);
        out.colours.row(v) = c.transpose();
        out.valid[static_cast<std::size_t>(v)] = true;
        sum += c;
        ++count;
    }
    if (in_bounds == 0)
    {
        throw DataError("All vertices project outside the image");
    }
    if (count == 0)
    {
        throw DataError("No vertex is visible with a fully covered sampling footprint");
    }
    const Eigen::RowVector3d fill = (sum / count).transpose();
    for (Eigen::Index v = 0; v < n; ++v)
    {
        if (!out.valid[static_cast<std::size_t>(v)])
        {
            out.colours.row(v) = fill;
        }
    }
    return out;
}

std::string ColourBuildReport::to_json() const
{
    nlohmann::json j;
    j["schema"] = "colour_build/1";
    j["k"] = k;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json();
    j["coverage"] = coverage;
    j["used"] = used;
    j["skipped"] = skipped;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& item : items)
    {
        nlohmann::json e = {{"id", item.id}, {"used", item.used}, {"landmark_energy", item.landmark_energy},
                            {"valid_vertices", item.valid_vertices}};
        if (!item.error.empty())
        {
            e["error"] = item.error;
        }
        list.push_back(std::move(e));
    }
    j["items"] = std::move(list);
    return j.dump(2) + "\n";
}

ColourBuildResult build_colour_model(const std::vector<data::AnnotatedImage>& corpus,
                                     const model::MorphableModel& model, const ColourBuildOptions& options)
{
    if (corpus.empty())
    {
        throw ArgumentError("Colour model corpus is empty");
    }
    if (options.k < 1)
    {
        throw ArgumentError("Colour model dimension must be positive");
    }
    const auto n = static_cast<Eigen::Index>(model.n_vertices());
    ColourBuildReport report;
    report.k = options.k;
    std::vector<Eigen::VectorXd> rows;
    for (const auto& item : corpus)
    {
        ColourBuildItem entry;
        entry.id = item.id;
        try
        {
            data::validate(item);
            const auto frame = fitting::Frame::canonical(model, item.image.width(), item.image.height());
            const auto init = fitting::landmark_initialisation(model, item.landmarks, frame, 0);
            const auto fit = fitting::fit_landmarks(model, item.landmarks, frame, init, options.landmark_fit);
            entry.landmark_energy = fit.trace.back().total;
            const auto projected = projection::project_sop(model::reconstruct_shape(model, fit.code.shape),
                                                           frame.to_pixels(fit.code.pose));
            const auto sample = sample_vertex_colours(item.image, projected, model.triangles(), options.sampling);
            entry.valid_vertices = sample.valid_count();
            rows.push_back(Eigen::Map<const Eigen::VectorXd>(sample.colours.data(), 3 * n));
            entry.used = true;
        } catch (const Error& e)
        {
            entry.error = e.what();
        }
        (entry.used ? report.used : report.skipped)++;
        report.items.push_back(std::move(entry));
    }
    if (2 * report.skipped > static_cast<int>(corpus.size()))
    {
        throw DataError("Colour model build failed on " + std::to_string(report.skipped) + " of " +
                        std::to_string(corpus.size()) + " images");
    }

    Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows.size()), 3 * n);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        samples.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    const auto pca = model::build_pca(samples, model::ComponentCount{options.k});
    report.coverage = pca.whitening.coverage();
    return {model::ColourModel::create(pca.mean, pca.whitening.recover(), report.coverage), std::move(report)};
}

} // namespace colour
} // namespace earfit
