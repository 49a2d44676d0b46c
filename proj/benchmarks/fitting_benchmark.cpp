/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: benchmarks/fitting_benchmark.cpp
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
#include "earfit/fitting/landmark_fit.hpp"
#include "earfit/fitting/losses.hpp"
#include "earfit/model/morphable_model.hpp"
#include "earfit/projection/projection.hpp"
#include "earfit/render/rasterizer.hpp"

#include "benchmark/benchmark.h"

using namespace earfit;

namespace {

struct Fixture
{
    data::SyntheticModel model = data::generate_synthetic_model(2000, 120, 7);
    data::CorpusOptions corpus;
    data::AnnotatedImage item;
    fitting::Frame frame;
    projection::ProjectedShape projected;
    Colours colours;

    Fixture()
    {
        item = data::render_item(model, data::draw_code_vector(model, corpus, 1, 0), corpus, "bench");
        frame = fitting::Frame::canonical(model.shape, corpus.width, corpus.height);
        const auto& v = *item.truth;
        projected = projection::project_sop(model::reconstruct_shape(model.shape, v.shape), frame.to_pixels(v.pose));
        colours = model::reconstruct_colour(model.colour, v.colour);
    }

    render::RasterConfig raster() const
    {
        render::RasterConfig c;
        c.width = corpus.width;
        c.height = corpus.height;
        c.background = corpus.background;
        return c;
    }
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

void BM_Rasterize(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(render::rasterize(f.projected, f.colours, f.model.shape.triangles(), f.raster()));
    }
}
BENCHMARK(BM_Rasterize)->Unit(benchmark::kMillisecond);

void BM_RasterizeBackward(benchmark::State& state)
{
    const auto& f = fixture();
    const auto out = render::rasterize(f.projected, f.colours, f.model.shape.triangles(), f.raster());
    const Image d_image(f.corpus.width, f.corpus.height, Eigen::Vector3d::Constant(0.1));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(render::rasterize_backward(out, d_image, f.projected, f.colours,
                                                            f.model.shape.triangles(), f.raster()));
    }
}
BENCHMARK(BM_RasterizeBackward)->Unit(benchmark::kMillisecond);

void BM_TotalLoss(benchmark::State& state)
{
    const auto& f = fixture();
    const fitting::Objective objective(f.model.shape, f.model.colour, f.item.image, f.item.landmarks,
                                       fitting::LossWeights::with_landmarks(), f.raster());
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(objective.evaluate(*f.item.truth));
    }
}
BENCHMARK(BM_TotalLoss)->Unit(benchmark::kMillisecond);

void BM_FitLandmarks(benchmark::State& state)
{
    const auto& f = fixture();
    const auto init = fitting::landmark_initialisation(f.model.shape, f.item.landmarks, f.frame, f.model.colour.k());
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(fitting::fit_landmarks(f.model.shape, f.item.landmarks, f.frame, init));
    }
}
BENCHMARK(BM_FitLandmarks)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
