/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tools/earfit.cpp
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
#include "earfit/core/config.hpp"
#include "earfit/core/error.hpp"
#include "earfit/core/image.hpp"
#include "earfit/data/augment.hpp"
#include "earfit/data/io.hpp"
#include "earfit/data/synthetic.hpp"
#include "earfit/eval/evaluation.hpp"
#include "earfit/fitting/landmark_fit.hpp"
#include "earfit/fitting/photometric_fit.hpp"
#include "earfit/model/earm_io.hpp"
#include "earfit/projection/projection.hpp"

#include "parallel.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace earfit;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

/**
 * Settings of one subcommand: every key has a default, may be set in the
 * config file and may be overridden by the flag --<key> (with '_' and '.'
 * written as '-'). Flags win over the file.
 */
class Settings
{
public:
    struct Key
    {
        std::string name;
        std::string fallback;
        std::string help;
    };

    Settings(CLI::App* app, std::vector<Key> keys) : keys_(std::move(keys))
    {
        app->add_option("--config", config_path_, "Config file (key = value)");
        for (const auto& key : keys_)
        {
            std::string flag = "--" + key.name;
            for (char& c : flag)
            {
                if (c == '_' || c == '.')
                {
                    c = '-';
                }
            }
            options_[key.name] = app->add_option(flag, flags_[key.name], key.help);
        }
    }

    /// Merges defaults, the config file and given flags; echoes the result.
    void resolve()
    {
        for (const auto& key : keys_)
        {
            values_[key.name] = key.fallback;
        }
        if (!config_path_.empty())
        {
            for (const auto& [k, v] : read_config(config_path_))
            {
                if (!values_.count(k))
                {
                    throw ArgumentError("Unknown config key '" + k + "' in " + config_path_);
                }
                values_[k] = v;
            }
        }
        for (const auto& [k, opt] : options_)
        {
            if (opt->count() > 0)
            {
                values_[k] = flags_[k];
            }
        }
        std::cout << "# resolved config\n" << format_config(values_) << std::flush;
    }

    const std::string& str(const std::string& key) const { return values_.at(key); }
    bool has(const std::string& key) const { return !values_.at(key).empty(); }

    double num(const std::string& key) const
    {
        try
        {
            std::size_t used = 0;
            const double v = std::stod(str(key), &used);
            if (used == str(key).size())
            {
                return v;
            }
        } catch (const std::exception&)
        {
        }
        throw ArgumentError("Setting '" + key + "' must be a number, got '" + str(key) + "'");
    }

    int integer(const std::string& key) const
    {
        const double v = num(key);
        if (v != static_cast<double>(static_cast<long long>(v)))
        {
            throw ArgumentError("Setting '" + key + "' must be an integer, got '" + str(key) + "'");
        }
        return static_cast<int>(v);
    }

    std::uint64_t seed() const
    {
        const auto& v = str("seed");
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        {
            throw ArgumentError("Setting 'seed' must be a non-negative integer, got '" + v + "'");
        }
        try
        {
            return std::stoull(v);
        } catch (const std::out_of_range&)
        {
            throw ArgumentError("Setting 'seed' is out of range: '" + v + "'");
        }
    }

    bool flag(const std::string& key) const
    {
        const auto& v = str(key);
        if (v == "true" || v == "1" || v == "yes")
        {
            return true;
        }
        if (v == "false" || v == "0" || v == "no" || v.empty())
        {
            return false;
        }
        throw ArgumentError("Setting '" + key + "' must be true or false, got '" + v + "'");
    }

    std::string path(const std::string& key) const
    {
        if (!has(key))
        {
            throw ArgumentError("Missing required setting '" + key + "'");
        }
        return str(key);
    }

private:
    std::vector<Key> keys_;
    std::string config_path_;
    std::map<std::string, std::string> flags_;
    std::map<std::string, CLI::Option*> options_;
    std::map<std::string, std::string> values_;
};

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
        throw DataError("Cannot create directory " + dir.string() + ": " + ec.message());
    }
}

model::ColourModel require_colour(const model::EarmContents& contents, const std::string& path)
{
    if (!contents.colour)
    {
        throw DataError(path + " has no colour model");
    }
    return *contents.colour;
}

Eigen::Vector3d grey(double v)
{
    return Eigen::Vector3d::Constant(v);
}

// ---------------------------------------------------------------------------

int cmd_synth(const Settings& s)
{
    const int count = s.integer("count");
    if (count < 1)
    {
        throw ArgumentError("count must be at least 1");
    }
    const auto seed = s.seed();
    data::SyntheticModelOptions mo;
    mo.k_white = s.integer("k_white");
    mo.k_colour = s.integer("k_colour");
    const auto model = data::generate_synthetic_model(s.integer("vertices"), s.integer("k_full"), seed, mo);

    data::CorpusOptions co;
    co.count = count;
    co.width = s.integer("width");
    co.height = s.integer("height");
    co.pixel_sigma = s.num("pixel_sigma");
    co.param_sigma = s.num("param_sigma");
    co.edge_sigma = s.num("edge_sigma");
    co.background = grey(s.num("background"));
    const auto corpus = data::render_synthetic_corpus(model, co, seed);

    const fs::path out = s.str("out");
    ensure_dir(out / "images");
    ensure_dir(out / "landmarks");
    ensure_dir(out / "truth");
    model::write_earm(out / "model.earm", model.shape, &model.colour);
    data::Manifest manifest;
    manifest.seed = seed;
    for (const auto& item : corpus)
    {
        data::ManifestItem entry;
        entry.id = item.id;
        entry.image = out / "images" / (item.id + ".png");
        entry.landmarks = out / "landmarks" / (item.id + ".txt");
        entry.code_vector = out / "truth" / (item.id + ".json");
        write_png(item.image, entry.image);
        data::write_landmarks(*entry.landmarks, item.landmarks);
        data::write_code_vector(*entry.code_vector, *item.truth);
        manifest.items.push_back(std::move(entry));
    }
    data::write_manifest(out / "manifest.json", manifest);
    std::cout << "wrote model and " << corpus.size() << " items to " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct FitJob
{
    std::string id;
    fs::path image;
    std::optional<fs::path> landmarks;
};

struct FitOutcome
{
    std::string id;
    int exit_code = 0;
    std::string message;
    std::optional<double> landmark_loss;
    double scale = 0.0;
};

Image make_overlay(const Image& input, const render::RasterOutput& rendered, const Points2& landmarks)
{
    Image overlay = input;
    for (int y = 0; y < input.height(); ++y)
    {
        for (int x = 0; x < input.width(); ++x)
        {
            if (rendered.coverage(x, y) > 0.5)
            {
                overlay.set_pixel(x, y, 0.5 * (input.pixel(x, y) + rendered.image.pixel(x, y)));
            }
        }
    }
    eval::draw_landmarks(overlay, landmarks);
    return overlay;
}

FitOutcome fit_one(const Settings& s, const model::MorphableModel& shape, const model::ColourModel& colour,
                   const FitJob& job, const fs::path& out, std::optional<std::uint64_t> seed)
{
    FitOutcome outcome;
    outcome.id = job.id;
    fitting::LossWeights weights = fitting::LossWeights::preset(s.str("preset"));
    const std::pair<const char*, double*> overrides[] = {{"weights.pixel", &weights.pixel},
                                                         {"weights.landmark", &weights.landmark},
                                                         {"weights.reg_statistical", &weights.reg_statistical},
                                                         {"weights.reg_scale", &weights.reg_scale}};
    for (const auto& [key, weight] : overrides)
    {
        if (s.has(key))
        {
            *weight = s.num(key);
        }
    }
    if (weights.landmark > 0.0 && !job.landmarks)
    {
        throw ArgumentError("Item '" + job.id + "': landmarks are required unless the landmark weight is 0");
    }

    const Image image = read_png(job.image);
    std::optional<Landmarks> landmarks;
    if (job.landmarks)
    {
        landmarks = data::read_landmarks(*job.landmarks);
    }
    render::RasterConfig raster;
    raster.edge_sigma = s.num("edge_sigma");
    raster.background = grey(s.num("background"));
    // Landmarks steer the fit only when their term is weighted; otherwise
    // they are read for reporting alone.
    const bool use_landmarks = landmarks && weights.landmark > 0.0;
    const fitting::Objective objective(shape, colour, image, use_landmarks ? landmarks : std::nullopt, weights,
                                       raster);

    fitting::LandmarkFitOptions lm_options;
    lm_options.max_iterations = s.integer("lm_iterations");
    fitting::PhotometricFitOptions ph_options;
    ph_options.max_iterations = s.integer("iterations");
    ph_options.learning_rate = s.num("learning_rate");

    std::vector<data::FitStage> stages;
    fitting::FitReport result;
    auto write_outputs = [&](const fitting::FitReport& report) {
        data::write_code_vector(out / (job.id + "_code.json"), report.code);
        data::write_text(out / (job.id + "_report.json"), data::fit_run_to_json(stages, seed));
        const auto projected = projection::project_sop(model::reconstruct_shape(shape, report.code.shape),
                                                       objective.frame().to_pixels(report.code.pose));
        const Landmarks predicted = projection::select_landmarks(projected, shape.landmark_indices());
        data::write_landmarks(out / (job.id + "_landmarks.txt"), predicted);
        write_png(make_overlay(image, objective.render(report.code), predicted),
                  out / (job.id + "_overlay.png"));
        if (landmarks)
        {
            outcome.landmark_loss = fitting::landmark_loss(predicted, *landmarks);
        }
        outcome.scale = report.code.pose.scale;
    };

    try
    {
        fitting::CodeVector init;
        if (use_landmarks)
        {
            const auto start = fitting::landmark_initialisation(shape, *landmarks, objective.frame(), colour.k());
            const auto lm = fitting::fit_landmarks(shape, *landmarks, objective.frame(), start, lm_options);
            stages.push_back({"landmarks", lm});
            init = lm.code;
        } else
        {
            init = fitting::pose_grid_initialisation(objective);
        }
        result = fitting::fit_photometric(objective, init, ph_options);
        stages.push_back({"photometric", result});
    } catch (const fitting::FitDivergedError& e)
    {
        stages.push_back({"diverged", e.best()});
        write_outputs(e.best());
        outcome.exit_code = kExitDivergence;
        outcome.message = e.what();
        return outcome;
    }
    write_outputs(result);
    return outcome;
}

int cmd_fit(const Settings& s)
{
    const auto contents = model::read_earm(s.path("model"));
    const auto colour = require_colour(contents, s.str("model"));
    const fs::path out = s.str("out");
    ensure_dir(out);

    std::vector<FitJob> jobs;
    std::optional<std::uint64_t> seed;
    if (s.has("manifest"))
    {
        const auto manifest = data::read_manifest(s.str("manifest"));
        seed = manifest.seed;
        for (const auto& item : manifest.items)
        {
            jobs.push_back({item.id, item.image, item.landmarks});
        }
    } else
    {
        const fs::path image = s.path("image");
        FitJob job{image.stem().string(), image, std::nullopt};
        if (s.has("landmarks"))
        {
            job.landmarks = s.str("landmarks");
        }
        jobs.push_back(job);
    }
    if (jobs.empty())
    {
        throw ArgumentError("Nothing to fit");
    }
    if (!seed)
    {
        seed = s.seed();
    }
    // Usage errors surface before any work starts.
    fitting::LossWeights::preset(s.str("preset"));

    std::vector<FitOutcome> outcomes(jobs.size());
    tools::parallel_for(jobs.size(), s.integer("jobs"), [&](std::size_t i) {
        try
        {
            outcomes[i] = fit_one(s, contents.shape, colour, jobs[i], out, seed);
        } catch (const ArgumentError& e)
        {
            outcomes[i] = {jobs[i].id, kExitUsage, e.what(), std::nullopt, 0.0};
        } catch (const Error& e)
        {
            outcomes[i] = {jobs[i].id, kExitData, e.what(), std::nullopt, 0.0};
        }
    });

    data::Manifest predicted;
    predicted.seed = seed;
    int exit_code = 0;
    double sum = 0.0;
    int with_loss = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i)
    {
        const auto& o = outcomes[i];
        if (o.exit_code == kExitUsage || o.exit_code == kExitData)
        {
            std::cerr << "error: " << o.id << ": " << o.message << "\n";
            exit_code = std::max(exit_code, o.exit_code);
            continue;
        }
        if (o.exit_code == kExitDivergence)
        {
            std::cerr << "diverged: " << o.id << ": " << o.message << "\n";
            exit_code = std::max(exit_code, kExitDivergence);
        }
        data::ManifestItem entry;
        entry.id = o.id;
        entry.image = jobs[i].image;
        entry.landmarks = out / (o.id + "_landmarks.txt");
        entry.code_vector = out / (o.id + "_code.json");
        predicted.items.push_back(entry);
        std::printf("%s scale %.4f", o.id.c_str(), o.scale);
        if (o.landmark_loss)
        {
            std::printf(" landmark_loss %.6f", *o.landmark_loss);
            sum += *o.landmark_loss;
            ++with_loss;
        }
        std::printf("\n");
    }
    if (with_loss > 0)
    {
        std::printf("mean landmark_loss %.6f over %d items\n", sum / with_loss, with_loss);
    }
    data::write_manifest(out / "manifest.json", predicted);
    return exit_code;
}

// ---------------------------------------------------------------------------

int cmd_build_colour_model(const Settings& s)
{
    auto contents = model::read_earm(s.path("model"));
    const auto manifest = data::read_manifest(s.path("manifest"));
    std::vector<data::AnnotatedImage> corpus;
    for (const auto& item : manifest.items)
    {
        if (!item.landmarks)
        {
            throw DataError("Manifest item '" + item.id + "' has no landmarks");
        }
        corpus.push_back(data::load_item(item));
    }
    colour::ColourBuildOptions options;
    options.k = s.integer("k");
    options.sampling.depth_tolerance = s.num("depth_tolerance");
    auto result = colour::build_colour_model(corpus, contents.shape, options);
    result.report.seed = s.seed();
    const fs::path out = s.str("out");
    if (out.has_parent_path())
    {
        ensure_dir(out.parent_path());
    }
    model::write_earm(out, contents.shape, &result.model);
    const fs::path report = s.has("report") ? fs::path(s.str("report")) : fs::path(out.string() + ".json");
    data::write_text(report, result.report.to_json());
    std::printf("colour model k %d coverage %.6f from %d images (%d skipped)\n", result.report.k,
                result.report.coverage, result.report.used, result.report.skipped);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_augment(const Settings& s)
{
    const auto manifest = data::read_manifest(s.path("manifest"));
    data::AugmentOptions options;
    options.count = s.integer("count");
    options.range_degrees = s.num("range");
    options.lobe = s.integer("lobe");
    options.helix = s.integer("helix");
    const auto seed = s.seed();
    const fs::path out = s.str("out");
    ensure_dir(out);

    data::Manifest augmented;
    augmented.seed = seed;
    std::uint64_t item_seed = seed;
    for (const auto& item : manifest.items)
    {
        if (!item.landmarks)
        {
            throw DataError("Manifest item '" + item.id + "' has no landmarks");
        }
        const auto source = data::load_item(item);
        // Each input gets its own stream derived from the run seed and its position.
        for (const auto& copy : data::augment(source, options, item_seed++))
        {
            data::ManifestItem entry;
            entry.id = copy.id;
            entry.image = out / (copy.id + ".png");
            entry.landmarks = out / (copy.id + ".txt");
            write_png(copy.image, entry.image);
            data::write_landmarks(*entry.landmarks, copy.landmarks);
            if (copy.truth)
            {
                entry.code_vector = out / (copy.id + ".json");
                data::write_code_vector(*entry.code_vector, *copy.truth);
            }
            augmented.items.push_back(std::move(entry));
        }
    }
    data::write_manifest(out / "manifest.json", augmented);
    std::printf("wrote %zu augmented items to %s\n", augmented.items.size(), out.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_eval(const Settings& s)
{
    const auto pred = data::read_manifest(s.path("pred"));
    const auto gt = data::read_manifest(s.path("gt"));
    std::map<std::string, const data::ManifestItem*> by_id;
    for (const auto& item : gt.items)
    {
        by_id[item.id] = &item;
    }
    std::vector<Landmarks> predictions, truths;
    std::vector<std::string> ids;
    for (const auto& item : pred.items)
    {
        const auto it = by_id.find(item.id);
        if (it == by_id.end())
        {
            throw DataError("Prediction '" + item.id + "' has no ground-truth entry");
        }
        if (!item.landmarks || !it->second->landmarks)
        {
            throw DataError("Item '" + item.id + "' lacks a landmark file");
        }
        predictions.push_back(data::read_landmarks(*item.landmarks));
        truths.push_back(data::read_landmarks(*it->second->landmarks));
        ids.push_back(item.id);
    }
    eval::CedOptions ced;
    ced.step = s.num("ced_step");
    ced.max = s.num("ced_max");
    auto report = eval::evaluate(predictions, truths, ids, ced);
    report.seed = s.seed();
    const fs::path prefix = s.str("out");
    if (prefix.has_parent_path())
    {
        ensure_dir(prefix.parent_path());
    }
    eval::emit_report(report, prefix);
    if (s.flag("overlays"))
    {
        const fs::path dir = prefix.string() + "_overlays";
        ensure_dir(dir);
        for (std::size_t i = 0; i < ids.size(); ++i)
        {
            Image image = read_png(by_id[ids[i]]->image);
            eval::draw_landmarks(image, predictions[i]);
            write_png(image, dir / (ids[i] + ".png"));
        }
    }
    std::printf("mean %.6f std %.6f median %.6f <=0.1 %.4f <=0.06 %.4f (n=%zu)\n", report.mean, report.std_dev,
                report.median, report.fraction_below_0_1, report.fraction_below_0_06, report.errors.size());
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_render(const Settings& s)
{
    const auto contents = model::read_earm(s.path("model"));
    const auto colour = require_colour(contents, s.str("model"));
    fitting::CodeVector v = s.has("code") ? data::read_code_vector(s.str("code"))
                                          : fitting::CodeVector::zero(contents.shape.k_white(), colour.k());
    v.validate(contents.shape.k_white(), colour.k());
    const int width = s.integer("width");
    const int height = s.integer("height");
    const auto frame = fitting::Frame::canonical(contents.shape, width, height);
    render::RasterConfig raster;
    raster.width = width;
    raster.height = height;
    raster.edge_sigma = s.num("edge_sigma");
    raster.background = grey(s.num("background"));
    const auto projected =
        projection::project_sop(model::reconstruct_shape(contents.shape, v.shape), frame.to_pixels(v.pose));
    const auto output = render::rasterize(projected, model::reconstruct_colour(colour, v.colour),
                                          contents.shape.triangles(), raster);
    const fs::path out = s.str("out");
    if (out.has_parent_path())
    {
        ensure_dir(out.parent_path());
    }
    write_png(output.image, out);
    std::printf("wrote %s\n", out.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"earfit: 3D ear reconstruction by analysis-by-synthesis"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic model and rendered corpus");
    Settings synth_s(synth, {{"seed", "0", "Random seed"},
                             {"vertices", "2000", "Mesh vertex count"},
                             {"k_full", "120", "Full shape components"},
                             {"k_white", "40", "Whitened shape dimension"},
                             {"k_colour", "40", "Colour dimension"},
                             {"count", "50", "Number of images"},
                             {"width", "128", "Image width"},
                             {"height", "128", "Image height"},
                             {"pixel_sigma", "0.01", "Pixel noise sd"},
                             {"param_sigma", "1.0", "Parameter sd"},
                             {"edge_sigma", "1.0", "Soft edge width, pixels"},
                             {"background", "0.05", "Grey background level"},
                             {"out", "synth", "Output directory"}});

    auto* fit = app.add_subcommand("fit", "Fit code vectors to images");
    Settings fit_s(fit, {{"seed", "0", "Random seed (fitting is deterministic)"},
                         {"model", "", "EARM model with colour blocks"},
                         {"image", "", "Input PNG (single-image mode)"},
                         {"landmarks", "", "Landmark file (single-image mode)"},
                         {"manifest", "", "Manifest for batch mode"},
                         {"preset", "with-landmarks", "with-landmarks or without-landmarks"},
                         {"weights.pixel", "", "Override pixel weight"},
                         {"weights.landmark", "", "Override landmark weight"},
                         {"weights.reg_statistical", "", "Override statistical prior weight"},
                         {"weights.reg_scale", "", "Override scale prior weight"},
                         {"iterations", "400", "Photometric iterations"},
                         {"lm_iterations", "200", "Landmark-fit iterations"},
                         {"learning_rate", "0.01", "Photometric step size"},
                         {"edge_sigma", "1.0", "Soft edge width, pixels"},
                         {"background", "0.05", "Grey background level"},
                         {"jobs", "1", "Parallel images"},
                         {"out", "fit", "Output directory"}});

    auto* build = app.add_subcommand("build-colour-model", "Build a colour model from an annotated corpus");
    Settings build_s(build, {{"seed", "0", "Random seed (unused; recorded)"},
                             {"model", "", "EARM shape model"},
                             {"manifest", "", "Annotated corpus manifest"},
                             {"k", "40", "Colour components"},
                             {"depth_tolerance", "0.05", "Occlusion depth tolerance, model units"},
                             {"out", "colour_model.earm", "Output EARM file"},
                             {"report", "", "Build report JSON (default <out>.json)"}});

    auto* aug = app.add_subcommand("augment", "Rotation augmentation");
    Settings aug_s(aug, {{"seed", "0", "Random seed"},
                         {"manifest", "", "Input manifest"},
                         {"count", "12", "Copies per input"},
                         {"range", "60", "Ear angle range, degrees"},
                         {"lobe", std::to_string(data::kDefaultLobeLandmark), "Lobe landmark index"},
                         {"helix", std::to_string(data::kDefaultHelixLandmark), "Helix landmark index"},
                         {"out", "augmented", "Output directory"}});

    auto* ev = app.add_subcommand("eval", "Landmark error statistics");
    Settings ev_s(ev, {{"seed", "0", "Random seed (unused; recorded)"},
                       {"pred", "", "Prediction manifest"},
                       {"gt", "", "Ground-truth manifest"},
                       {"ced_step", "0.01", "CED threshold step"},
                       {"ced_max", "0.1", "Largest CED threshold"},
                       {"overlays", "false", "Write overlay PNGs"},
                       {"out", "eval", "Output prefix"}});

    auto* rend = app.add_subcommand("render", "Render a code vector");
    Settings rend_s(rend, {{"seed", "0", "Random seed (unused; recorded)"},
                           {"model", "", "EARM model with colour blocks"},
                           {"code", "", "Code vector JSON (default: zero)"},
                           {"width", "128", "Image width"},
                           {"height", "128", "Image height"},
                           {"edge_sigma", "1.0", "Soft edge width, pixels"},
                           {"background", "0.05", "Grey background level"},
                           {"out", "render.png", "Output PNG"}});

    try
    {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    } catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kExitUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    try
    {
        if (synth->parsed())
        {
            synth_s.resolve();
            code = cmd_synth(synth_s);
        } else if (fit->parsed())
        {
            fit_s.resolve();
            code = cmd_fit(fit_s);
        } else if (build->parsed())
        {
            build_s.resolve();
            code = cmd_build_colour_model(build_s);
        } else if (aug->parsed())
        {
            aug_s.resolve();
            code = cmd_augment(aug_s);
        } else if (ev->parsed())
        {
            ev_s.resolve();
            code = cmd_eval(ev_s);
        } else if (rend->parsed())
        {
            rend_s.resolve();
            code = cmd_render(rend_s);
        }
    } catch (const ArgumentError& e)
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergenceError& e)
    {
        std::cerr << "diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    // Timing goes to stdout only so that output files stay reproducible.
    std::printf("elapsed %.2f s\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return code;
}
