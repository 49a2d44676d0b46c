/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/evaluation.cpp
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
#include "earfit/eval/evaluation.hpp"
#include "earfit/core/error.hpp"
#include "earfit/data/io.hpp"
#include "earfit/fitting/losses.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace earfit {
namespace eval {

EvalReport summarise(std::vector<double> errors, std::vector<std::string> ids, const CedOptions& ced)
{
    if (errors.empty())
    {
        throw ArgumentError("Cannot evaluate an empty list");
    }
    if (!ids.empty() && ids.size() != errors.size())
    {
        throw ArgumentError("Evaluation ids and errors differ in length");
    }
    if (!(ced.step > 0.0) || !(ced.max >= 0.0))
    {
        throw ArgumentError("CED step must be positive and max non-negative");
    }
    EvalReport r;
    r.ids = std::move(ids);
    r.errors = std::move(errors);
    const auto n = static_cast<double>(r.errors.size());

    std::vector<double> sorted = r.errors;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (const double e : sorted)
    {
        sum += e;
    }
    r.mean = sum / n;
    double sq = 0.0;
    for (const double e : sorted)
    {
        sq += (e - r.mean) * (e - r.mean);
    }
    r.std_dev = std::sqrt(sq / n);
    const std::size_t mid = sorted.size() / 2;
    r.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

    auto fraction = [&](double t) {
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) / n;
    };
    r.fraction_below_0_1 = fraction(0.1);
    r.fraction_below_0_06 = fraction(0.06);
    const int samples = static_cast<int>(std::floor(ced.max / ced.step + 1e-9));
    for (int i = 0; i <= samples; ++i)
    {
        const double t = i * ced.step;
        r.thresholds.push_back(t);
        r.ced.push_back(fraction(t));
    }
    return r;
}

EvalReport evaluate(const std::vector<Landmarks>& predictions, const std::vector<Landmarks>& ground_truth,
                    const std::vector<std::string>& ids, const CedOptions& ced)
{
    if (predictions.empty() || predictions.size() != ground_truth.size())
    {
        throw ArgumentError("evaluate needs equal-length, non-empty prediction and ground-truth lists");
    }
    std::vector<double> errors;
    errors.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i)
    {
        errors.push_back(fitting::landmark_loss(predictions[i], ground_truth[i]));
    }
    return summarise(std::move(errors), ids, ced);
}

std::string report_to_json(const EvalReport& r)
{
    nlohmann::json j;
    j["schema"] = "eval/1";
    j["count"] = r.errors.size();
    j["mean"] = r.mean;
    j["std"] = r.std_dev;
    j["median"] = r.median;
    j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json();
    j["fraction_below_0.1"] = r.fraction_below_0_1;
    j["fraction_below_0.06"] = r.fraction_below_0_06;
    j["ced"] = {{"thresholds", r.thresholds}, {"fractions", r.ced}};
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t i = 0; i < r.errors.size(); ++i)
    {
        items.push_back({{"id", i < r.ids.size() ? r.ids[i] : std::to_string(i)}, {"error", r.errors[i]}});
    }
    j["items"] = std::move(items);
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text)
{
    EvalReport r;
    try
    {
        const auto j = nlohmann::json::parse(text);
        if (j.at("schema").get<std::string>() != "eval/1")
        {
            throw DataError("Unsupported evaluation report schema");
        }
        r.mean = j.at("mean").get<double>();
        r.std_dev = j.at("std").get<double>();
        r.median = j.at("median").get<double>();
        if (j.contains("seed") && !j.at("seed").is_null())
        {
            r.seed = j.at("seed").get<std::uint64_t>();
        }
        r.fraction_below_0_1 = j.at("fraction_below_0.1").get<double>();
        r.fraction_below_0_06 = j.at("fraction_below_0.06").get<double>();
        r.thresholds = j.at("ced").at("thresholds").get<std::vector<double>>();
        r.ced = j.at("ced").at("fractions").get<std::vector<double>>();
        for (const auto& item : j.at("items"))
        {
            r.ids.push_back(item.at("id").get<std::string>());
            r.errors.push_back(item.at("error").get<double>());
        }
    } catch (const nlohmann::json::exception& e)
    {
        throw DataError(std::string("Malformed evaluation report (") + e.what() + ")");
    }
    if (r.thresholds.size() != r.ced.size())
    {
        throw DataError("Evaluation report CED thresholds and fractions differ in length");
    }
    return r;
}

std::string ced_to_csv(const EvalReport& report)
{
    std::string out = "threshold,fraction\n";
    char line[80];
    for (std::size_t i = 0; i < report.ced.size(); ++i)
    {
        std::snprintf(line, sizeof(line), "%.17g,%.17g\n", report.thresholds[i], report.ced[i]);
        out += line;
    }
    return out;
}

void emit_report(const EvalReport& report, const std::filesystem::path& prefix)
{
    data::write_text(prefix.string() + ".json", report_to_json(report));
    data::write_text(prefix.string() + "_ced.csv", ced_to_csv(report));
}

void draw_landmarks(Image& image, const Points2& points)
{
    for (Eigen::Index i = 0; i < points.rows(); ++i)
    {
        if (!std::isfinite(points(i, 0)) || !std::isfinite(points(i, 1)))
        {
            continue;
        }
        const int cx = static_cast<int>(std::floor(points(i, 0)));
        const int cy = static_cast<int>(std::floor(points(i, 1)));
        for (int y = cy - 1; y <= cy + 1; ++y)
        {
            for (int x = cx - 1; x <= cx + 1; ++x)
            {
                if (x >= 0 && y >= 0 && x < image.width() && y < image.height())
                {
                    image.set_pixel(x, y, kMarkerColour);
                }
            }
        }
    }
}

} // namespace eval
} // namespace earfit
