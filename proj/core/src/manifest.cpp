/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/manifest.cpp
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
#include "earfit/data/io.hpp"
#include "earfit/core/error.hpp"
#include "earfit/core/image.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace earfit {
namespace data {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out)
    {
        throw DataError("Cannot write " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw DataError("Cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Landmarks read_landmarks(const std::filesystem::path& path)
{
    std::istringstream in(read_text(path));
    std::vector<std::array<double, 2>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
        {
            continue;
        }
        std::istringstream fields(line);
        double x = 0.0, y = 0.0;
        std::string extra;
        if (!(fields >> x >> y) || (fields >> extra))
        {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected \"x y\"");
        }
        rows.push_back({x, y});
    }
    if (rows.size() != static_cast<std::size_t>(kNumLandmarks))
    {
        throw DataError(path.string() + ": expected 55 landmarks, found " + std::to_string(rows.size()));
    }
    Landmarks out(kNumLandmarks, 2);
    for (int i = 0; i < kNumLandmarks; ++i)
    {
        out(i, 0) = rows[static_cast<std::size_t>(i)][0];
        out(i, 1) = rows[static_cast<std::size_t>(i)][1];
    }
    if (!out.allFinite())
    {
        throw DataError(path.string() + ": non-finite landmark coordinates");
    }
    return out;
}

void write_landmarks(const std::filesystem::path& path, const Landmarks& landmarks)
{
    std::string text;
    char buffer[96];
    for (Eigen::Index i = 0; i < landmarks.rows(); ++i)
    {
        std::snprintf(buffer, sizeof(buffer), "%.17g %.17g\n", landmarks(i, 0), landmarks(i, 1));
        text += buffer;
    }
    write_text(path, text);
}

namespace {

json parse(const std::string& text, const std::string& what)
{
    try
    {
        return json::parse(text);
    } catch (const json::exception& e)
    {
        throw DataError(what + ": invalid JSON (" + e.what() + ")");
    }
}

// Inverse of the base / stored resolution done by read_manifest().
std::filesystem::path relative_to(const std::filesystem::path& p, const std::filesystem::path& base)
{
    const auto abs_base = std::filesystem::absolute(base.empty() ? std::filesystem::path(".") : base);
    return std::filesystem::absolute(p).lexically_normal().lexically_relative(abs_base.lexically_normal());
}

} // namespace

Manifest read_manifest(const std::filesystem::path& path)
{
    const json j = parse(read_text(path), path.string());
    const auto base = path.parent_path();
    Manifest manifest;
    try
    {
        if (j.at("schema").get<std::string>() != "manifest/1")
        {
            throw DataError(path.string() + ": unsupported manifest schema");
        }
        if (j.contains("seed"))
        {
            manifest.seed = j.at("seed").get<std::uint64_t>();
        }
        for (const auto& e : j.at("items"))
        {
            ManifestItem item;
            item.id = e.at("id").get<std::string>();
            item.image = (base / e.at("image").get<std::string>()).lexically_normal();
            if (e.contains("landmarks"))
            {
                item.landmarks = (base / e.at("landmarks").get<std::string>()).lexically_normal();
            }
            if (e.contains("code_vector"))
            {
                item.code_vector = (base / e.at("code_vector").get<std::string>()).lexically_normal();
            }
            if (e.contains("crop"))
            {
                item.crop = e.at("crop").get<std::array<int, 4>>();
            }
            manifest.items.push_back(std::move(item));
        }
    } catch (const json::exception& e)
    {
        throw DataError(path.string() + ": malformed manifest (" + e.what() + ")");
    }
    return manifest;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest)
{
    const auto base = path.parent_path();
    json j;
    j["schema"] = "manifest/1";
    if (manifest.seed)
    {
        j["seed"] = *manifest.seed;
    }
    json items = json::array();
    for (const auto& item : manifest.items)
    {
        json e;
        e["id"] = item.id;
        e["image"] = relative_to(item.image, base).generic_string();
        if (item.landmarks)
        {
            e["landmarks"] = relative_to(*item.landmarks, base).generic_string();
        }
        if (item.code_vector)
        {
            e["code_vector"] = relative_to(*item.code_vector, base).generic_string();
        }
        if (item.crop)
        {
            e["crop"] = *item.crop;
        }
        items.push_back(std::move(e));
    }
    j["items"] = std::move(items);
    write_text(path, j.dump(2) + "\n");
}

AnnotatedImage load_item(const ManifestItem& item)
{
    AnnotatedImage out;
    out.id = item.id;
    out.image = read_png(item.image);
    if (item.landmarks)
    {
        out.landmarks = read_landmarks(*item.landmarks);
    }
    if (item.code_vector)
    {
        out.truth = read_code_vector(*item.code_vector);
    }
    return out;
}

namespace {

json code_vector_json(const fitting::CodeVector& v)
{
    json j;
    j["schema"] = "code_vector/1";
    j["pose"] = {{"azimuth", v.pose.rotation(0)},
                 {"elevation", v.pose.rotation(1)},
                 {"roll", v.pose.rotation(2)},
                 {"translation", {v.pose.translation(0), v.pose.translation(1)}},
                 {"scale", v.pose.scale}};
    j["shape"] = std::vector<double>(v.shape.data(), v.shape.data() + v.shape.size());
    j["colour"] = std::vector<double>(v.colour.data(), v.colour.data() + v.colour.size());
    return j;
}

json terms_json(const fitting::LossTerms& t)
{
    return {{"pixel", t.pixel},
            {"landmark", t.landmark},
            {"reg_statistical", t.reg_statistical},
            {"reg_scale", t.reg_scale},
            {"total", t.total}};
}

} // namespace

std::string code_vector_to_json(const fitting::CodeVector& v)
{
    return code_vector_json(v).dump(2) + "\n";
}

fitting::CodeVector code_vector_from_json(const std::string& text)
{
    const json j = parse(text, "code vector");
    fitting::CodeVector v;
    try
    {
        if (j.at("schema").get<std::string>() != "code_vector/1")
        {
            throw DataError("Unsupported code vector schema");
        }
        const auto& pose = j.at("pose");
        v.pose.rotation << pose.at("azimuth").get<double>(), pose.at("elevation").get<double>(),
            pose.at("roll").get<double>();
        const auto t = pose.at("translation").get<std::array<double, 2>>();
        v.pose.translation << t[0], t[1];
        v.pose.scale = pose.at("scale").get<double>();
        const auto shape = j.at("shape").get<std::vector<double>>();
        const auto colour = j.at("colour").get<std::vector<double>>();
        v.shape = Eigen::Map<const Eigen::VectorXd>(shape.data(), static_cast<Eigen::Index>(shape.size()));
        v.colour = Eigen::Map<const Eigen::VectorXd>(colour.data(), static_cast<Eigen::Index>(colour.size()));
    } catch (const json::exception& e)
    {
        throw DataError(std::string("Malformed code vector (") + e.what() + ")");
    }
    return v;
}

void write_code_vector(const std::filesystem::path& path, const fitting::CodeVector& v)
{
    write_text(path, code_vector_to_json(v));
}

fitting::CodeVector read_code_vector(const std::filesystem::path& path)
{
    try
    {
        return code_vector_from_json(read_text(path));
    } catch (const DataError& e)
    {
        throw DataError(path.string() + ": " + e.what());
    }
}

namespace {

json fit_report_json(const fitting::FitReport& report, const std::string& stage)
{
    json j;
    j["schema"] = "fit_report/1";
    j["stage"] = stage;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["stop_reason"] = report.stop_reason;
    // The returned code vector is the best state, i.e. the lowest total in the trace.
    const auto best = std::min_element(report.trace.begin(), report.trace.end(),
                                       [](const auto& a, const auto& b) { return a.total < b.total; });
    j["best"] = best == report.trace.end() ? json() : terms_json(*best);
    json trace = json::array();
    for (const auto& t : report.trace)
    {
        trace.push_back(terms_json(t));
    }
    j["trace"] = std::move(trace);
    j["code_vector"] = code_vector_json(report.code);
    return j;
}

} // namespace

std::string fit_report_to_json(const fitting::FitReport& report, const std::string& stage)
{
    return fit_report_json(report, stage).dump(2) + "\n";
}

std::string fit_run_to_json(const std::vector<FitStage>& stages, std::optional<std::uint64_t> seed)
{
    json j;
    j["schema"] = "fit_run/1";
    j["seed"] = seed ? json(*seed) : json();
    json list = json::array();
    for (const auto& stage : stages)
    {
        list.push_back(fit_report_json(stage.report, stage.name));
    }
    j["stages"] = std::move(list);
    return j.dump(2) + "\n";
}

} // namespace data
} // namespace earfit
