/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/earm_io.cpp
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
#include "earfit/model/earm_io.hpp"
#include "earfit/core/error.hpp"

#include "json.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace earfit {
namespace model {

namespace {

static_assert(std::endian::native == std::endian::little, "EARM I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'A', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kPreambleSize = 16;

template <typename T>
void append_raw(std::vector<std::uint8_t>& out, const T* values, std::size_t count)
{
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(values);
    out.insert(out.end(), bytes, bytes + count * sizeof(T));
}

template <typename T>
void append_value(std::vector<std::uint8_t>& out, T value)
{
    append_raw(out, &value, 1);
}

class Reader
{
public:
    Reader(const std::vector<std::uint8_t>& bytes, std::size_t offset) : bytes_(bytes), offset_(offset) {}

    template <typename T>
    void read(T* dst, std::size_t count, const std::string& what)
    {
        const auto n = count * sizeof(T);
        if (offset_ + n > bytes_.size())
        {
            throw DataError("EARM block '" + what + "' runs past the end of the file");
        }
        std::memcpy(dst, bytes_.data() + offset_, n);
        offset_ += n;
    }

    std::size_t offset() const noexcept { return offset_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t offset_;
};

nlohmann::json block(const std::string& name, const std::string& type, std::size_t count)
{
    return {{"name", name}, {"type", type}, {"count", count}};
}

} // namespace

std::vector<std::uint8_t> encode_earm(const MorphableModel& shape, const ColourModel* colour)
{
    if (colour && colour->n_vertices() != shape.n_vertices())
    {
        throw ArgumentError("Colour model has " + std::to_string(colour->n_vertices()) +
                            " vertices but the shape model has " + std::to_string(shape.n_vertices()));
    }
    const std::size_t dim = shape.mean_shape().size();
    const std::size_t k_full = shape.k_full();
    const std::size_t k_white = shape.k_white();
    const std::size_t n_tri = shape.triangles().size();

    nlohmann::json header;
    header["format"] = "EARM";
    header["version"] = kVersion;
    header["n_vertices"] = shape.n_vertices();
    header["k_full"] = k_full;
    header["k_white"] = k_white;
    header["coverage"] = shape.whitening().coverage();
    header["n_triangles"] = n_tri;
    header["landmark_indices"] = shape.landmark_indices();
    nlohmann::json blocks = nlohmann::json::array();
    blocks.push_back(block("mean_shape", "f64", dim));
    blocks.push_back(block("shape_basis", "f64", dim * k_full));
    blocks.push_back(block("recover_matrix", "f64", k_full * k_white));
    blocks.push_back(block("triangles", "u32", 3 * n_tri));
    if (colour)
    {
        header["colour"] = {{"k", colour->k()}, {"coverage", colour->coverage()}};
        blocks.push_back(block("mean_colour", "f64", dim));
        blocks.push_back(block("colour_basis", "f64", dim * colour->k()));
    } else
    {
        header["colour"] = nullptr;
    }
    header["blocks"] = blocks;
    const std::string text = header.dump();

    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    append_value<std::uint32_t>(out, kVersion);
    append_value<std::uint64_t>(out, text.size());
    out.insert(out.end(), text.begin(), text.end());

    append_raw(out, shape.mean_shape().data(), dim);
    append_raw(out, shape.shape_basis().data(), dim * k_full);
    append_raw(out, shape.whitening().recover().data(), k_full * k_white);
    std::vector<std::uint32_t> tri;
    tri.reserve(3 * n_tri);
    for (const auto& t : shape.triangles())
    {
        for (int v : t)
        {
            tri.push_back(static_cast<std::uint32_t>(v));
        }
    }
    append_raw(out, tri.data(), tri.size());
    if (colour)
    {
        append_raw(out, colour->mean_colour().data(), dim);
        append_raw(out, colour->colour_basis().data(), dim * colour->k());
    }
    return out;
}

EarmContents decode_earm(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < kPreambleSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    {
        throw DataError("Not an EARM file (bad magic)");
    }
    std::uint32_t version = 0;
    std::uint64_t header_len = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&header_len, bytes.data() + 8, 8);
    if (version != kVersion)
    {
        throw DataError("Unsupported EARM version " + std::to_string(version));
    }
    if (kPreambleSize + header_len > bytes.size())
    {
        throw DataError("EARM header length exceeds file size");
    }
    nlohmann::json header;
    try
    {
        header = nlohmann::json::parse(bytes.begin() + kPreambleSize,
                                       bytes.begin() + static_cast<std::ptrdiff_t>(kPreambleSize + header_len));
    } catch (const nlohmann::json::exception& e)
    {
        throw DataError(std::string("Malformed EARM header: ") + e.what());
    }

    try
    {
        const std::size_t n = header.at("n_vertices").get<std::size_t>();
        const std::size_t k_full = header.at("k_full").get<std::size_t>();
        const std::size_t k_white = header.at("k_white").get<std::size_t>();
        const std::size_t n_tri = header.at("n_triangles").get<std::size_t>();
        const double coverage = header.at("coverage").get<double>();
        auto landmarks = header.at("landmark_indices").get<std::vector<int>>();
        const bool has_colour = header.contains("colour") && !header.at("colour").is_null();
        const std::size_t k_colour = has_colour ? header.at("colour").at("k").get<std::size_t>() : 0;
        const std::size_t dim = 3 * n;

        std::vector<std::pair<std::string, std::size_t>> expected = {
            {"mean_shape", dim}, {"shape_basis", dim * k_full}, {"recover_matrix", k_full * k_white},
            {"triangles", 3 * n_tri}};
        if (has_colour)
        {
            expected.emplace_back("mean_colour", dim);
            expected.emplace_back("colour_basis", dim * k_colour);
        }
        const auto& blocks = header.at("blocks");
        if (blocks.size() != expected.size())
        {
            throw DataError("EARM header lists " + std::to_string(blocks.size()) + " blocks, expected " +
                            std::to_string(expected.size()));
        }
        std::size_t payload = 0;
        for (std::size_t i = 0; i < expected.size(); ++i)
        {
            const auto name = blocks[i].at("name").get<std::string>();
            const auto count = blocks[i].at("count").get<std::size_t>();
            if (name != expected[i].first)
            {
                throw DataError("EARM block " + std::to_string(i) + " is '" + name + "', expected '" +
                                expected[i].first + "'");
            }
            if (count != expected[i].second)
            {
                throw DataError("EARM block '" + name + "' has " + std::to_string(count) + " values, expected " +
                                std::to_string(expected[i].second));
            }
            payload += count * (name == "triangles" ? sizeof(std::uint32_t) : sizeof(double));
        }
        if (kPreambleSize + header_len + payload != bytes.size())
        {
            throw DataError("EARM file size " + std::to_string(bytes.size()) + " does not match declared layout (" +
                            std::to_string(kPreambleSize + header_len + payload) + " bytes)");
        }

        Reader reader(bytes, kPreambleSize + header_len);
        Eigen::VectorXd mean(dim);
        reader.read(mean.data(), dim, "mean_shape");
        Eigen::MatrixXd basis(dim, k_full);
        reader.read(basis.data(), dim * k_full, "shape_basis");
        Eigen::MatrixXd recover(k_full, k_white);
        reader.read(recover.data(), k_full * k_white, "recover_matrix");
        std::vector<std::uint32_t> tri(3 * n_tri);
        reader.read(tri.data(), tri.size(), "triangles");
        TriangleList triangles(n_tri);
        for (std::size_t i = 0; i < n_tri; ++i)
        {
            triangles[i] = {static_cast<int>(tri[3 * i]), static_cast<int>(tri[3 * i + 1]),
                            static_cast<int>(tri[3 * i + 2])};
        }

        EarmContents contents;
        contents.shape = MorphableModel::create(std::move(mean), std::move(basis),
                                                WhiteningTransform(std::move(recover), coverage),
                                                std::move(triangles), std::move(landmarks));
        if (has_colour)
        {
            Eigen::VectorXd mean_colour(dim);
            reader.read(mean_colour.data(), dim, "mean_colour");
            Eigen::MatrixXd colour_basis(dim, k_colour);
            reader.read(colour_basis.data(), dim * k_colour, "colour_basis");
            contents.colour = ColourModel::create(std::move(mean_colour), std::move(colour_basis),
                                                  header.at("colour").at("coverage").get<double>());
        }
        return contents;
    } catch (const nlohmann::json::exception& e)
    {
        throw DataError(std::string("Malformed EARM header: ") + e.what());
    } catch (const ModelError& e)
    {
        throw DataError(std::string("Invalid model in EARM file: ") + e.what());
    } catch (const ArgumentError& e)
    {
        throw DataError(std::string("Invalid model in EARM file: ") + e.what());
    }
}

void write_earm(const std::filesystem::path& path, const MorphableModel& shape, const ColourModel* colour)
{
    const auto bytes = encode_earm(shape, colour);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw DataError("Cannot open model file for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
    {
        throw DataError("Failed writing model file: " + path.string());
    }
}

EarmContents read_earm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw DataError("Cannot open model file: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try
    {
        return decode_earm(bytes);
    } catch (const DataError& e)
    {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace model
} // namespace earfit
