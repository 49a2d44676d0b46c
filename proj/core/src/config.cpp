/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: core/src/config.cpp
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
#include "earfit/core/config.hpp"
#include "earfit/core/error.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace earfit {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_key(const std::string& key)
{
    if (key.empty())
    {
        return false;
    }
    for (const char c : key)
    {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
        {
            return false;
        }
    }
    return true;
}

} // namespace

Config parse_config(const std::string& text, const std::string& source)
{
    Config config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw DataError(source + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line))
    {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
        {
            continue;
        }
        if (t.front() == '[')
        {
            if (t.back() != ']')
            {
                fail("unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (!valid_key(section))
            {
                fail("invalid section name");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
        {
            fail("expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!valid_key(key))
        {
            fail("invalid key '" + key + "'");
        }
        if (!value.empty() && (value.front() == '"' || value.front() == '\''))
        {
            const auto close = value.find(value.front(), 1);
            if (close == std::string::npos)
            {
                fail("unterminated string");
            }
            const std::string rest = trim(value.substr(close + 1));
            if (!rest.empty() && rest[0] != '#')
            {
                fail("unexpected text after string");
            }
            value = value.substr(1, close - 1);
        } else if (const auto hash = value.find('#'); hash != std::string::npos)
        {
            value = trim(value.substr(0, hash));
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (!config.emplace(full, value).second)
        {
            fail("duplicate key '" + full + "'");
        }
    }
    return config;
}

Config read_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw DataError("Cannot open config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string format_config(const Config& config)
{
    std::string out;
    for (const auto& [key, value] : config)
    {
        out += key + " = \"" + value + "\"\n";
    }
    return out;
}

} // namespace earfit
