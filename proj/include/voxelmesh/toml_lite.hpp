// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

// ---------------------------------------------------------------------------
// Minimal TOML subset -> JSON: [table] and [a.b] headers, key = value lines,
// values are strings, integers, floats, booleans, and flat arrays. Comments
// start with '#'. Covers config files; not a general TOML implementation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string toml_trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string toml_strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline nlohmann::json toml_value(const std::string& raw, int line_no);

inline std::vector<std::string> toml_split_array(const std::string& body, int line_no) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    int depth = 0;
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (!in_string) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                items.push_back(cur);
                cur.clear();
                continue;
            }
        }
        cur += c;
    }
    if (in_string || depth != 0)
        throw Error("config line " + std::to_string(line_no) + ": malformed array");
    if (!toml_trim(cur).empty()) items.push_back(cur);
    return items;
}

inline nlohmann::json toml_value(const std::string& raw, int line_no) {
    std::string v = toml_trim(raw);
    if (v.empty()) throw Error("config line " + std::to_string(line_no) + ": missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw Error("config line " + std::to_string(line_no) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']')
            throw Error("config line " + std::to_string(line_no) + ": unterminated array");
        nlohmann::json arr = nlohmann::json::array();
        for (const std::string& item : toml_split_array(v.substr(1, v.size() - 2), line_no))
            arr.push_back(toml_value(item, line_no));
        return arr;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t pos = 0;
        if (v.find_first_of(".eE") == std::string::npos) {
            long long i = std::stoll(v, &pos);
            if (pos == v.size()) return i;
        } else {
            double d = std::stod(v, &pos);
            if (pos == v.size()) return d;
        }
    } catch (const std::exception&) {
    }
    throw Error("config line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

}  // namespace detail

inline nlohmann::json parse_toml_lite(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::size_t start = 0;
    int line_no = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string line = detail::toml_trim(
            detail::toml_strip_comment(text.substr(start, end - start)));
        start = end + 1;
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error("config line " + std::to_string(line_no) + ": malformed table");
            std::string name = detail::toml_trim(line.substr(1, line.size() - 2));
            if (name.empty())
                throw Error("config line " + std::to_string(line_no) + ": empty table name");
            table = &root;
            std::size_t p = 0;
            while (p <= name.size()) {
                std::size_t dot = name.find('.', p);
                if (dot == std::string::npos) dot = name.size();
                std::string part = detail::toml_trim(name.substr(p, dot - p));
                if (part.empty())
                    throw Error("config line " + std::to_string(line_no) + ": empty table key");
                table = &(*table)[part];
                p = dot + 1;
            }
            if (!table->is_object() && !table->is_null())
                throw Error("config line " + std::to_string(line_no) + ": table redefines key");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::toml_trim(line.substr(0, eq));
        if (key.empty())
            throw Error("config line " + std::to_string(line_no) + ": empty key");
        if (table->contains(key))
            throw Error("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
        (*table)[key] = detail::toml_value(line.substr(eq + 1), line_no);
    }
    return root;
}

}  // namespace voxelmesh
