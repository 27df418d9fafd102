// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

/// One UNet level: grid resolution and channel width.
struct UNetLevel {
    int resolution = 0;
    int channels = 0;
    bool operator==(const UNetLevel&) const = default;
};

struct EncoderConfig {
    int stride = 4;    // total downsampling factor (two stride-2 stages)
    int channels = 8;  // feature channels per stream
    bool operator==(const EncoderConfig&) const = default;
};

/// Network dimensions for the two UNet+transformer stages and the MLP heads.
struct ArchConfig {
    std::string name = "toy";
    EncoderConfig encoder;

    std::vector<UNetLevel> dense_levels;  // coarse occupancy stage
    int dense_transformer_layers = 0;
    int dense_transformer_width = 0;

    std::vector<UNetLevel> sparse_levels;  // sparse feature stage
    int sparse_transformer_layers = 0;
    int sparse_transformer_width = 0;
    int sparse_out_channels = 0;  // feature width fed to the MLP heads

    int head_hidden = 16;  // hidden width of the three MLP heads
    int attention_heads = 1;

    void validate() const {
        if (dense_levels.empty() || sparse_levels.empty())
            throw Error("ArchConfig: levels must be non-empty");
        for (std::size_t l = 1; l < dense_levels.size(); ++l) {
            int a = dense_levels[l - 1].resolution, b = dense_levels[l].resolution;
            if (b != a && b * 2 != a)
                throw Error("ArchConfig: dense level resolutions must halve or repeat");
        }
        for (std::size_t l = 1; l < sparse_levels.size(); ++l) {
            int a = sparse_levels[l - 1].resolution, b = sparse_levels[l].resolution;
            if (b != a && b * 2 != a)
                throw Error("ArchConfig: sparse level resolutions must halve or repeat");
        }
        if (attention_heads < 1) throw Error("ArchConfig: attention_heads must be >= 1");
    }

    /// Dimensions matching the full-scale model.
    static ArchConfig paper() {
        ArchConfig c;
        c.name = "paper";
        c.encoder = {8, 64};  // fixture stand-in for the 2D feature extractor
        c.dense_levels = {{64, 64}, {32, 128}, {16, 256}, {16, 512}};
        c.dense_transformer_layers = 6;
        c.dense_transformer_width = 512;
        c.sparse_levels = {{256, 16}, {128, 32}, {64, 64}, {32, 128}, {16, 512}, {16, 2048}};
        c.sparse_transformer_layers = 16;
        c.sparse_transformer_width = 1024;
        c.sparse_out_channels = 32;
        c.head_hidden = 64;
        return c;
    }

    /// Desk-scale preset used by tests and the default pipeline.
    static ArchConfig toy() {
        ArchConfig c;
        c.name = "toy";
        c.encoder = {4, 8};
        c.dense_levels = {{16, 8}, {8, 16}};
        c.dense_transformer_layers = 2;
        c.dense_transformer_width = 16;
        c.sparse_levels = {{32, 8}, {16, 16}, {8, 32}};
        c.sparse_transformer_layers = 2;
        c.sparse_transformer_width = 32;
        c.sparse_out_channels = 8;
        c.head_hidden = 16;
        return c;
    }

    static ArchConfig preset(const std::string& name) {
        if (name == "paper") return paper();
        if (name == "toy") return toy();
        throw Error("ArchConfig: unknown preset '" + name + "'");
    }

    int coarse_resolution() const { return dense_levels.front().resolution; }
    int sparse_resolution() const { return sparse_levels.front().resolution; }
    int subdivision_factor() const { return sparse_resolution() / coarse_resolution(); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["encoder"] = {{"stride", encoder.stride}, {"channels", encoder.channels}};
        auto levels = [](const std::vector<UNetLevel>& ls) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& l : ls) a.push_back({{"resolution", l.resolution},
                                                  {"channels", l.channels}});
            return a;
        };
        j["dense"] = {{"levels", levels(dense_levels)},
                      {"transformer_layers", dense_transformer_layers},
                      {"transformer_width", dense_transformer_width}};
        j["sparse"] = {{"levels", levels(sparse_levels)},
                       {"transformer_layers", sparse_transformer_layers},
                       {"transformer_width", sparse_transformer_width},
                       {"out_channels", sparse_out_channels}};
        j["head_hidden"] = head_hidden;
        j["attention_heads"] = attention_heads;
        return j;
    }

    static ArchConfig from_json(const nlohmann::json& j) {
        ArchConfig c;
        c.name = j.at("name").get<std::string>();
        c.encoder.stride = j.at("encoder").at("stride").get<int>();
        c.encoder.channels = j.at("encoder").at("channels").get<int>();
        auto levels = [](const nlohmann::json& a) {
            std::vector<UNetLevel> ls;
            for (const auto& e : a)
                ls.push_back({e.at("resolution").get<int>(), e.at("channels").get<int>()});
            return ls;
        };
        c.dense_levels = levels(j.at("dense").at("levels"));
        c.dense_transformer_layers = j.at("dense").at("transformer_layers").get<int>();
        c.dense_transformer_width = j.at("dense").at("transformer_width").get<int>();
        c.sparse_levels = levels(j.at("sparse").at("levels"));
        c.sparse_transformer_layers = j.at("sparse").at("transformer_layers").get<int>();
        c.sparse_transformer_width = j.at("sparse").at("transformer_width").get<int>();
        c.sparse_out_channels = j.at("sparse").at("out_channels").get<int>();
        c.head_hidden = j.at("head_hidden").get<int>();
        c.attention_heads = j.at("attention_heads").get<int>();
        c.validate();
        return c;
    }

    /// FNV-1a over the canonical JSON form.
    uint64_t hash() const {
        std::string s = to_json().dump();
        uint64_t h = 14695981039346656037ull;
        for (char ch : s) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace voxelmesh
