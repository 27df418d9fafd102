// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    std::size_t size() const { return data.size(); }
    static std::size_t shape_size(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }
};

/// All network parameters, keyed by layer path. Parameters are created
/// deterministically from (seed, path): the creation order does not matter,
/// so the same seed yields bit-identical weights.
class WeightStore {
public:
    explicit WeightStore(uint64_t seed = 0) : seed_(seed) {}

    uint64_t seed() const { return seed_; }

    /// Weight tensor for a layer path, created on first use. Paths ending in
    /// ".bias" initialize to zero; everything else draws N(0, 1/sqrt(fan_in))
    /// where fan_in is the product of all shape dims but the first.
    const Tensor& get(const std::string& path, const std::vector<int>& shape) {
        auto it = entries_.find(path);
        if (it != entries_.end()) {
            if (it->second.shape != shape)
                throw Error("WeightStore: shape mismatch for " + path);
            return it->second;
        }
        Tensor t;
        t.shape = shape;
        t.data.resize(Tensor::shape_size(shape));
        bool is_bias = path.size() >= 5 && path.substr(path.size() - 5) == ".bias";
        if (!is_bias) {
            std::size_t fan_in = 1;
            for (std::size_t d = 1; d < shape.size(); ++d) fan_in *= shape[d];
            if (shape.size() == 1) fan_in = shape[0];
            float sigma = 1.0f / std::sqrt(static_cast<float>(fan_in));
            std::mt19937_64 rng(path_seed(path));
            std::normal_distribution<float> dist(0.0f, sigma);
            for (auto& v : t.data) v = dist(rng);
        }
        return entries_.emplace(path, std::move(t)).first->second;
    }

    bool contains(const std::string& path) const { return entries_.count(path) > 0; }
    std::size_t entry_count() const { return entries_.size(); }

    /// Replaces an entry (used by tests to pin exact values, e.g. identity
    /// projections).
    void set(const std::string& path, Tensor t) { entries_[path] = std::move(t); }

    const std::map<std::string, Tensor>& entries() const { return entries_; }

    // MFW1 file: magic, config hash (u64), entry count (u64), then per layer
    // path (u32 length + bytes), rank (u32), dims (u32 each), f32 data.
    void save(const std::string& path, uint64_t config_hash) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("WeightStore::save: cannot open " + path);
        os.write("MFW1", 4);
        write_u64(os, config_hash);
        write_u64(os, seed_);
        write_u64(os, entries_.size());
        for (const auto& [name, t] : entries_) {
            write_u32(os, static_cast<uint32_t>(name.size()));
            os.write(name.data(), static_cast<std::streamsize>(name.size()));
            write_u32(os, static_cast<uint32_t>(t.shape.size()));
            for (int d : t.shape) write_u32(os, static_cast<uint32_t>(d));
            os.write(reinterpret_cast<const char*>(t.data.data()),
                     static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        }
        if (!os) throw Error("WeightStore::save: write failed for " + path);
    }

    static WeightStore load(const std::string& path, uint64_t* config_hash = nullptr) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw Error("WeightStore::load: cannot open " + path);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, "MFW1", 4) != 0)
            throw Error("WeightStore::load: bad magic (expected MFW1)");
        uint64_t hash = read_u64(is);
        if (config_hash) *config_hash = hash;
        WeightStore ws(read_u64(is));
        uint64_t count = read_u64(is);
        for (uint64_t i = 0; i < count; ++i) {
            uint32_t len = read_u32(is);
            std::string name(len, '\0');
            is.read(name.data(), len);
            Tensor t;
            uint32_t rank = read_u32(is);
            t.shape.resize(rank);
            for (auto& d : t.shape) d = static_cast<int>(read_u32(is));
            t.data.resize(Tensor::shape_size(t.shape));
            is.read(reinterpret_cast<char*>(t.data.data()),
                    static_cast<std::streamsize>(t.data.size() * sizeof(float)));
            if (!is) throw Error("WeightStore::load: truncated file");
            ws.entries_[name] = std::move(t);
        }
        return ws;
    }

private:
    uint64_t path_seed(const std::string& path) const {
        // FNV-1a over the path, mixed with the store seed
        uint64_t h = 14695981039346656037ull ^ seed_;
        for (char c : path) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= seed_ * 0x9e3779b97f4a7c15ull;
        return h;
    }

    static void write_u32(std::ostream& os, uint32_t v) {
        os.write(reinterpret_cast<const char*>(&v), 4);
    }
    static void write_u64(std::ostream& os, uint64_t v) {
        os.write(reinterpret_cast<const char*>(&v), 8);
    }
    static uint32_t read_u32(std::istream& is) {
        uint32_t v;
        is.read(reinterpret_cast<char*>(&v), 4);
        if (!is) throw Error("WeightStore: unexpected end of file");
        return v;
    }
    static uint64_t read_u64(std::istream& is) {
        uint64_t v;
        is.read(reinterpret_cast<char*>(&v), 8);
        if (!is) throw Error("WeightStore: unexpected end of file");
        return v;
    }

    uint64_t seed_;
    std::map<std::string, Tensor> entries_;
};

}  // namespace voxelmesh
