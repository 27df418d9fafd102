// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

/// Cubic regular grid over an axis-aligned box. Voxel size is uniform per axis.
struct GridSpec {
    int resolution = 64;
    Aabbf bounds{{-0.5f, -0.5f, -0.5f}, {0.5f, 0.5f, 0.5f}};

    GridSpec() = default;
    GridSpec(int res, const Aabbf& b) : resolution(res), bounds(b) { validate(); }

    void validate() const {
        if (resolution < 2) throw Error("GridSpec: resolution must be >= 2");
        Vec3f e = bounds.extent();
        if (e.x <= 0 || e.y <= 0 || e.z <= 0)
            throw Error("GridSpec: bounds min must be < max on every axis");
        float vx = e.x / resolution, vy = e.y / resolution, vz = e.z / resolution;
        float v = vx;
        if (std::abs(vy - v) > 1e-6f * v || std::abs(vz - v) > 1e-6f * v)
            throw Error("GridSpec: voxel size must be uniform per axis");
    }

    float voxel_size() const { return bounds.extent().x / resolution; }

    /// World position of a voxel center.
    Vec3f voxel_center(int i, int j, int k) const {
        float s = voxel_size();
        return {bounds.min.x + (i + 0.5f) * s, bounds.min.y + (j + 0.5f) * s,
                bounds.min.z + (k + 0.5f) * s};
    }

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(resolution) * resolution * resolution;
    }

    /// Linear index, x-fastest.
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(k) * resolution * resolution +
               static_cast<std::size_t>(j) * resolution + i;
    }

    bool operator==(const GridSpec& o) const {
        return resolution == o.resolution && bounds.min == o.bounds.min &&
               bounds.max == o.bounds.max;
    }
};

/// Scalar field sampled at voxel centers (SDF in world units, or occupancy in {0,1}).
struct DenseVolume {
    GridSpec spec;
    std::vector<float> values;  // x-fastest

    DenseVolume() = default;
    explicit DenseVolume(const GridSpec& s, float fill = 0.0f)
        : spec(s), values(s.voxel_count(), fill) {
        spec.validate();
    }

    float& at(int i, int j, int k) { return values[spec.index(i, j, k)]; }
    float at(int i, int j, int k) const { return values[spec.index(i, j, k)]; }

    void check_finite() const {
        for (float v : values)
            if (!std::isfinite(v)) throw NumericError("DenseVolume: non-finite value");
    }

    bool is_binary() const {
        for (float v : values)
            if (v != 0.0f && v != 1.0f) return false;
        return true;
    }

    /// Trilinear interpolation on the voxel-center lattice. Clamps to the
    /// outermost centers at the boundary.
    float sample(const Vec3f& p) const {
        if (!spec.bounds.contains(p)) throw Error("DenseVolume::sample: point out of bounds");
        float s = spec.voxel_size();
        float fx = (p.x - spec.bounds.min.x) / s - 0.5f;
        float fy = (p.y - spec.bounds.min.y) / s - 0.5f;
        float fz = (p.z - spec.bounds.min.z) / s - 0.5f;
        int n = spec.resolution;
        auto clampi = [n](int i) { return std::clamp(i, 0, n - 1); };
        int i0 = static_cast<int>(std::floor(fx));
        int j0 = static_cast<int>(std::floor(fy));
        int k0 = static_cast<int>(std::floor(fz));
        float tx = std::clamp(fx - i0, 0.0f, 1.0f);
        float ty = std::clamp(fy - j0, 0.0f, 1.0f);
        float tz = std::clamp(fz - k0, 0.0f, 1.0f);
        float acc = 0.0f;
        for (int dk = 0; dk < 2; ++dk)
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di) {
                    float w = (di ? tx : 1 - tx) * (dj ? ty : 1 - ty) * (dk ? tz : 1 - tz);
                    acc += w * at(clampi(i0 + di), clampi(j0 + dj), clampi(k0 + dk));
                }
        return acc;
    }
};

/// Sparse voxel grid: sorted unique integer coords, fixed-width feature per voxel.
/// Features live on the voxel-corner lattice used by trilinear_sample: the
/// feature of coord (i,j,k) is attached to corner position bounds.min + (i,j,k)*voxel_size.
struct SparseVoxelGrid {
    GridSpec spec;
    std::vector<Vec3i> coords;    // sorted lexicographically (z, y, x) ascending
    std::vector<float> features;  // coords.size() * channels
    int channels = 0;

    static bool coord_less(const Vec3i& a, const Vec3i& b) {
        if (a.z != b.z) return a.z < b.z;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    }

    void validate() const {
        spec.validate();
        if (features.size() != coords.size() * static_cast<std::size_t>(channels))
            throw Error("SparseVoxelGrid: feature count mismatch");
        for (std::size_t i = 0; i < coords.size(); ++i) {
            const Vec3i& c = coords[i];
            if (c.x < 0 || c.y < 0 || c.z < 0 || c.x >= spec.resolution ||
                c.y >= spec.resolution || c.z >= spec.resolution)
                throw Error("SparseVoxelGrid: coord out of range");
            if (i > 0 && !coord_less(coords[i - 1], c))
                throw Error("SparseVoxelGrid: coords must be sorted and unique");
        }
    }

    std::size_t size() const { return coords.size(); }

    const float* feature(std::size_t i) const { return features.data() + i * channels; }
    float* feature(std::size_t i) { return features.data() + i * channels; }

    /// Index of a coord, or -1 when absent.
    std::ptrdiff_t find(const Vec3i& c) const {
        auto it = std::lower_bound(coords.begin(), coords.end(), c, coord_less);
        if (it == coords.end() || !(*it == c)) return -1;
        return it - coords.begin();
    }
};

/// occupancy(x) = 1 iff |sdf(x)| <= band.
inline DenseVolume occupancy_from_sdf(const DenseVolume& sdf, float band) {
    if (band <= 0.0f) throw Error("occupancy_from_sdf: band must be > 0");
    sdf.check_finite();
    DenseVolume occ(sdf.spec);
    for (std::size_t i = 0; i < sdf.values.size(); ++i)
        occ.values[i] = std::abs(sdf.values[i]) <= band ? 1.0f : 0.0f;
    return occ;
}

/// Subdivides each occupied coarse voxel into factor^3 fine voxels. All
/// features are initialized to the given shared token (or zeros).
inline SparseVoxelGrid subdivide_occupied(const DenseVolume& occ, int factor, int channels,
                                          const std::vector<float>& token = {}) {
    if (factor < 2) throw Error("subdivide_occupied: factor must be >= 2");
    if (!occ.is_binary()) throw Error("subdivide_occupied: volume is not binary");
    if (!token.empty() && static_cast<int>(token.size()) != channels)
        throw Error("subdivide_occupied: token width != channels");
    long fine_res = static_cast<long>(occ.spec.resolution) * factor;
    if (fine_res > (1L << 30)) throw Error("subdivide_occupied: coordinate range overflow");

    SparseVoxelGrid out;
    out.spec = GridSpec(static_cast<int>(fine_res), occ.spec.bounds);
    out.channels = channels;
    int n = occ.spec.resolution;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (occ.at(i, j, k) == 0.0f) continue;
                for (int dk = 0; dk < factor; ++dk)
                    for (int dj = 0; dj < factor; ++dj)
                        for (int di = 0; di < factor; ++di)
                            out.coords.push_back(
                                {i * factor + di, j * factor + dj, k * factor + dk});
            }
    std::sort(out.coords.begin(), out.coords.end(), SparseVoxelGrid::coord_less);
    out.features.resize(out.coords.size() * channels, 0.0f);
    if (!token.empty())
        for (std::size_t v = 0; v < out.coords.size(); ++v)
            std::copy(token.begin(), token.end(), out.feature(v));
    return out;
}

struct SparseSample {
    std::vector<float> feature;
    bool missing_corner = false;  // some enclosing corner was absent (treated as zero)
};

/// Trilinear interpolation of sparse corner-lattice features at a world point.
/// Missing corners contribute zero and set the flag.
inline SparseSample trilinear_sample(const SparseVoxelGrid& grid, const Vec3f& p) {
    if (!grid.spec.bounds.contains(p))
        throw Error("trilinear_sample: point out of bounds");
    float s = grid.spec.voxel_size();
    float fx = (p.x - grid.spec.bounds.min.x) / s;
    float fy = (p.y - grid.spec.bounds.min.y) / s;
    float fz = (p.z - grid.spec.bounds.min.z) / s;
    int maxc = grid.spec.resolution - 1;
    int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, maxc - 1);
    int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, maxc - 1);
    int k0 = std::clamp(static_cast<int>(std::floor(fz)), 0, maxc - 1);
    float tx = std::clamp(fx - i0, 0.0f, 1.0f);
    float ty = std::clamp(fy - j0, 0.0f, 1.0f);
    float tz = std::clamp(fz - k0, 0.0f, 1.0f);

    SparseSample out;
    out.feature.assign(grid.channels, 0.0f);
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                float w = (di ? tx : 1 - tx) * (dj ? ty : 1 - ty) * (dk ? tz : 1 - tz);
                std::ptrdiff_t idx = grid.find({i0 + di, j0 + dj, k0 + dk});
                if (idx < 0) {
                    out.missing_corner = true;
                    continue;
                }
                const float* f = grid.feature(idx);
                for (int c = 0; c < grid.channels; ++c) out.feature[c] += w * f[c];
            }
    return out;
}

// ---------------------------------------------------------------------------
// VXM1 binary volume file.
// magic "VXM1", resolution (3 x u32 LE), bounds (6 x f32), dtype tag
// (u8: 0 = f32 scalar, 1 = u8 binary, 2 = f32 feature; tag 2 is followed by
// channel count u32), then raw values in x-fastest order. Sparse grids
// serialize coords (u32 triplets) then features; a u64 voxel count precedes
// the coords.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error("volume file: unexpected end of file");
    return v;
}

inline void write_vxm_header(std::ostream& os, const GridSpec& spec, uint8_t dtype) {
    os.write("VXM1", 4);
    for (int a = 0; a < 3; ++a) write_pod<uint32_t>(os, static_cast<uint32_t>(spec.resolution));
    write_pod<float>(os, spec.bounds.min.x);
    write_pod<float>(os, spec.bounds.min.y);
    write_pod<float>(os, spec.bounds.min.z);
    write_pod<float>(os, spec.bounds.max.x);
    write_pod<float>(os, spec.bounds.max.y);
    write_pod<float>(os, spec.bounds.max.z);
    write_pod<uint8_t>(os, dtype);
}

inline GridSpec read_vxm_header(std::istream& is, uint8_t& dtype) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "VXM1", 4) != 0)
        throw Error("volume file: bad magic (expected VXM1)");
    uint32_t rx = read_pod<uint32_t>(is);
    uint32_t ry = read_pod<uint32_t>(is);
    uint32_t rz = read_pod<uint32_t>(is);
    if (rx != ry || ry != rz) throw Error("volume file: non-cubic resolution");
    Aabbf b;
    b.min.x = read_pod<float>(is); b.min.y = read_pod<float>(is); b.min.z = read_pod<float>(is);
    b.max.x = read_pod<float>(is); b.max.y = read_pod<float>(is); b.max.z = read_pod<float>(is);
    dtype = read_pod<uint8_t>(is);
    return GridSpec(static_cast<int>(rx), b);
}

}  // namespace detail

inline void save_volume(const DenseVolume& vol, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_volume: cannot open " + path);
    bool binary = vol.is_binary();
    detail::write_vxm_header(os, vol.spec, binary ? 1 : 0);
    if (binary) {
        for (float v : vol.values) detail::write_pod<uint8_t>(os, v != 0.0f ? 1 : 0);
    } else {
        os.write(reinterpret_cast<const char*>(vol.values.data()),
                 static_cast<std::streamsize>(vol.values.size() * sizeof(float)));
    }
    if (!os) throw Error("save_volume: write failed for " + path);
}

inline DenseVolume load_volume(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("load_volume: cannot open " + path);
    uint8_t dtype;
    GridSpec spec = detail::read_vxm_header(is, dtype);
    if (dtype == 2) throw Error("load_volume: file holds a sparse feature grid");
    DenseVolume vol(spec);
    if (dtype == 1) {
        for (auto& v : vol.values) v = detail::read_pod<uint8_t>(is) ? 1.0f : 0.0f;
    } else if (dtype == 0) {
        is.read(reinterpret_cast<char*>(vol.values.data()),
                static_cast<std::streamsize>(vol.values.size() * sizeof(float)));
        if (!is) throw Error("load_volume: truncated value payload");
    } else {
        throw Error("load_volume: unknown dtype tag");
    }
    return vol;
}

inline void save_sparse_grid(const SparseVoxelGrid& grid, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_sparse_grid: cannot open " + path);
    detail::write_vxm_header(os, grid.spec, 2);
    detail::write_pod<uint32_t>(os, static_cast<uint32_t>(grid.channels));
    detail::write_pod<uint64_t>(os, static_cast<uint64_t>(grid.coords.size()));
    for (const Vec3i& c : grid.coords) {
        detail::write_pod<uint32_t>(os, static_cast<uint32_t>(c.x));
        detail::write_pod<uint32_t>(os, static_cast<uint32_t>(c.y));
        detail::write_pod<uint32_t>(os, static_cast<uint32_t>(c.z));
    }
    os.write(reinterpret_cast<const char*>(grid.features.data()),
             static_cast<std::streamsize>(grid.features.size() * sizeof(float)));
    if (!os) throw Error("save_sparse_grid: write failed for " + path);
}

inline SparseVoxelGrid load_sparse_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("load_sparse_grid: cannot open " + path);
    uint8_t dtype;
    GridSpec spec = detail::read_vxm_header(is, dtype);
    if (dtype != 2) throw Error("load_sparse_grid: file is not a sparse feature grid");
    SparseVoxelGrid grid;
    grid.spec = spec;
    grid.channels = static_cast<int>(detail::read_pod<uint32_t>(is));
    uint64_t count = detail::read_pod<uint64_t>(is);
    grid.coords.resize(count);
    for (auto& c : grid.coords) {
        c.x = static_cast<int>(detail::read_pod<uint32_t>(is));
        c.y = static_cast<int>(detail::read_pod<uint32_t>(is));
        c.z = static_cast<int>(detail::read_pod<uint32_t>(is));
    }
    grid.features.resize(count * grid.channels);
    is.read(reinterpret_cast<char*>(grid.features.data()),
            static_cast<std::streamsize>(grid.features.size() * sizeof(float)));
    if (!is) throw Error("load_sparse_grid: truncated feature payload");
    grid.validate();
    return grid;
}

}  // namespace voxelmesh
