// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelmesh/math.hpp"
#include "voxelmesh/mesh.hpp"
#include "voxelmesh/volume.hpp"

namespace voxelmesh {

/// Crossing position of the iso level on a segment with opposite-sign SDF
/// endpoints, plus its derivatives with respect to the two SDF values.
/// t = a / (a - b), pos = pa + t (pb - pa).
template <typename T>
struct EdgeCrossing {
    Vec3<T> pos;
    Vec3<T> d_pos_da;
    Vec3<T> d_pos_db;
};

template <typename T>
inline EdgeCrossing<T> edge_vertex(T sdf_a, T sdf_b, const Vec3<T>& pos_a, const Vec3<T>& pos_b) {
    if (!(sdf_a * sdf_b < T(0)))
        throw Error("edge_vertex: endpoint SDF values must have opposite signs");
    T denom = sdf_a - sdf_b;
    T t = sdf_a / denom;
    Vec3<T> dir = pos_b - pos_a;
    EdgeCrossing<T> out;
    out.pos = pos_a + dir * t;
    out.d_pos_da = dir * (-sdf_b / (denom * denom));
    out.d_pos_db = dir * (sdf_a / (denom * denom));
    return out;
}

/// Per-vertex extraction record: the sign-changing lattice edges whose
/// crossings average to the vertex. Endpoint indices point into the SDF
/// value array, so vertex positions can be recomputed from perturbed values.
struct VertexTopology {
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (index a, index b)
};

struct ExtractResult {
    TriMesh mesh;
    std::vector<VertexTopology> topology;  // one entry per final mesh vertex
    GridSpec spec;
    float iso = 0.0f;
};

namespace detail {

/// Lattice node world position: SDF samples live at voxel centers.
inline Vec3f lattice_pos(const GridSpec& spec, std::size_t linear) {
    int n = spec.resolution;
    int i = static_cast<int>(linear % n);
    int j = static_cast<int>((linear / n) % n);
    int k = static_cast<int>(linear / (static_cast<std::size_t>(n) * n));
    return spec.voxel_center(i, j, k);
}

}  // namespace detail

/// Recomputes vertex positions from (possibly perturbed) SDF values with the
/// extraction topology held fixed. Usable with Dual scalars for derivatives.
template <typename T>
inline std::vector<Vec3<T>> recompute_vertices(const ExtractResult& ex,
                                               const std::vector<T>& values, T iso) {
    std::vector<Vec3<T>> out(ex.topology.size());
    for (std::size_t v = 0; v < ex.topology.size(); ++v) {
        Vec3<T> acc{};
        for (const auto& [ia, ib] : ex.topology[v].edges) {
            Vec3f fa = detail::lattice_pos(ex.spec, ia);
            Vec3f fb = detail::lattice_pos(ex.spec, ib);
            Vec3<T> pa{T(fa.x), T(fa.y), T(fa.z)};
            Vec3<T> pb{T(fb.x), T(fb.y), T(fb.z)};
            acc += edge_vertex<T>(values[ia] - iso, values[ib] - iso, pa, pb).pos;
        }
        T inv = T(1) / T(static_cast<double>(ex.topology[v].edges.size()));
        out[v] = acc * inv;
    }
    return out;
}

/// Naive Surface Nets dual contouring: one vertex per sign-changing cell at
/// the mean of its edge crossings, one quad per interior sign-changing
/// lattice edge, quads split along the shorter diagonal. SDF values exactly
/// at the iso level are nudged by +1e-8 before extraction.
inline ExtractResult extract_mesh_with_topology(const DenseVolume& sdf, float iso = 0.0f) {
    sdf.check_finite();
    const GridSpec& spec = sdf.spec;
    int n = spec.resolution;
    int nc = n - 1;  // cell lattice resolution

    std::vector<float> vals = sdf.values;
    for (auto& v : vals)
        if (v == iso) v = iso + 1e-8f;

    auto node = [&](int i, int j, int k) { return spec.index(i, j, k); };

    ExtractResult ex;
    ex.spec = spec;
    ex.iso = iso;

    // Pass 1: one vertex per cell with a sign change among its 12 edges.
    std::vector<int> cell_vertex(static_cast<std::size_t>(nc) * nc * nc, -1);
    auto cell_index = [nc](int i, int j, int k) {
        return (static_cast<std::size_t>(k) * nc + j) * nc + i;
    };
    static const int edge_corners[12][2][3] = {
        {{0, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {1, 1, 0}}, {{0, 0, 1}, {1, 0, 1}},
        {{0, 1, 1}, {1, 1, 1}}, {{0, 0, 0}, {0, 1, 0}}, {{1, 0, 0}, {1, 1, 0}},
        {{0, 0, 1}, {0, 1, 1}}, {{1, 0, 1}, {1, 1, 1}}, {{0, 0, 0}, {0, 0, 1}},
        {{1, 0, 0}, {1, 0, 1}}, {{0, 1, 0}, {0, 1, 1}}, {{1, 1, 0}, {1, 1, 1}}};

    for (int k = 0; k < nc; ++k)
        for (int j = 0; j < nc; ++j)
            for (int i = 0; i < nc; ++i) {
                VertexTopology topo;
                Vec3d acc{};
                for (const auto& e : edge_corners) {
                    std::size_t ia = node(i + e[0][0], j + e[0][1], k + e[0][2]);
                    std::size_t ib = node(i + e[1][0], j + e[1][1], k + e[1][2]);
                    float a = vals[ia] - iso, b = vals[ib] - iso;
                    if (a * b >= 0) continue;
                    topo.edges.emplace_back(ia, ib);
                    acc += edge_vertex<double>(a, b, detail::lattice_pos(spec, ia).cast<double>(),
                                               detail::lattice_pos(spec, ib).cast<double>())
                               .pos;
                }
                if (topo.edges.empty()) continue;
                cell_vertex[cell_index(i, j, k)] = static_cast<int>(ex.mesh.vertices.size());
                ex.mesh.vertices.push_back((acc / double(topo.edges.size())).cast<float>());
                ex.topology.push_back(std::move(topo));
            }

    // Pass 2: one quad per interior sign-changing lattice edge, wound so
    // faces point from negative (inside) toward positive.
    auto emit_quad = [&](int v0, int v1, int v2, int v3, bool flip) {
        if (v0 < 0 || v1 < 0 || v2 < 0 || v3 < 0) return;
        if (flip) std::swap(v1, v3);
        // split along the shorter diagonal
        float d02 = norm2(ex.mesh.vertices[v0] - ex.mesh.vertices[v2]);
        float d13 = norm2(ex.mesh.vertices[v1] - ex.mesh.vertices[v3]);
        if (d02 <= d13) {
            ex.mesh.faces.push_back({v0, v1, v2});
            ex.mesh.faces.push_back({v0, v2, v3});
        } else {
            ex.mesh.faces.push_back({v1, v2, v3});
            ex.mesh.faces.push_back({v1, v3, v0});
        }
    };

    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                float a = vals[node(i, j, k)] - iso;
                // +x edge
                if (i + 1 < n && j > 0 && j < nc && k > 0 && k < nc) {
                    float b = vals[node(i + 1, j, k)] - iso;
                    if (a * b < 0)
                        emit_quad(cell_vertex[cell_index(i, j - 1, k - 1)],
                                  cell_vertex[cell_index(i, j, k - 1)],
                                  cell_vertex[cell_index(i, j, k)],
                                  cell_vertex[cell_index(i, j - 1, k)], a > 0);
                }
                // +y edge
                if (j + 1 < n && i > 0 && i < nc && k > 0 && k < nc) {
                    float b = vals[node(i, j + 1, k)] - iso;
                    if (a * b < 0)
                        emit_quad(cell_vertex[cell_index(i - 1, j, k - 1)],
                                  cell_vertex[cell_index(i - 1, j, k)],
                                  cell_vertex[cell_index(i, j, k)],
                                  cell_vertex[cell_index(i, j, k - 1)], a > 0);
                }
                // +z edge
                if (k + 1 < n && i > 0 && i < nc && j > 0 && j < nc) {
                    float b = vals[node(i, j, k + 1)] - iso;
                    if (a * b < 0)
                        emit_quad(cell_vertex[cell_index(i - 1, j - 1, k)],
                                  cell_vertex[cell_index(i, j - 1, k)],
                                  cell_vertex[cell_index(i, j, k)],
                                  cell_vertex[cell_index(i - 1, j, k)], a > 0);
                }
            }

    // Cleanup: drop degenerate and duplicate faces, then unreferenced vertices.
    std::vector<std::array<int, 3>> kept;
    std::vector<std::array<int, 3>> seen;
    kept.reserve(ex.mesh.faces.size());
    for (const auto& f : ex.mesh.faces) {
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
        Vec3f a = ex.mesh.vertices[f[0]], b = ex.mesh.vertices[f[1]], c = ex.mesh.vertices[f[2]];
        if (norm2(cross(b - a, c - a)) <= 0.0f) continue;
        std::array<int, 3> key = f;
        std::sort(key.begin(), key.end());
        seen.push_back(key);
        kept.push_back(f);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        // rare: remove duplicates while preserving first occurrence
        std::vector<std::array<int, 3>> uniq;
        std::vector<std::array<int, 3>> marker;
        for (const auto& f : kept) {
            std::array<int, 3> key = f;
            std::sort(key.begin(), key.end());
            if (std::find(marker.begin(), marker.end(), key) == marker.end()) {
                marker.push_back(key);
                uniq.push_back(f);
            }
        }
        kept = std::move(uniq);
    }
    ex.mesh.faces = std::move(kept);

    std::vector<int> remap(ex.mesh.vertices.size(), -1);
    std::vector<Vec3f> new_verts;
    std::vector<VertexTopology> new_topo;
    for (auto& f : ex.mesh.faces)
        for (int& idx : f) {
            if (remap[idx] < 0) {
                remap[idx] = static_cast<int>(new_verts.size());
                new_verts.push_back(ex.mesh.vertices[idx]);
                new_topo.push_back(std::move(ex.topology[idx]));
            }
            idx = remap[idx];
        }
    ex.mesh.vertices = std::move(new_verts);
    ex.topology = std::move(new_topo);
    return ex;
}

inline TriMesh extract_mesh(const DenseVolume& sdf, float iso = 0.0f) {
    return extract_mesh_with_topology(sdf, iso).mesh;
}

}  // namespace voxelmesh
