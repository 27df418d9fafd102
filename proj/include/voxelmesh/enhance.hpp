// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "voxelmesh/math.hpp"
#include "voxelmesh/mesh.hpp"

namespace voxelmesh {

struct EnhanceParams {
    float alpha = 1.0f;  // position fidelity weight
    float beta = 4.0f;   // normal alignment weight
    int iterations = 50;
    float step_size = 0.1f;
    float max_displacement = 0.0f;  // per-vertex cap in world units; 0 disables

    void validate() const {
        if (alpha < 0 || beta < 0) throw Error("EnhanceParams: weights must be non-negative");
        if (alpha == 0 && beta == 0) throw Error("EnhanceParams: alpha and beta cannot both be 0");
        if (iterations < 1) throw Error("EnhanceParams: iterations must be >= 1");
        if (step_size <= 0) throw Error("EnhanceParams: step size must be positive");
    }
};

/// Fraction of vertices whose geometric normal is within each angle
/// threshold of the target normal.
struct NormalConsistencyReport {
    static constexpr std::array<double, 5> thresholds_deg = {1, 2, 5, 10, 15};
    std::array<double, 5> fractions{};
    int excluded = 0;  // vertices with zero geometric normal

    double fraction_at(double deg) const {
        for (std::size_t i = 0; i < thresholds_deg.size(); ++i)
            if (thresholds_deg[i] == deg) return fractions[i];
        throw Error("NormalConsistencyReport: unknown threshold");
    }
};

/// Angle error between area-weighted geometric vertex normals and the
/// target normals, reported as per-threshold fractions.
inline NormalConsistencyReport normal_consistency(const TriMesh& mesh,
                                                  const std::vector<Vec3f>& targets) {
    if (targets.size() != mesh.vertices.size())
        throw Error("normal_consistency: target count != vertex count");
    VertexNormalResult vn = vertex_normals(mesh);
    NormalConsistencyReport report;
    std::size_t counted = 0;
    std::array<std::size_t, 5> hits{};
    for (std::size_t v = 0; v < targets.size(); ++v) {
        if (norm(vn.normals[v]) < 0.5f) {
            ++report.excluded;
            continue;
        }
        ++counted;
        double d = std::clamp(static_cast<double>(dot(vn.normals[v], normalized(targets[v]))),
                              -1.0, 1.0);
        double angle = rad_to_deg(std::acos(d));
        for (std::size_t t = 0; t < hits.size(); ++t)
            if (angle < NormalConsistencyReport::thresholds_deg[t]) ++hits[t];
    }
    for (std::size_t t = 0; t < hits.size(); ++t)
        report.fractions[t] = counted ? static_cast<double>(hits[t]) / counted : 0.0;
    return report;
}

namespace detail {

/// E = alpha * sum_i ||v_i - v_i^0||^2 + beta * sum_f sum_edges (n_f . e)^2
/// where n_f is the mean target normal over face f's vertices.
inline double enhance_energy(const TriMesh& mesh, const std::vector<Vec3f>& rest,
                             const std::vector<Vec3f>& targets, float alpha, float beta) {
    double e = 0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        e += alpha * norm2((mesh.vertices[v] - rest[v]).cast<double>());
    for (const auto& f : mesh.faces) {
        Vec3d n = ((targets[f[0]] + targets[f[1]] + targets[f[2]]) / 3.0f).cast<double>();
        for (int k = 0; k < 3; ++k) {
            Vec3d edge =
                (mesh.vertices[f[(k + 1) % 3]] - mesh.vertices[f[k]]).cast<double>();
            double d = dot(n, edge);
            e += beta * d * d;
        }
    }
    return e;
}

inline void enhance_gradient(const TriMesh& mesh, const std::vector<Vec3f>& rest,
                             const std::vector<Vec3f>& targets, float alpha, float beta,
                             std::vector<Vec3d>& grad) {
    grad.assign(mesh.vertices.size(), Vec3d{});
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        grad[v] = (mesh.vertices[v] - rest[v]).cast<double>() * (2.0 * alpha);
    for (const auto& f : mesh.faces) {
        Vec3d n = ((targets[f[0]] + targets[f[1]] + targets[f[2]]) / 3.0f).cast<double>();
        for (int k = 0; k < 3; ++k) {
            int a = f[k], b = f[(k + 1) % 3];
            Vec3d edge = (mesh.vertices[b] - mesh.vertices[a]).cast<double>();
            Vec3d g = n * (2.0 * beta * dot(n, edge));
            grad[b] += g;
            grad[a] -= g;
        }
    }
}

}  // namespace detail

struct EnhanceResult {
    TriMesh mesh;
    std::vector<double> energy_history;  // energy after each accepted iteration
    int rejected_steps = 0;
};

/// Normal-driven vertex optimization: gradient descent with backtracking
/// (step halved when the energy would increase) on a position-fidelity plus
/// edge-orthogonality energy. Connectivity is unchanged; per-vertex
/// displacement from the input position is clamped when a cap is set.
inline EnhanceResult enhance_geometry(const TriMesh& mesh, const std::vector<Vec3f>& targets,
                                      const EnhanceParams& params = {}) {
    params.validate();
    mesh.validate();
    if (targets.size() != mesh.vertices.size())
        throw Error("enhance_geometry: target normal count != vertex count");

    EnhanceResult result;
    result.mesh = mesh;
    const std::vector<Vec3f> rest = mesh.vertices;
    double step = params.step_size;
    double energy = detail::enhance_energy(result.mesh, rest, targets, params.alpha, params.beta);
    result.energy_history.push_back(energy);

    std::vector<Vec3d> grad;
    for (int it = 0; it < params.iterations; ++it) {
        detail::enhance_gradient(result.mesh, rest, targets, params.alpha, params.beta, grad);
        bool accepted = false;
        while (step > 1e-12) {
            TriMesh trial = result.mesh;
            for (std::size_t v = 0; v < trial.vertices.size(); ++v) {
                Vec3f moved = trial.vertices[v] - (grad[v] * step).cast<float>();
                if (params.max_displacement > 0) {
                    Vec3f d = moved - rest[v];
                    float len = norm(d);
                    if (len > params.max_displacement)
                        moved = rest[v] + d * (params.max_displacement / len);
                }
                trial.vertices[v] = moved;
            }
            double trial_energy =
                detail::enhance_energy(trial, rest, targets, params.alpha, params.beta);
            if (trial_energy <= energy) {
                result.mesh = std::move(trial);
                energy = trial_energy;
                result.energy_history.push_back(energy);
                accepted = true;
                break;
            }
            step *= 0.5;
            ++result.rejected_steps;
        }
        if (!accepted) break;  // converged: no descent step left
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sidecar target-normal file: magic "NRM1", count (u64), then f32 triplets.
// ---------------------------------------------------------------------------

inline void save_normals(const std::vector<Vec3f>& normals, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_normals: cannot open " + path);
    os.write("NRM1", 4);
    uint64_t n = normals.size();
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(normals.data()),
             static_cast<std::streamsize>(normals.size() * sizeof(Vec3f)));
    if (!os) throw Error("save_normals: write failed for " + path);
}

inline std::vector<Vec3f> load_normals(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("load_normals: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NRM1", 4) != 0)
        throw Error("load_normals: bad magic (expected NRM1)");
    uint64_t n;
    is.read(reinterpret_cast<char*>(&n), 8);
    std::vector<Vec3f> normals(n);
    is.read(reinterpret_cast<char*>(normals.data()),
            static_cast<std::streamsize>(n * sizeof(Vec3f)));
    if (!is) throw Error("load_normals: truncated file " + path);
    return normals;
}

}  // namespace voxelmesh
