// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "voxelmesh/math.hpp"
#include "voxelmesh/mesh.hpp"
#include "voxelmesh/threading.hpp"
#include "voxelmesh/volume.hpp"

namespace voxelmesh {

/// Closest point on triangle (a,b,c) to p. Ericson's region test.
inline Vec3d closest_point_on_triangle(const Vec3d& p, const Vec3d& a, const Vec3d& b,
                                       const Vec3d& c) {
    Vec3d ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return a;
    Vec3d bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return b;
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
    Vec3d cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return c;
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

inline double point_triangle_distance(const Vec3d& p, const Vec3d& a, const Vec3d& b,
                                      const Vec3d& c) {
    return norm(p - closest_point_on_triangle(p, a, b, c));
}

/// Moller-Trumbore. Returns true with t > eps for a forward hit.
inline bool ray_triangle(const Vec3d& orig, const Vec3d& dir, const Vec3d& a, const Vec3d& b,
                         const Vec3d& c, double& t) {
    constexpr double eps = 1e-12;
    Vec3d e1 = b - a, e2 = c - a;
    Vec3d h = cross(dir, e2);
    double det = dot(e1, h);
    if (std::abs(det) < eps) return false;
    double inv = 1.0 / det;
    Vec3d s = orig - a;
    double u = dot(s, h) * inv;
    if (u < 0 || u > 1) return false;
    Vec3d q = cross(s, e1);
    double v = dot(dir, q) * inv;
    if (v < 0 || u + v > 1) return false;
    t = dot(e2, q) * inv;
    return t > 1e-9;
}

namespace detail {

/// Uniform grid over triangle bounding boxes: candidate lists per cell.
class TriangleGrid {
public:
    TriangleGrid(const TriMesh& mesh, int res) : mesh_(mesh), res_(res) {
        bounds_ = mesh.bounds();
        // pad so every query point and ray stays inside
        Vec3f e = bounds_.extent();
        float pad = 0.01f * std::max({e.x, e.y, e.z, 1e-6f});
        bounds_.min -= {pad, pad, pad};
        bounds_.max += {pad, pad, pad};
        cell_ = Vec3d{bounds_.extent().x / res, bounds_.extent().y / res,
                      bounds_.extent().z / res};
        cells_.resize(static_cast<std::size_t>(res) * res * res);
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            Aabbf fb;
            for (int v : mesh.faces[f]) fb.expand(mesh.vertices[v]);
            Vec3i lo = cell_of(fb.min.cast<double>()), hi = cell_of(fb.max.cast<double>());
            for (int k = lo.z; k <= hi.z; ++k)
                for (int j = lo.y; j <= hi.y; ++j)
                    for (int i = lo.x; i <= hi.x; ++i)
                        cells_[index(i, j, k)].push_back(static_cast<int>(f));
        }
    }

    Vec3i cell_of(const Vec3d& p) const {
        auto c = [&](double v, double lo, double s) {
            return std::clamp(static_cast<int>((v - lo) / s), 0, res_ - 1);
        };
        return {c(p.x, bounds_.min.x, cell_.x), c(p.y, bounds_.min.y, cell_.y),
                c(p.z, bounds_.min.z, cell_.z)};
    }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * res_ + j) * res_ + i;
    }

    /// Unsigned distance via expanding-shell search around the query cell.
    double unsigned_distance(const Vec3d& p) const {
        Vec3i c = cell_of(p);
        double best = std::numeric_limits<double>::max();
        double min_cell = std::min({cell_.x, cell_.y, cell_.z});
        for (int ring = 0; ring < res_; ++ring) {
            // Cells at Chebyshev ring r are at least (r-1)*min_cell away.
            if (ring > 1 && best <= static_cast<double>(ring - 1) * min_cell) break;
            bool any_cell = false;
            for (int k = c.z - ring; k <= c.z + ring; ++k) {
                if (k < 0 || k >= res_) continue;
                for (int j = c.y - ring; j <= c.y + ring; ++j) {
                    if (j < 0 || j >= res_) continue;
                    for (int i = c.x - ring; i <= c.x + ring; ++i) {
                        if (i < 0 || i >= res_) continue;
                        int d = std::max({std::abs(i - c.x), std::abs(j - c.y),
                                          std::abs(k - c.z)});
                        if (d != ring) continue;  // shell only
                        any_cell = true;
                        for (int f : cells_[index(i, j, k)]) {
                            const auto& face = mesh_.faces[f];
                            double dist = point_triangle_distance(
                                p, mesh_.vertices[face[0]].cast<double>(),
                                mesh_.vertices[face[1]].cast<double>(),
                                mesh_.vertices[face[2]].cast<double>());
                            best = std::min(best, dist);
                        }
                    }
                }
            }
            if (!any_cell) break;  // shell fully outside the grid
        }
        return best;
    }

    /// Parity of forward ray-surface crossings, via DDA through the grid.
    int crossing_parity(const Vec3d& orig, const Vec3d& dir, std::vector<int>& stamp,
                        int& stamp_id) const {
        ++stamp_id;
        int count = 0;
        Vec3i c = cell_of(orig);
        Vec3d inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
        Vec3i step{dir.x > 0 ? 1 : -1, dir.y > 0 ? 1 : -1, dir.z > 0 ? 1 : -1};
        auto boundary = [&](int axis, int cell) {
            double lo = (&bounds_.min.x)[axis];
            double cs = (&cell_.x)[axis];
            return lo + (cell + ((&step.x)[axis] > 0 ? 1 : 0)) * cs;
        };
        Vec3d tmax, tdelta;
        for (int a = 0; a < 3; ++a) {
            (&tmax.x)[a] = (boundary(a, (&c.x)[a]) - (&orig.x)[a]) * (&inv.x)[a];
            (&tdelta.x)[a] = std::abs((&cell_.x)[a] * (&inv.x)[a]);
        }
        while (c.x >= 0 && c.x < res_ && c.y >= 0 && c.y < res_ && c.z >= 0 && c.z < res_) {
            for (int f : cells_[index(c.x, c.y, c.z)]) {
                if (stamp[f] == stamp_id) continue;
                stamp[f] = stamp_id;
                const auto& face = mesh_.faces[f];
                double t;
                if (ray_triangle(orig, dir, mesh_.vertices[face[0]].cast<double>(),
                                 mesh_.vertices[face[1]].cast<double>(),
                                 mesh_.vertices[face[2]].cast<double>(), t))
                    ++count;
            }
            int a = 0;
            if (tmax.y < tmax.x) a = 1;
            if ((&tmax.x)[2] < (&tmax.x)[a]) a = 2;
            (&c.x)[a] += (&step.x)[a];
            (&tmax.x)[a] += (&tdelta.x)[a];
        }
        return count & 1;
    }

    std::size_t triangle_count() const { return mesh_.faces.size(); }

private:
    const TriMesh& mesh_;
    int res_;
    Aabbf bounds_;
    Vec3d cell_;
    std::vector<std::vector<int>> cells_;
};

}  // namespace detail

/// Signed distance volume of a closed, oriented mesh sampled at voxel centers.
/// Negative inside. Magnitude is the exact distance to the nearest triangle;
/// sign comes from ray parity with 3 jittered rays and majority vote.
inline DenseVolume mesh_to_sdf(const TriMesh& mesh, const GridSpec& spec) {
    if (mesh.empty()) throw Error("mesh_to_sdf: empty mesh");
    mesh.validate();
    int open = open_edge_count(mesh);
    if (open > 0)
        throw Error("mesh_to_sdf: mesh is not closed (" + std::to_string(open) +
                    " open edges)");

    int accel_res = std::clamp(spec.resolution / 2, 8, 64);
    detail::TriangleGrid grid(mesh, accel_res);

    // Fixed jitter directions near +z; majority vote over the three.
    const Vec3d dirs[3] = {normalized(Vec3d{0.031, -0.047, 1.0}),
                           normalized(Vec3d{-0.053, 0.029, 1.0}),
                           normalized(Vec3d{0.017, 0.061, 1.0})};

    DenseVolume out(spec);
    int n = spec.resolution;
    parallel_for(static_cast<std::size_t>(n) * n, [&](std::size_t jk) {
        int k = static_cast<int>(jk) / n;
        int j = static_cast<int>(jk) % n;
        std::vector<int> stamp(grid.triangle_count(), 0);
        int stamp_id = 0;
        for (int i = 0; i < n; ++i) {
            Vec3d p = spec.voxel_center(i, j, k).cast<double>();
            double d = grid.unsigned_distance(p);
            int inside_votes = 0;
            for (const Vec3d& dir : dirs)
                inside_votes += grid.crossing_parity(p, dir, stamp, stamp_id);
            float sign = inside_votes >= 2 ? -1.0f : 1.0f;
            out.at(i, j, k) = sign * static_cast<float>(d);
        }
    });
    return out;
}

}  // namespace voxelmesh
