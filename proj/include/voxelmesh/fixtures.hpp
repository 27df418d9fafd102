// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "voxelmesh/mesh.hpp"
#include "voxelmesh/render.hpp"
#include "voxelmesh/volume.hpp"

namespace voxelmesh {

// ---------------------------------------------------------------------------
// Analytic test shapes: meshes, signed distances, and a camera ring.
// ---------------------------------------------------------------------------

/// Icosphere: subdivided icosahedron with vertices projected onto the sphere.
inline TriMesh make_icosphere(float radius = 0.8f, int subdivisions = 3) {
    if (radius <= 0) throw Error("make_icosphere: radius must be positive");
    if (subdivisions < 0 || subdivisions > 7)
        throw Error("make_icosphere: subdivisions must be in 0..7");
    const float phi = (1.0f + std::sqrt(5.0f)) / 2.0f;
    TriMesh mesh;
    mesh.vertices = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                     {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                     {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                  {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                  {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            int idx = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]) * 0.5f);
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> faces;
        faces.reserve(mesh.faces.size() * 4);
        for (const auto& f : mesh.faces) {
            int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
            faces.push_back({f[0], ab, ca});
            faces.push_back({f[1], bc, ab});
            faces.push_back({f[2], ca, bc});
            faces.push_back({ab, bc, ca});
        }
        mesh.faces = std::move(faces);
    }
    for (auto& v : mesh.vertices) v = normalized(v) * radius;
    return mesh;
}

/// Axis-aligned box centered at `center`, 12 triangles with outward winding.
inline TriMesh make_cube(float half_extent = 0.6f, Vec3f center = {}) {
    if (half_extent <= 0) throw Error("make_cube: half extent must be positive");
    TriMesh mesh;
    for (int i = 0; i < 8; ++i)
        mesh.vertices.push_back(center + Vec3f{i & 1 ? half_extent : -half_extent,
                                               i & 2 ? half_extent : -half_extent,
                                               i & 4 ? half_extent : -half_extent});
    mesh.faces = {{0, 2, 3}, {0, 3, 1},   // -z
                  {4, 5, 7}, {4, 7, 6},   // +z
                  {0, 4, 6}, {0, 6, 2},   // -x
                  {1, 3, 7}, {1, 7, 5},   // +x
                  {0, 1, 5}, {0, 5, 4},   // -y
                  {2, 6, 7}, {2, 7, 3}};  // +y
    return mesh;
}

/// Torus around the y axis: major radius R in the xz plane, tube radius r.
inline TriMesh make_torus(float major_radius = 0.55f, float minor_radius = 0.22f,
                          int major_segments = 48, int minor_segments = 24) {
    if (minor_radius <= 0 || major_radius <= minor_radius)
        throw Error("make_torus: need major > minor > 0");
    if (major_segments < 3 || minor_segments < 3)
        throw Error("make_torus: need at least 3 segments per ring");
    TriMesh mesh;
    for (int i = 0; i < major_segments; ++i) {
        float a = 2.0f * static_cast<float>(kPi) * i / major_segments;
        Vec3f ring{std::cos(a), 0, std::sin(a)};
        for (int j = 0; j < minor_segments; ++j) {
            float b = 2.0f * static_cast<float>(kPi) * j / minor_segments;
            Vec3f p = ring * (major_radius + minor_radius * std::cos(b));
            p.y = minor_radius * std::sin(b);
            mesh.vertices.push_back(p);
        }
    }
    for (int i = 0; i < major_segments; ++i)
        for (int j = 0; j < minor_segments; ++j) {
            int i2 = (i + 1) % major_segments, j2 = (j + 1) % minor_segments;
            int a = i * minor_segments + j, b = i2 * minor_segments + j;
            int c = i2 * minor_segments + j2, d = i * minor_segments + j2;
            mesh.faces.push_back({a, c, b});
            mesh.faces.push_back({a, d, c});
        }
    return mesh;
}

/// Disjoint union of a small sphere and a small cube (still closed).
inline TriMesh make_composite() {
    TriMesh sphere = make_icosphere(0.35f, 3);
    for (auto& v : sphere.vertices) v += Vec3f{-0.4f, 0, 0};
    TriMesh cube = make_cube(0.3f, {0.45f, 0, 0});
    int base = static_cast<int>(sphere.vertices.size());
    sphere.vertices.insert(sphere.vertices.end(), cube.vertices.begin(), cube.vertices.end());
    for (const auto& f : cube.faces)
        sphere.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    return sphere;
}

// Signed distances (negative inside) matching the meshes above.

inline float sdf_sphere(const Vec3f& p, float radius = 0.8f) { return norm(p) - radius; }

inline float sdf_box(const Vec3f& p, float half_extent = 0.6f, Vec3f center = {}) {
    Vec3f q = p - center;
    Vec3f d{std::abs(q.x) - half_extent, std::abs(q.y) - half_extent,
            std::abs(q.z) - half_extent};
    Vec3f outside{std::max(d.x, 0.0f), std::max(d.y, 0.0f), std::max(d.z, 0.0f)};
    return norm(outside) + std::min(std::max({d.x, d.y, d.z}), 0.0f);
}

inline float sdf_torus(const Vec3f& p, float major_radius = 0.55f,
                       float minor_radius = 0.22f) {
    float q = std::sqrt(p.x * p.x + p.z * p.z) - major_radius;
    return std::sqrt(q * q + p.y * p.y) - minor_radius;
}

inline float sdf_composite(const Vec3f& p) {
    return std::min(sdf_sphere(p - Vec3f{-0.4f, 0, 0}, 0.35f),
                    sdf_box(p, 0.3f, {0.45f, 0, 0}));
}

struct Fixture {
    TriMesh mesh;                          // with colors and normal texture
    std::function<float(const Vec3f&)> sdf;
};

namespace detail {

/// Position-based color ramp so renders carry non-trivial gradients.
inline void paint_fixture(TriMesh& mesh) {
    Aabbf b = mesh.bounds();
    Vec3f e = b.extent();
    mesh.colors.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        Vec3f t = mesh.vertices[i] - b.min;
        mesh.colors[i] = {0.15f + 0.7f * (e.x > 0 ? t.x / e.x : 0.5f),
                          0.15f + 0.7f * (e.y > 0 ? t.y / e.y : 0.5f),
                          0.15f + 0.7f * (e.z > 0 ? t.z / e.z : 0.5f)};
    }
}

}  // namespace detail

inline Fixture make_fixture(const std::string& shape) {
    Fixture fx;
    if (shape == "sphere") {
        fx.mesh = make_icosphere();
        fx.sdf = [](const Vec3f& p) { return sdf_sphere(p); };
        fx.mesh.normal_texture.resize(fx.mesh.vertices.size());
        for (std::size_t i = 0; i < fx.mesh.vertices.size(); ++i)
            fx.mesh.normal_texture[i] = normalized(fx.mesh.vertices[i]);
    } else if (shape == "cube") {
        fx.mesh = make_cube();
        fx.sdf = [](const Vec3f& p) { return sdf_box(p); };
    } else if (shape == "torus") {
        fx.mesh = make_torus();
        fx.sdf = [](const Vec3f& p) { return sdf_torus(p); };
    } else if (shape == "composite") {
        fx.mesh = make_composite();
        fx.sdf = sdf_composite;
    } else {
        throw Error("make_fixture: unknown shape '" + shape +
                    "' (expected sphere, cube, torus or composite)");
    }
    detail::paint_fixture(fx.mesh);
    if (fx.mesh.normal_texture.empty()) fx.mesh = with_default_textures(fx.mesh);
    return fx;
}

/// Bounds shared by all fixtures: the [-1,1] cube.
inline Aabbf fixture_bounds() { return Aabbf{{-1, -1, -1}, {1, 1, 1}}; }

/// Camera at `eye` looking at `target`; image y points toward world -y.
inline Camera look_at(const Vec3f& eye, const Vec3f& target, float focal_px, int width,
                      int height) {
    Vec3f forward = normalized(target - eye);
    Vec3f down{0, -1, 0};
    if (std::abs(dot(forward, down)) > 0.999f) down = {0, 0, -1};
    down = normalized(down - forward * dot(down, forward));
    Vec3f right = cross(down, forward);
    Camera cam;
    cam.fx = cam.fy = focal_px;
    cam.width = width;
    cam.height = height;
    cam.cx = width / 2.0f;
    cam.cy = height / 2.0f;
    cam.cam_to_world.rotation.m = {right.x, down.x, forward.x, right.y, down.y,
                                   forward.y, right.z, down.z, forward.z};
    cam.cam_to_world.translation = eye;
    return cam;
}

/// Ring of m cameras around the y axis at the given elevation, all aimed at
/// the origin.
inline std::vector<Camera> make_camera_ring(int m, int width = 128, int height = 128,
                                            float radius = 2.6f,
                                            float elevation_deg = 20.0f) {
    if (m < 1) throw Error("make_camera_ring: need at least one camera");
    std::vector<Camera> rig;
    float el = deg_to_rad(elevation_deg);
    float focal = 1.2f * width;
    for (int i = 0; i < m; ++i) {
        float az = 2.0f * static_cast<float>(kPi) * i / m;
        Vec3f eye{radius * std::cos(el) * std::cos(az), radius * std::sin(el),
                  radius * std::cos(el) * std::sin(az)};
        rig.push_back(look_at(eye, {0, 0, 0}, focal, width, height));
    }
    return rig;
}

/// Renders the fixture from every rig pose with this repository's own
/// rasterizer. The rasterizer emits world-frame normals; views store them in
/// each camera's frame, so masked normal pixels are unit camera-frame vectors.
inline ViewSet render_fixture_views(const Fixture& fx, const std::vector<Camera>& rig) {
    ViewSet set;
    for (const Camera& cam : rig) {
        RenderTarget rt = rasterize(fx.mesh, cam, cam.width, cam.height);
        Image normal_cam = rt.normal;
        const Mat3f rt_inv = cam.cam_to_world.rotation.transposed();
        for (int y = 0; y < normal_cam.height; ++y)
            for (int x = 0; x < normal_cam.width; ++x) {
                const float* n = rt.normal.pixel(x, y);
                Vec3f c = rt_inv * Vec3f{n[0], n[1], n[2]};
                float* o = normal_cam.pixel(x, y);
                o[0] = c.x; o[1] = c.y; o[2] = c.z;
            }
        set.views.push_back({cam, std::move(rt.rgb), std::move(normal_cam), std::move(rt.mask)});
    }
    set.validate();
    return set;
}

/// Ground-truth SDF volume sampled from the analytic distance.
inline DenseVolume fixture_sdf_volume(const Fixture& fx, int resolution) {
    GridSpec spec(resolution, fixture_bounds());
    DenseVolume vol(spec);
    for (int k = 0; k < resolution; ++k)
        for (int j = 0; j < resolution; ++j)
            for (int i = 0; i < resolution; ++i)
                vol.values[spec.index(i, j, k)] = fx.sdf(spec.voxel_center(i, j, k));
    return vol;
}

/// Deterministically displaced icosphere for enhancement tests: vertices
/// move along pseudo-random directions, targets are the analytic normals.
inline std::pair<TriMesh, std::vector<Vec3f>> make_noisy_icosphere(float radius = 0.8f,
                                                                   float noise = 0.03f,
                                                                   uint64_t seed = 3) {
    TriMesh mesh = make_icosphere(radius, 3);
    std::vector<Vec3f> targets(mesh.vertices.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        targets[i] = normalized(mesh.vertices[i]);
        Vec3f d{gauss(rng), gauss(rng), gauss(rng)};
        mesh.vertices[i] += d * noise;
    }
    return {std::move(mesh), std::move(targets)};
}

}  // namespace voxelmesh
