// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "voxelmesh/camera.hpp"
#include "voxelmesh/image.hpp"
#include "voxelmesh/mesh.hpp"

namespace voxelmesh {

/// Per-pixel rasterization record. face < 0 marks background.
struct Fragment {
    int face = -1;
    float bary[3] = {0, 0, 0};  // perspective-correct barycentric weights
    float depth = 0;
};

/// Rendered view of a mesh: RGB from the color texture, normals from the
/// normal texture (not from face geometry), binary coverage mask, and the
/// per-pixel fragments that expose attribute gradients.
struct RenderTarget {
    Image rgb;     // H x W x 3, black background
    Image normal;  // H x W x 3, zero-vector background
    Image mask;    // H x W x 1
    Camera camera;
    std::vector<Fragment> fragments;  // row-major, one per pixel

    const Fragment& fragment(int x, int y) const {
        return fragments[static_cast<std::size_t>(y) * rgb.width + x];
    }
};

namespace detail {

/// Perspective-correct interpolation at a fixed pixel with a fixed face
/// assignment, generic over the scalar type so Dual numbers flow through
/// vertex positions and attributes.
template <typename T>
struct PixelShade {
    Vec3<T> color;
    Vec3<T> normal;  // normalized
    bool valid = false;
};

template <typename T>
inline PixelShade<T> shade_pixel(const Camera& cam, const Vec3<T> verts[3],
                                 const Vec3<T> colors[3], const Vec3<T> normals[3], double px,
                                 double py) {
    T u[3], v[3], z[3];
    for (int i = 0; i < 3; ++i) {
        bool valid;
        project_t<T>(cam, verts[i], u[i], v[i], z[i], valid);
        if (!valid) return {};
    }
    // signed areas for screen-space barycentrics
    auto edge = [](T ax, T ay, T bx, T by, T cx, T cy) {
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    };
    T area = edge(u[0], v[0], u[1], v[1], u[2], v[2]);
    T w0 = edge(u[1], v[1], u[2], v[2], T(px), T(py));
    T w1 = edge(u[2], v[2], u[0], v[0], T(px), T(py));
    T w2 = edge(u[0], v[0], u[1], v[1], T(px), T(py));
    T b0 = w0 / area, b1 = w1 / area, b2 = w2 / area;
    T q0 = b0 / z[0], q1 = b1 / z[1], q2 = b2 / z[2];
    T qs = q0 + q1 + q2;
    T p0 = q0 / qs, p1 = q1 / qs, p2 = q2 / qs;
    PixelShade<T> out;
    out.valid = true;
    out.color = colors[0] * p0 + colors[1] * p1 + colors[2] * p2;
    Vec3<T> n = normals[0] * p0 + normals[1] * p1 + normals[2] * p2;
    T len = norm(n);
    out.normal = n / len;
    return out;
}

}  // namespace detail

/// Scanline z-buffer rasterizer with perspective-correct barycentric
/// interpolation of per-vertex color and normal texture. Triangles with any
/// vertex at or behind the camera are skipped; no backface culling.
/// Gradients cover vertex attributes and positions for covered pixels only
/// (visibility/silhouette gradients are not modeled).
inline RenderTarget rasterize(const TriMesh& mesh, const Camera& camera, int width,
                              int height) {
    camera.validate();
    mesh.validate();
    if (!mesh.empty() && (!mesh.has_colors() || !mesh.has_normal_texture()))
        throw Error("rasterize: mesh needs color and normal textures");

    Camera cam = camera;
    cam.width = width;
    cam.height = height;

    RenderTarget rt;
    rt.camera = cam;
    rt.rgb = Image(width, height, 3, 0.0f);
    rt.normal = Image(width, height, 3, 0.0f);
    rt.mask = Image(width, height, 1, 0.0f);
    rt.fragments.assign(static_cast<std::size_t>(width) * height, Fragment{});
    std::vector<float> zbuf(static_cast<std::size_t>(width) * height,
                            std::numeric_limits<float>::max());

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        Projection pr[3];
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            pr[i] = project(cam, mesh.vertices[mesh.faces[f][i]]);
            ok = ok && pr[i].valid;
        }
        if (!ok) continue;
        double u0 = pr[0].u, v0 = pr[0].v, u1 = pr[1].u, v1 = pr[1].v, u2 = pr[2].u,
               v2 = pr[2].v;
        double area = (u1 - u0) * (v2 - v0) - (v1 - v0) * (u2 - u0);
        if (area == 0.0) continue;
        int x_min = std::max(0, static_cast<int>(std::floor(std::min({u0, u1, u2}))));
        int x_max = std::min(width - 1, static_cast<int>(std::ceil(std::max({u0, u1, u2}))));
        int y_min = std::max(0, static_cast<int>(std::floor(std::min({v0, v1, v2}))));
        int y_max = std::min(height - 1, static_cast<int>(std::ceil(std::max({v0, v1, v2}))));
        for (int y = y_min; y <= y_max; ++y)
            for (int x = x_min; x <= x_max; ++x) {
                double px = x, py = y;
                double w0 = (u2 - u1) * (py - v1) - (v2 - v1) * (px - u1);
                double w1 = (u0 - u2) * (py - v2) - (v0 - v2) * (px - u2);
                double w2 = (u1 - u0) * (py - v0) - (v1 - v0) * (px - u0);
                double b0 = w0 / area, b1 = w1 / area, b2 = w2 / area;
                if (b0 < 0 || b1 < 0 || b2 < 0) continue;
                double q0 = b0 / pr[0].depth, q1 = b1 / pr[1].depth, q2 = b2 / pr[2].depth;
                double qs = q0 + q1 + q2;
                float depth = static_cast<float>(1.0 / qs);
                std::size_t idx = static_cast<std::size_t>(y) * width + x;
                if (depth >= zbuf[idx]) continue;
                zbuf[idx] = depth;
                Fragment& frag = rt.fragments[idx];
                frag.face = static_cast<int>(f);
                frag.bary[0] = static_cast<float>(q0 / qs);
                frag.bary[1] = static_cast<float>(q1 / qs);
                frag.bary[2] = static_cast<float>(q2 / qs);
                frag.depth = depth;
                Vec3f c{}, n{};
                for (int i = 0; i < 3; ++i) {
                    int vi = mesh.faces[f][i];
                    c += mesh.colors[vi] * frag.bary[i];
                    n += mesh.normal_texture[vi] * frag.bary[i];
                }
                n = normalized(n);
                float* cp = rt.rgb.pixel(x, y);
                cp[0] = c.x; cp[1] = c.y; cp[2] = c.z;
                float* np = rt.normal.pixel(x, y);
                np[0] = n.x; np[1] = n.y; np[2] = n.z;
                rt.mask.at(x, y, 0) = 1.0f;
            }
    }
    return rt;
}

/// d(pixel color channel)/d(vertex color channel) for a covered pixel:
/// the perspective-correct barycentric weight of that vertex.
struct AttributeGradient {
    int face = -1;
    float weight[3] = {0, 0, 0};
};

inline AttributeGradient attribute_gradient(const RenderTarget& rt, int x, int y) {
    const Fragment& f = rt.fragment(x, y);
    AttributeGradient g;
    g.face = f.face;
    for (int i = 0; i < 3; ++i) g.weight[i] = f.bary[i];
    return g;
}

/// Re-shades one covered pixel with the fixed face assignment from a prior
/// rasterization, generic over the scalar type (Dual numbers give analytic
/// derivatives with respect to any vertex position or attribute component).
template <typename T>
inline detail::PixelShade<T> reshade_pixel(const Camera& cam, const Vec3<T> verts[3],
                                           const Vec3<T> colors[3], const Vec3<T> normals[3],
                                           double px, double py) {
    return detail::shade_pixel<T>(cam, verts, colors, normals, px, py);
}

/// Fills in flat default textures when a mesh has none (white color, +z
/// normals), so geometry-only meshes can be rendered for masks and PSNR.
inline TriMesh with_default_textures(const TriMesh& mesh) {
    TriMesh out = mesh;
    if (!out.has_colors()) out.colors.assign(out.vertices.size(), Vec3f{1, 1, 1});
    if (!out.has_normal_texture()) {
        VertexNormalResult vn = vertex_normals(out);
        out.normal_texture = vn.normals;
        for (auto& n : out.normal_texture)
            if (norm(n) < 0.5f) n = {0, 0, 1};
    }
    return out;
}

}  // namespace voxelmesh
