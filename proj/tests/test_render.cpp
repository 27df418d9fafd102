// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "voxelmesh/fixtures.hpp"
#include "voxelmesh/render.hpp"

using namespace voxelmesh;

namespace {

Camera front_camera(int size = 16, float focal = 16.0f) {
    Camera cam;
    cam.fx = cam.fy = focal;
    cam.cx = cam.cy = size / 2.0f;
    cam.width = cam.height = size;
    return cam;
}

TriMesh big_triangle(float z, Vec3f color) {
    TriMesh m;
    m.vertices = {{-10, -10, z}, {10, -10, z}, {0, 14, z}};
    m.faces = {{0, 1, 2}};
    m.colors = {color, color, color};
    m.normal_texture = {{0, 0, -1}, {0, 0, -1}, {0, 0, -1}};
    return m;
}

}  // namespace

TEST_CASE("full-screen triangle renders a constant color and full mask") {
    Camera cam = front_camera();
    TriMesh tri = big_triangle(2.0f, {0.2f, 0.6f, 0.9f});
    RenderTarget rt = rasterize(tri, cam, 16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            REQUIRE(rt.mask.at(x, y, 0) == 1.0f);
            CHECK(rt.rgb.at(x, y, 0) == Catch::Approx(0.2f).margin(1e-6));
            CHECK(rt.rgb.at(x, y, 2) == Catch::Approx(0.9f).margin(1e-6));
            CHECK(rt.normal.at(x, y, 2) == Catch::Approx(-1.0f).margin(1e-6));
            CHECK(rt.fragment(x, y).depth == Catch::Approx(2.0f).margin(1e-5));
        }
}

TEST_CASE("barycentric weights: color equals the weighted vertex colors") {
    Camera cam = front_camera(32, 32.0f);
    TriMesh tri;
    tri.vertices = {{-0.5f, -0.4f, 2}, {0.5f, -0.4f, 2}, {0.0f, 0.5f, 2}};
    tri.faces = {{0, 1, 2}};
    tri.colors = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};  // rgb = barycentrics
    tri.normal_texture = {{0, 0, -1}, {0, 0, -1}, {0, 0, -1}};
    RenderTarget rt = rasterize(tri, cam, 32, 32);

    int covered = 0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            if (rt.mask.at(x, y, 0) == 0.0f) continue;
            ++covered;
            const Fragment& f = rt.fragment(x, y);
            CHECK(f.bary[0] + f.bary[1] + f.bary[2] == Catch::Approx(1.0f).margin(1e-5));
            for (int c = 0; c < 3; ++c)
                CHECK(rt.rgb.at(x, y, c) == Catch::Approx(f.bary[c]).margin(1e-6));
        }
    REQUIRE(covered > 50);

    // the pixel under the projected centroid carries near-equal weights
    Vec3f centroid = (tri.vertices[0] + tri.vertices[1] + tri.vertices[2]) / 3.0f;
    Projection pc = project(cam, centroid);
    int cx = static_cast<int>(std::lround(pc.u)), cy = static_cast<int>(std::lround(pc.v));
    const Fragment& f = rt.fragment(cx, cy);
    // allow a pixel of quantization (weights change ~1/extent per pixel)
    for (int i = 0; i < 3; ++i) CHECK(f.bary[i] == Catch::Approx(1.0f / 3).margin(0.06));
}

TEST_CASE("attribute gradient matches finite differences of the rendered color") {
    Camera cam = front_camera(16, 16.0f);
    TriMesh tri;
    tri.vertices = {{-0.6f, -0.5f, 2}, {0.6f, -0.5f, 2}, {0.0f, 0.6f, 2}};
    tri.faces = {{0, 1, 2}};
    tri.colors = {{0.8f, 0.2f, 0.1f}, {0.3f, 0.9f, 0.4f}, {0.1f, 0.5f, 0.7f}};
    tri.normal_texture = {{0, 0, -1}, {0, 0, -1}, {0, 0, -1}};
    RenderTarget rt = rasterize(tri, cam, 16, 16);

    const float h = 1e-3f;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            if (rt.mask.at(x, y, 0) == 0.0f) continue;
            AttributeGradient g = attribute_gradient(rt, x, y);
            REQUIRE(g.face == 0);
            for (int v = 0; v < 3; ++v) {
                TriMesh plus = tri, minus = tri;
                plus.colors[v].x += h;
                minus.colors[v].x -= h;
                float fp = rasterize(plus, cam, 16, 16).rgb.at(x, y, 0);
                float fm = rasterize(minus, cam, 16, 16).rgb.at(x, y, 0);
                float fd = (fp - fm) / (2 * h);
                CHECK(g.weight[v] == Catch::Approx(fd).epsilon(1e-4).margin(1e-4));
            }
        }
}

TEST_CASE("z-buffer keeps the nearer of two parallel triangles") {
    Camera cam = front_camera();
    TriMesh near_tri = big_triangle(2.0f, {1, 0, 0});
    TriMesh far_tri = big_triangle(4.0f, {0, 1, 0});
    // merge: far first so the z test (not draw order) must pick the winner
    TriMesh merged = far_tri;
    int base = 3;
    merged.vertices.insert(merged.vertices.end(), near_tri.vertices.begin(),
                           near_tri.vertices.end());
    merged.colors.insert(merged.colors.end(), near_tri.colors.begin(), near_tri.colors.end());
    merged.normal_texture.insert(merged.normal_texture.end(), near_tri.normal_texture.begin(),
                                 near_tri.normal_texture.end());
    merged.faces.push_back({base, base + 1, base + 2});
    RenderTarget rt = rasterize(merged, cam, 16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(rt.rgb.at(x, y, 0) == Catch::Approx(1.0f));
            CHECK(rt.rgb.at(x, y, 1) == Catch::Approx(0.0f));
            CHECK(rt.fragment(x, y).face == 1);
        }
}

TEST_CASE("opposite cameras cover a similar pixel count on a sphere") {
    Fixture fx = make_fixture("sphere");
    std::vector<Camera> rig = make_camera_ring(2, 64, 64);  // antipodal pair
    int counts[2];
    for (int i = 0; i < 2; ++i) {
        RenderTarget rt = rasterize(fx.mesh, rig[i], 64, 64);
        int c = 0;
        for (float v : rt.mask.data) c += v > 0.5f;
        counts[i] = c;
    }
    CHECK(counts[0] > 200);
    CHECK(std::abs(counts[0] - counts[1]) <= 0.02 * std::max(counts[0], counts[1]));
}

TEST_CASE("empty mesh renders pure background") {
    TriMesh empty;
    RenderTarget rt = rasterize(empty, front_camera(), 16, 16);
    for (float v : rt.mask.data) CHECK(v == 0.0f);
    for (float v : rt.rgb.data) CHECK(v == 0.0f);
    for (const Fragment& f : rt.fragments) CHECK(f.face == -1);
}

TEST_CASE("reshade_pixel reproduces the rasterized color and its derivatives") {
    Camera cam = front_camera(16, 16.0f);
    TriMesh tri;
    tri.vertices = {{-0.6f, -0.5f, 2}, {0.6f, -0.5f, 2.4f}, {0.0f, 0.6f, 2.2f}};
    tri.faces = {{0, 1, 2}};
    tri.colors = {{0.8f, 0.2f, 0.1f}, {0.3f, 0.9f, 0.4f}, {0.1f, 0.5f, 0.7f}};
    tri.normal_texture = {normalized(Vec3f{0.2f, 0, -1}), normalized(Vec3f{-0.2f, 0, -1}),
                          {0, 0, -1}};
    RenderTarget rt = rasterize(tri, cam, 16, 16);

    int px = -1, py = -1;
    for (int y = 0; y < 16 && px < 0; ++y)
        for (int x = 0; x < 16; ++x)
            if (rt.mask.at(x, y, 0) > 0) { px = x; py = y; break; }
    REQUIRE(px >= 0);

    auto lift = [&](double dx_seed_vertex0_x) {
        Vec3<Dual<double>> verts[3], colors[3], normals[3];
        for (int i = 0; i < 3; ++i) {
            verts[i] = {{tri.vertices[i].x, i == 0 ? dx_seed_vertex0_x : 0.0},
                        {tri.vertices[i].y, 0.0},
                        {tri.vertices[i].z, 0.0}};
            colors[i] = {{tri.colors[i].x, 0.0}, {tri.colors[i].y, 0.0},
                         {tri.colors[i].z, 0.0}};
            normals[i] = {{tri.normal_texture[i].x, 0.0}, {tri.normal_texture[i].y, 0.0},
                          {tri.normal_texture[i].z, 0.0}};
        }
        return reshade_pixel<Dual<double>>(cam, verts, colors, normals, px, py);
    };

    detail::PixelShade<Dual<double>> shade = lift(1.0);
    REQUIRE(shade.valid);
    CHECK(shade.color.x.v == Catch::Approx(rt.rgb.at(px, py, 0)).margin(1e-5));
    CHECK(shade.normal.z.v == Catch::Approx(rt.normal.at(px, py, 2)).margin(1e-5));

    // derivative of the red channel w.r.t. vertex 0's x position vs central
    // FD; the perturbation is applied in double so the step is exact
    double h = 1e-5;
    auto shade_at = [&](double dx0) {
        Vec3<double> verts[3], colors[3], normals[3];
        for (int i = 0; i < 3; ++i) {
            verts[i] = tri.vertices[i].cast<double>();
            colors[i] = tri.colors[i].cast<double>();
            normals[i] = tri.normal_texture[i].cast<double>();
        }
        verts[0].x += dx0;
        return reshade_pixel<double>(cam, verts, colors, normals, px, py);
    };
    double fd = (shade_at(h).color.x - shade_at(-h).color.x) / (2 * h);
    CHECK(shade.color.x.d == Catch::Approx(fd).epsilon(1e-3).margin(1e-7));
}
