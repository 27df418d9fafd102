// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>

#include "voxelmesh/fixtures.hpp"
#include "voxelmesh/mesh.hpp"

using namespace voxelmesh;

TEST_CASE("mesh validation rejects out-of-range face indices") {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 3}};
    CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("OBJ round trip with colors and normal texture") {
    TriMesh m = make_cube(0.4f, {0.1f, -0.2f, 0.3f});
    m = with_default_textures(m);
    std::string path = "vm_test_mesh.obj";
    save_obj(m, path);
    TriMesh back = load_obj(path);
    REQUIRE(back.vertices.size() == m.vertices.size());
    REQUIRE(back.faces == m.faces);
    REQUIRE(back.has_colors());
    REQUIRE(back.has_normal_texture());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK(norm(back.vertices[i] - m.vertices[i]) < 1e-6f);
        CHECK(norm(back.colors[i] - m.colors[i]) < 1e-6f);
        CHECK(norm(back.normal_texture[i] - m.normal_texture[i]) < 1e-6f);
    }
    std::remove(path.c_str());
}

TEST_CASE("PLY round trip quantizes colors to 8 bits, keeps geometry exact") {
    TriMesh m = with_default_textures(make_icosphere(0.7f, 1));
    std::string path = "vm_test_mesh.ply";
    save_ply(m, path);
    TriMesh back = load_ply(path);
    REQUIRE(back.vertices.size() == m.vertices.size());
    REQUIRE(back.faces == m.faces);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK(back.vertices[i].x == m.vertices[i].x);  // float payload is bitwise
        CHECK(norm(back.normal_texture[i] - m.normal_texture[i]) < 1e-6f);
        CHECK(norm(back.colors[i] - m.colors[i]) < 1.0f / 255.0f);
    }
    std::remove(path.c_str());
}

TEST_CASE("cube vertex normals point along the diagonals, faces outward") {
    TriMesh cube = make_cube(0.5f);
    VertexNormalResult r = vertex_normals(cube);
    CHECK(r.isolated_count == 0);
    for (std::size_t i = 0; i < cube.vertices.size(); ++i) {
        // On a cube the area-weighted normal points away from the center.
        CHECK(dot(r.normals[i], normalized(cube.vertices[i])) > 0.5f);
        CHECK(norm(r.normals[i]) == Catch::Approx(1.0f).margin(1e-5));
    }
}

TEST_CASE("icosphere vertex normals are radial within 2 degrees") {
    TriMesh sphere = make_icosphere(0.8f, 3);
    VertexNormalResult r = vertex_normals(sphere);
    for (std::size_t i = 0; i < sphere.vertices.size(); ++i) {
        float c = dot(r.normals[i], normalized(sphere.vertices[i]));
        CHECK(std::acos(std::clamp(c, -1.0f, 1.0f)) < deg_to_rad(2.0f));
    }
}

TEST_CASE("flipping the winding negates vertex normals") {
    TriMesh m = make_icosphere(0.8f, 1);
    TriMesh flipped = m;
    for (auto& f : flipped.faces) std::swap(f[1], f[2]);
    VertexNormalResult a = vertex_normals(m);
    VertexNormalResult b = vertex_normals(flipped);
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        CHECK(norm(a.normals[i] + b.normals[i]) < 1e-5f);
}

TEST_CASE("isolated vertices get a zero normal and are counted") {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}};
    m.faces = {{0, 1, 2}};
    VertexNormalResult r = vertex_normals(m);
    CHECK(r.isolated_count == 1);
    CHECK(norm(r.normals[3]) == 0.0f);
}

TEST_CASE("surface samples lie on the sampled plane") {
    TriMesh quad;
    quad.vertices = {{0, 0, 0.5f}, {1, 0, 0.5f}, {1, 1, 0.5f}, {0, 1, 0.5f}};
    quad.faces = {{0, 1, 2}, {0, 2, 3}};
    std::vector<Vec3f> pts = sample_surface(quad, 500, 17);
    REQUIRE(pts.size() == 500);
    Vec3f centroid{};
    for (const Vec3f& p : pts) {
        CHECK(p.z == Catch::Approx(0.5f).margin(1e-6));
        CHECK(p.x >= -1e-6f);
        CHECK(p.x <= 1.0f + 1e-6f);
        centroid += p / 500.0f;
    }
    // uniform sampling of the unit square clusters the centroid near (0.5, 0.5)
    CHECK(centroid.x == Catch::Approx(0.5f).margin(0.05));
    CHECK(centroid.y == Catch::Approx(0.5f).margin(0.05));
}

TEST_CASE("surface sampling is deterministic per seed") {
    TriMesh m = make_icosphere(0.8f, 2);
    std::vector<Vec3f> a = sample_surface(m, 200, 5);
    std::vector<Vec3f> b = sample_surface(m, 200, 5);
    std::vector<Vec3f> c = sample_surface(m, 200, 6);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(Vec3f)) == 0);
    CHECK(std::memcmp(a.data(), c.data(), a.size() * sizeof(Vec3f)) != 0);
}

TEST_CASE("normalize_unit_box centers and scales to max extent 1") {
    TriMesh m = make_cube(1.3f, {4, -2, 7});
    auto [out, xf] = normalize_unit_box(m);
    Aabbf b = out.bounds();
    Vec3f e = b.extent();
    CHECK(std::max({e.x, e.y, e.z}) == Catch::Approx(1.0f).margin(1e-5));
    CHECK(norm(b.center()) < 1e-5f);
    // the returned transform maps the original into the normalized mesh
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        CHECK(norm(xf * m.vertices[i] - out.vertices[i]) < 1e-6f);
    // normalizing again is (nearly) the identity
    auto [again, xf2] = normalize_unit_box(out);
    CHECK(xf2.scale == Catch::Approx(1.0f).margin(1e-5));
    CHECK(norm(xf2.translation) < 1e-5f);
    (void)again;
}

TEST_CASE("open_edge_count distinguishes closed and open meshes") {
    CHECK(open_edge_count(make_cube(0.5f)) == 0);
    CHECK(open_edge_count(make_icosphere(0.8f, 2)) == 0);
    TriMesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.faces = {{0, 1, 2}};
    CHECK(open_edge_count(tri) == 3);
}

TEST_CASE("fixture meshes are sane") {
    for (const char* shape : {"sphere", "cube", "torus", "composite"}) {
        Fixture fx = make_fixture(shape);
        fx.mesh.validate();
        CHECK_FALSE(fx.mesh.empty());
        CHECK(open_edge_count(fx.mesh) == 0);
        CHECK(fx.mesh.has_colors());
        CHECK(fx.mesh.has_normal_texture());
        // geometry stays inside the canonical fixture bounds
        Aabbf fb = fixture_bounds();
        for (const Vec3f& v : fx.mesh.vertices) CHECK(fb.contains(v));
        // the SDF is near zero on the surface
        std::vector<Vec3f> pts = sample_surface(fx.mesh, 64, 1);
        for (const Vec3f& p : pts) CHECK(std::abs(fx.sdf(p)) < 0.08f);
    }
    CHECK_THROWS_AS(make_fixture("dodecahedron"), Error);
}
