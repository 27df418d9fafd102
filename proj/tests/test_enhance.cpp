// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "voxelmesh/enhance.hpp"
#include "voxelmesh/fixtures.hpp"

using namespace voxelmesh;

TEST_CASE("normal consistency report") {
    TriMesh sphere = make_icosphere(0.8f, 2);
    std::vector<Vec3f> radial(sphere.vertices.size());
    for (std::size_t i = 0; i < radial.size(); ++i) radial[i] = normalized(sphere.vertices[i]);

    SECTION("targets equal to the geometric normals give fraction 1 everywhere") {
        VertexNormalResult vn = vertex_normals(sphere);
        NormalConsistencyReport r = normal_consistency(sphere, vn.normals);
        for (double f : r.fractions) CHECK(f == 1.0);
        CHECK(r.excluded == 0);
    }
    SECTION("a 3-degree rotation lands between the 2 and 5 degree bins") {
        Mat3f rot = Mat3f::rotation_z(deg_to_rad(3.0f));
        VertexNormalResult vn = vertex_normals(sphere);
        std::vector<Vec3f> rotated(vn.normals.size());
        for (std::size_t i = 0; i < rotated.size(); ++i) rotated[i] = rot * vn.normals[i];
        NormalConsistencyReport r = normal_consistency(sphere, rotated);
        // the error of a normal at polar angle theta is ~3 sin(theta) degrees,
        // so the < 2 deg set is the two polar caps with sin(theta) < 2/3 —
        // about a quarter of the sphere
        CHECK(r.fraction_at(2) < 0.4);
        CHECK(r.fraction_at(5) > 0.95);
        CHECK_THROWS_AS(r.fraction_at(7), Error);
    }
    SECTION("fractions match a direct per-vertex loop oracle") {
        auto [noisy, targets] = make_noisy_icosphere();
        NormalConsistencyReport r = normal_consistency(noisy, targets);
        VertexNormalResult vn = vertex_normals(noisy);
        for (std::size_t t = 0; t < NormalConsistencyReport::thresholds_deg.size(); ++t) {
            std::size_t hits = 0, counted = 0;
            for (std::size_t v = 0; v < noisy.vertices.size(); ++v) {
                if (norm(vn.normals[v]) < 0.5f) continue;
                ++counted;
                double d = std::clamp(
                    static_cast<double>(dot(vn.normals[v], normalized(targets[v]))), -1.0, 1.0);
                if (rad_to_deg(std::acos(d)) < NormalConsistencyReport::thresholds_deg[t])
                    ++hits;
            }
            CHECK(r.fractions[t] ==
                  Catch::Approx(static_cast<double>(hits) / counted).margin(1e-12));
        }
    }
    SECTION("isolated vertices are excluded") {
        TriMesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {4, 4, 4}};
        m.faces = {{0, 1, 2}};
        std::vector<Vec3f> targets(4, Vec3f{0, 0, 1});
        NormalConsistencyReport r = normal_consistency(m, targets);
        CHECK(r.excluded == 1);
        for (double f : r.fractions) CHECK(f == 1.0);  // the face normal is exactly +z
    }
}

TEST_CASE("enhancement energy gradient matches finite differences") {
    auto [mesh, targets] = make_noisy_icosphere(0.8f, 0.05f, 9);
    // shrink the problem for the FD sweep
    TriMesh small = make_icosphere(0.8f, 0);
    std::vector<Vec3f> small_targets(small.vertices.size());
    std::mt19937 rng(2);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (std::size_t i = 0; i < small.vertices.size(); ++i) {
        small_targets[i] = normalized(small.vertices[i]);
        small.vertices[i] += Vec3f{gauss(rng), gauss(rng), gauss(rng)} * 0.04f;
    }
    std::vector<Vec3f> rest = small.vertices;

    std::vector<Vec3d> grad;
    detail::enhance_gradient(small, rest, small_targets, 1.0f, 4.0f, grad);
    // the energy is quadratic in the vertices, so central differences are
    // exact; a large step keeps the float-rounded perturbation accurate
    const double h = 1e-3;
    for (std::size_t v = 0; v < small.vertices.size(); ++v)
        for (int axis = 0; axis < 3; ++axis) {
            TriMesh plus = small, minus = small;
            (&plus.vertices[v].x)[axis] += static_cast<float>(h);
            (&minus.vertices[v].x)[axis] -= static_cast<float>(h);
            double fd = (detail::enhance_energy(plus, rest, small_targets, 1.0f, 4.0f) -
                         detail::enhance_energy(minus, rest, small_targets, 1.0f, 4.0f)) /
                        (2 * h);
            CHECK((&grad[v].x)[axis] == Catch::Approx(fd).epsilon(1e-3).margin(1e-4));
        }
}

TEST_CASE("enhancement is a near-fixed-point when normals already agree") {
    TriMesh sphere = make_icosphere(0.8f, 2);
    VertexNormalResult vn = vertex_normals(sphere);
    EnhanceParams params;
    params.iterations = 10;
    EnhanceResult r = enhance_geometry(sphere, vn.normals, params);
    // the discrete normal energy is small but not exactly zero at the start
    // (face edges are not exactly orthogonal to the averaged vertex normals),
    // so allow a sub-0.1% drift of the bounding box diagonal
    float bbox = norm(sphere.bounds().extent());
    for (std::size_t v = 0; v < sphere.vertices.size(); ++v)
        CHECK(norm(r.mesh.vertices[v] - sphere.vertices[v]) < 1e-3f * bbox);
}

TEST_CASE("beta = 0 keeps the mesh fixed") {
    auto [mesh, targets] = make_noisy_icosphere();
    EnhanceParams params;
    params.beta = 0.0f;
    params.iterations = 5;
    EnhanceResult r = enhance_geometry(mesh, targets, params);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        CHECK(norm(r.mesh.vertices[v] - mesh.vertices[v]) < 1e-9f);
}

TEST_CASE("enhancement improves a noisy icosphere and never raises the energy") {
    auto [mesh, targets] = make_noisy_icosphere();
    NormalConsistencyReport before = normal_consistency(mesh, targets);
    EnhanceResult r = enhance_geometry(mesh, targets);
    NormalConsistencyReport after = normal_consistency(r.mesh, targets);

    CHECK(after.fraction_at(10) > before.fraction_at(10));
    REQUIRE(r.energy_history.size() >= 2);
    for (std::size_t i = 1; i < r.energy_history.size(); ++i)
        CHECK(r.energy_history[i] <= r.energy_history[i - 1]);

    SECTION("connectivity is untouched") {
        CHECK(r.mesh.faces == mesh.faces);
        CHECK(r.mesh.vertices.size() == mesh.vertices.size());
    }
}

TEST_CASE("max displacement caps every vertex move") {
    auto [mesh, targets] = make_noisy_icosphere(0.8f, 0.06f, 4);
    EnhanceParams params;
    params.max_displacement = 0.01f;
    EnhanceResult r = enhance_geometry(mesh, targets, params);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        CHECK(norm(r.mesh.vertices[v] - mesh.vertices[v]) <= 0.01f + 1e-6f);
}

TEST_CASE("parameter validation") {
    auto [mesh, targets] = make_noisy_icosphere();
    EnhanceParams bad;
    bad.alpha = -1.0f;
    CHECK_THROWS_AS(enhance_geometry(mesh, targets, bad), Error);
    EnhanceParams zero;
    zero.alpha = zero.beta = 0.0f;
    CHECK_THROWS_AS(enhance_geometry(mesh, targets, zero), Error);
    std::vector<Vec3f> short_targets(3);
    CHECK_THROWS_AS(enhance_geometry(mesh, short_targets, {}), Error);
}

TEST_CASE("target-normal sidecar file round trip") {
    auto [mesh, targets] = make_noisy_icosphere();
    std::string path = "vm_test_targets.nrm";
    save_normals(targets, path);
    std::vector<Vec3f> back = load_normals(path);
    REQUIRE(back.size() == targets.size());
    CHECK(std::memcmp(back.data(), targets.data(), back.size() * sizeof(Vec3f)) == 0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_normals(path), Error);
}
