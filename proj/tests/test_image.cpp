// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "voxelmesh/image.hpp"
#include "voxelmesh/image_io.hpp"

using namespace voxelmesh;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sample_image at integer coordinates returns the pixel") {
    Image img(4, 3, 2);
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> u(0, 1);
    for (float& v : img.data) v = u(rng);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            BilinearSample s = sample_image(img, static_cast<float>(x), static_cast<float>(y));
            CHECK_FALSE(s.out_of_view);
            CHECK(s.value[0] == Catch::Approx(img.at(x, y, 0)));
            CHECK(s.value[1] == Catch::Approx(img.at(x, y, 1)));
        }
}

TEST_CASE("sample_image of a constant image is constant everywhere") {
    Image img(5, 5, 1, 0.37f);
    CHECK(sample_image(img, 2.3f, 1.7f).value[0] == Catch::Approx(0.37f));
    CHECK(sample_image(img, 0.01f, 3.99f).value[0] == Catch::Approx(0.37f));
}

TEST_CASE("sample_image checkerboard center is the mean of four pixels") {
    Image img(2, 2, 1);
    img.at(0, 0, 0) = 1.0f;
    img.at(1, 1, 0) = 1.0f;
    BilinearSample s = sample_image(img, 0.5f, 0.5f);
    CHECK(s.value[0] == Catch::Approx(0.5f));
    CHECK_FALSE(s.out_of_view);
}

TEST_CASE("sample_image clamps outside the image and flags it") {
    Image img(3, 3, 1);
    img.at(0, 0, 0) = 2.0f;
    BilinearSample s = sample_image(img, -1.0f, -1.0f);
    CHECK(s.out_of_view);
    CHECK(s.value[0] == Catch::Approx(2.0f));
}

TEST_CASE("downsample2 averages 2x2 blocks") {
    Image img(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(x, y, 0) = static_cast<float>(y * 4 + x);
    Image small = downsample2(img);
    REQUIRE(small.width == 2);
    REQUIRE(small.height == 2);
    CHECK(small.at(0, 0, 0) == Catch::Approx((0 + 1 + 4 + 5) / 4.0f));
    CHECK(small.at(1, 1, 0) == Catch::Approx((10 + 11 + 14 + 15) / 4.0f));
}

TEST_CASE("PNG round trip preserves 8-bit values") {
    Image img(7, 5, 3);
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> u(0, 255);
    for (float& v : img.data) v = u(rng) / 255.0f;
    std::string path = "vm_test_rt.png";
    save_png(img, path);
    Image back = load_png(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(back.data[i] == Catch::Approx(img.data[i]).margin(0.5f / 255.0f));
    std::remove(path.c_str());
}

TEST_CASE("PNG writes are byte-identical across runs") {
    Image img(9, 4, 1);
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> u(0, 1);
    for (float& v : img.data) v = u(rng);
    save_png(img, "vm_test_a.png");
    save_png(img, "vm_test_b.png");
    CHECK(slurp("vm_test_a.png") == slurp("vm_test_b.png"));
    std::remove("vm_test_a.png");
    std::remove("vm_test_b.png");
}

TEST_CASE("PFM round trip is lossless") {
    Image img(6, 3, 3);
    std::mt19937 rng(4);
    std::uniform_real_distribution<float> u(-5, 5);
    for (float& v : img.data) v = u(rng);
    std::string path = "vm_test_rt.pfm";
    save_pfm(img, path);
    Image back = load_pfm(path);
    REQUIRE(back.same_shape(img));
    CHECK(back.data == img.data);
    std::remove(path.c_str());
}

TEST_CASE("normal map encode/decode round trip") {
    Image normals(4, 4, 3);
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(-1, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            Vec3f n = normalized(Vec3f{u(rng), u(rng), u(rng)});
            normals.at(x, y, 0) = n.x;
            normals.at(x, y, 1) = n.y;
            normals.at(x, y, 2) = n.z;
        }
    Image enc = encode_normal_map(normals);
    for (float v : enc.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
    Image dec = decode_normal_map(enc);
    for (std::size_t i = 0; i < normals.data.size(); ++i)
        CHECK(dec.data[i] == Catch::Approx(normals.data[i]).margin(1e-6));
    // the axis-aligned normal (0,0,1) maps to (0.5, 0.5, 1.0)
    Image axis(1, 1, 3);
    axis.at(0, 0, 2) = 1.0f;
    Image e = encode_normal_map(axis);
    CHECK(e.at(0, 0, 0) == Catch::Approx(0.5f));
    CHECK(e.at(0, 0, 1) == Catch::Approx(0.5f));
    CHECK(e.at(0, 0, 2) == Catch::Approx(1.0f));
}

TEST_CASE("missing image file raises an input error") {
    CHECK_THROWS_AS(load_png("vm_no_such_file.png"), Error);
    CHECK_THROWS_AS(load_pfm("vm_no_such_file.pfm"), Error);
}
