// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "voxelmesh/image.hpp"
#include "voxelmesh/math.hpp"

namespace voxelmesh {

// ---------------------------------------------------------------------------
// PNG (8-bit, gray or RGB). Encoder settings are fixed so repeated runs
// produce byte-identical files.
// ---------------------------------------------------------------------------

inline void save_png(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw Error("save_png: only 1- or 3-channel images supported");
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("save_png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error("save_png: libpng failure writing " + path);
    }
    png_init_io(png, fp);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                float v = std::clamp(img.at(x, y, c), 0.0f, 1.0f);
                row[static_cast<std::size_t>(x) * img.channels + c] =
                    static_cast<png_byte>(v * 255.0f + 0.5f);
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

inline Image load_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw Error("load_png: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw Error("load_png: libpng failure reading " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    int channels = png_get_channels(png, info);
    Image img(static_cast<int>(w), static_cast<int>(h), channels);
    std::vector<png_byte> row(static_cast<std::size_t>(w) * channels);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(static_cast<int>(x), static_cast<int>(y), c) =
                    row[static_cast<std::size_t>(x) * channels + c] / 255.0f;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

// ---------------------------------------------------------------------------
// PFM (f32, little-endian scale -1.0, rows bottom-up per convention).
// ---------------------------------------------------------------------------

inline void save_pfm(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw Error("save_pfm: only 1- or 3-channel images supported");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_pfm: cannot open " + path);
    os << (img.channels == 3 ? "PF" : "Pf") << "\n"
       << img.width << " " << img.height << "\n-1.0\n";
    for (int y = img.height - 1; y >= 0; --y)
        os.write(reinterpret_cast<const char*>(img.pixel(0, y)),
                 static_cast<std::streamsize>(sizeof(float)) * img.width * img.channels);
    if (!os) throw Error("save_pfm: write failed for " + path);
}

inline Image load_pfm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("load_pfm: cannot open " + path);
    std::string magic;
    int w, h;
    float scale;
    is >> magic >> w >> h >> scale;
    if (magic != "PF" && magic != "Pf") throw Error("load_pfm: bad magic in " + path);
    if (scale > 0) throw Error("load_pfm: big-endian PFM not supported");
    is.get();  // single whitespace after the scale
    Image img(w, h, magic == "PF" ? 3 : 1);
    for (int y = h - 1; y >= 0; --y)
        is.read(reinterpret_cast<char*>(img.pixel(0, y)),
                static_cast<std::streamsize>(sizeof(float)) * w * img.channels);
    if (!is) throw Error("load_pfm: truncated file " + path);
    return img;
}

inline void save_image(const Image& img, const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pfm") save_pfm(img, path);
    else save_png(img, path);
}

inline Image load_image(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pfm") return load_pfm(path);
    return load_png(path);
}

// Normal maps store x,y,z in [-1,1] mapped to [0,1] when written to 8-bit
// images; PFM keeps raw components for lossless round trips.

inline Image encode_normal_map(const Image& normals) {
    Image out = normals;
    for (auto& v : out.data) v = v * 0.5f + 0.5f;
    return out;
}

inline Image decode_normal_map(const Image& encoded) {
    Image out = encoded;
    for (auto& v : out.data) v = v * 2.0f - 1.0f;
    return out;
}

}  // namespace voxelmesh
