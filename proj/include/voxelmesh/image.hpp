// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

/// Row-major float image, `channels` interleaved values per pixel.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c, float fill = 0.0f)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    float* pixel(int x, int y) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
    const float* pixel(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }

    float& at(int x, int y, int c) { return pixel(x, y)[c]; }
    float at(int x, int y, int c) const { return pixel(x, y)[c]; }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

struct BilinearSample {
    std::vector<float> value;
    bool out_of_view = false;  // pixel was clamped to the image border
};

/// Bilinear interpolation at continuous pixel coordinates (u,v), where
/// integer coordinates address pixel centers. Out-of-bounds samples clamp
/// and raise the flag.
inline BilinearSample sample_image(const Image& img, float u, float v) {
    BilinearSample out;
    out.value.assign(img.channels, 0.0f);
    if (u < 0 || v < 0 || u > img.width - 1 || v > img.height - 1) out.out_of_view = true;
    float cu = std::clamp(u, 0.0f, static_cast<float>(img.width - 1));
    float cv = std::clamp(v, 0.0f, static_cast<float>(img.height - 1));
    int x0 = std::min(static_cast<int>(cu), img.width - 2 >= 0 ? img.width - 2 : 0);
    int y0 = std::min(static_cast<int>(cv), img.height - 2 >= 0 ? img.height - 2 : 0);
    if (img.width == 1) x0 = 0;
    if (img.height == 1) y0 = 0;
    float tx = img.width == 1 ? 0.0f : cu - x0;
    float ty = img.height == 1 ? 0.0f : cv - y0;
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    const float* p00 = img.pixel(x0, y0);
    const float* p10 = img.pixel(x1, y0);
    const float* p01 = img.pixel(x0, y1);
    const float* p11 = img.pixel(x1, y1);
    for (int c = 0; c < img.channels; ++c)
        out.value[c] = (1 - tx) * (1 - ty) * p00[c] + tx * (1 - ty) * p10[c] +
                       (1 - tx) * ty * p01[c] + tx * ty * p11[c];
    return out;
}

/// 2x box downsample (odd trailing row/column folds into the last bin).
inline Image downsample2(const Image& img) {
    int w = std::max(1, img.width / 2), h = std::max(1, img.height / 2);
    Image out(w, h, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) {
                float acc = 0.0f;
                int cnt = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        int sx = 2 * x + dx, sy = 2 * y + dy;
                        if (sx < img.width && sy < img.height) {
                            acc += img.at(sx, sy, c);
                            ++cnt;
                        }
                    }
                out.at(x, y, c) = acc / cnt;
            }
    return out;
}

}  // namespace voxelmesh
