// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "voxelmesh/math.hpp"
#include "voxelmesh/weights.hpp"

namespace voxelmesh {

// Small dense building blocks. Layout conventions:
//  - vectors are flat float spans
//  - 2D feature maps are [y][x][c]
//  - 3D feature volumes are [z][y][x][c]
//  - linear weights are [out][in], conv weights [out][in][kz][ky][kx]

inline void linear(std::span<const float> in, const Tensor& w, const Tensor& b,
                   std::span<float> out) {
    int n_out = w.shape[0], n_in = w.shape[1];
    if (static_cast<int>(in.size()) != n_in || static_cast<int>(out.size()) != n_out)
        throw Error("linear: width mismatch");
    for (int o = 0; o < n_out; ++o) {
        float acc = b.data.empty() ? 0.0f : b.data[o];
        const float* row = w.data.data() + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
        out[o] = acc;
    }
}

inline std::vector<float> linear(std::span<const float> in, const Tensor& w, const Tensor& b) {
    std::vector<float> out(w.shape[0]);
    linear(in, w, b, out);
    return out;
}

inline void relu_inplace(std::span<float> x) {
    for (auto& v : x) v = v > 0 ? v : 0;
}

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

inline void softmax_inplace(std::span<float> x) {
    float m = x[0];
    for (float v : x) m = std::max(m, v);
    float sum = 0;
    for (auto& v : x) { v = std::exp(v - m); sum += v; }
    for (auto& v : x) v /= sum;
}

inline void layer_norm_inplace(std::span<float> x, const Tensor& gamma, const Tensor& beta) {
    float mean = 0;
    for (float v : x) mean += v;
    mean /= x.size();
    float var = 0;
    for (float v : x) var += (v - mean) * (v - mean);
    var /= x.size();
    float inv = 1.0f / std::sqrt(var + 1e-5f);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = (x[i] - mean) * inv * gamma.data[i] + beta.data[i];
}

/// 2D feature map with interleaved channels.
struct FeatureMap2D {
    int width = 0, height = 0, channels = 0;
    std::vector<float> data;

    FeatureMap2D() = default;
    FeatureMap2D(int w, int h, int c)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

    float* at(int x, int y) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
    const float* at(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
};

/// 3x3 conv with zero padding, stride 1 or 2. Weight [out][in][3][3].
inline FeatureMap2D conv2d(const FeatureMap2D& in, const Tensor& w, const Tensor& b,
                           int stride) {
    int c_out = w.shape[0], c_in = w.shape[1];
    if (c_in != in.channels) throw Error("conv2d: channel mismatch");
    FeatureMap2D out(in.width / stride, in.height / stride, c_out);
    for (int oy = 0; oy < out.height; ++oy)
        for (int ox = 0; ox < out.width; ++ox) {
            float* dst = out.at(ox, oy);
            for (int oc = 0; oc < c_out; ++oc) dst[oc] = b.data[oc];
            for (int ky = 0; ky < 3; ++ky) {
                int sy = oy * stride + ky - 1;
                if (sy < 0 || sy >= in.height) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    int sx = ox * stride + kx - 1;
                    if (sx < 0 || sx >= in.width) continue;
                    const float* src = in.at(sx, sy);
                    for (int oc = 0; oc < c_out; ++oc) {
                        const float* wk =
                            w.data.data() +
                            ((static_cast<std::size_t>(oc) * c_in) * 9 + ky * 3 + kx);
                        float acc = 0;
                        for (int ic = 0; ic < c_in; ++ic) acc += wk[ic * 9] * src[ic];
                        dst[oc] += acc;
                    }
                }
            }
        }
    return out;
}

/// 3D feature volume with interleaved channels, [z][y][x][c].
struct FeatureVolume {
    int resolution = 0;
    int channels = 0;
    std::vector<float> data;

    FeatureVolume() = default;
    FeatureVolume(int res, int c)
        : resolution(res),
          channels(c),
          data(static_cast<std::size_t>(res) * res * res * c, 0.0f) {}

    float* at(int i, int j, int k) {
        return data.data() +
               ((static_cast<std::size_t>(k) * resolution + j) * resolution + i) * channels;
    }
    const float* at(int i, int j, int k) const {
        return data.data() +
               ((static_cast<std::size_t>(k) * resolution + j) * resolution + i) * channels;
    }
};

/// 3x3x3 conv with zero padding, stride 1 or 2. Weight [out][in][3][3][3].
inline FeatureVolume conv3d(const FeatureVolume& in, const Tensor& w, const Tensor& b,
                            int stride) {
    int c_out = w.shape[0], c_in = w.shape[1];
    if (c_in != in.channels) throw Error("conv3d: channel mismatch");
    FeatureVolume out(in.resolution / stride, c_out);
    int n = in.resolution;
    for (int ok = 0; ok < out.resolution; ++ok)
        for (int oj = 0; oj < out.resolution; ++oj)
            for (int oi = 0; oi < out.resolution; ++oi) {
                float* dst = out.at(oi, oj, ok);
                for (int oc = 0; oc < c_out; ++oc) dst[oc] = b.data[oc];
                for (int kz = 0; kz < 3; ++kz) {
                    int sk = ok * stride + kz - 1;
                    if (sk < 0 || sk >= n) continue;
                    for (int ky = 0; ky < 3; ++ky) {
                        int sj = oj * stride + ky - 1;
                        if (sj < 0 || sj >= n) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int si = oi * stride + kx - 1;
                            if (si < 0 || si >= n) continue;
                            const float* src = in.at(si, sj, sk);
                            std::size_t koff = (static_cast<std::size_t>(kz) * 3 + ky) * 3 + kx;
                            for (int oc = 0; oc < c_out; ++oc) {
                                const float* wk = w.data.data() +
                                                  (static_cast<std::size_t>(oc) * c_in) * 27 +
                                                  koff;
                                float acc = 0;
                                for (int ic = 0; ic < c_in; ++ic) acc += wk[ic * 27] * src[ic];
                                dst[oc] += acc;
                            }
                        }
                    }
                }
            }
    return out;
}

/// Sinusoidal position encoding of integer voxel coordinates, summed into a
/// token. The width is split evenly across the three axes.
inline std::vector<float> sinusoidal_position_encoding(const Vec3i& coord, int width) {
    std::vector<float> pe(width, 0.0f);
    int per_axis = width / 3;
    for (int a = 0; a < 3; ++a) {
        int base = a * per_axis;
        int n = a == 2 ? width - 2 * per_axis : per_axis;
        float x = static_cast<float>((&coord.x)[a]);
        for (int i = 0; i < n; ++i) {
            float freq = std::pow(10000.0f, -2.0f * (i / 2) / static_cast<float>(n));
            pe[base + i] = (i % 2 == 0) ? std::sin(x * freq) : std::cos(x * freq);
        }
    }
    return pe;
}

/// Pre-LN transformer encoder layer over a token sequence (self-attention +
/// two-layer MLP, both residual). Tokens are rows of `tokens`.
inline void transformer_layer(std::vector<std::vector<float>>& tokens, WeightStore& ws,
                              const std::string& prefix, int width, int heads) {
    if (heads < 1 || width % heads != 0)
        throw Error("transformer_layer: width must divide head count");
    int d_head = width / heads;
    const Tensor& ln1_g = ws.get(prefix + ".ln1.gamma", {width});
    const Tensor& ln1_b = ws.get(prefix + ".ln1.bias", {width});
    const Tensor& wq = ws.get(prefix + ".attn.q.weight", {width, width});
    const Tensor& bq = ws.get(prefix + ".attn.q.bias", {width});
    const Tensor& wk = ws.get(prefix + ".attn.k.weight", {width, width});
    const Tensor& bk = ws.get(prefix + ".attn.k.bias", {width});
    const Tensor& wv = ws.get(prefix + ".attn.v.weight", {width, width});
    const Tensor& bv = ws.get(prefix + ".attn.v.bias", {width});
    const Tensor& wo = ws.get(prefix + ".attn.out.weight", {width, width});
    const Tensor& bo = ws.get(prefix + ".attn.out.bias", {width});
    const Tensor& ln2_g = ws.get(prefix + ".ln2.gamma", {width});
    const Tensor& ln2_b = ws.get(prefix + ".ln2.bias", {width});
    int hidden = width * 2;
    const Tensor& w1 = ws.get(prefix + ".mlp.fc1.weight", {hidden, width});
    const Tensor& b1 = ws.get(prefix + ".mlp.fc1.bias", {hidden});
    const Tensor& w2 = ws.get(prefix + ".mlp.fc2.weight", {width, hidden});
    const Tensor& b2 = ws.get(prefix + ".mlp.fc2.bias", {width});

    std::size_t n = tokens.size();
    std::vector<std::vector<float>> q(n), k(n), v(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<float> x = tokens[t];
        layer_norm_inplace(x, ln1_g, ln1_b);
        q[t] = linear(x, wq, bq);
        k[t] = linear(x, wk, bk);
        v[t] = linear(x, wv, bv);
    }
    float scale = 1.0f / std::sqrt(static_cast<float>(d_head));
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<float> attn_out(width, 0.0f);
        for (int h = 0; h < heads; ++h) {
            int off = h * d_head;
            std::vector<float> scores(n);
            for (std::size_t s = 0; s < n; ++s) {
                float dotp = 0;
                for (int i = 0; i < d_head; ++i) dotp += q[t][off + i] * k[s][off + i];
                scores[s] = dotp * scale;
            }
            softmax_inplace(scores);
            for (std::size_t s = 0; s < n; ++s)
                for (int i = 0; i < d_head; ++i) attn_out[off + i] += scores[s] * v[s][off + i];
        }
        std::vector<float> proj = linear(attn_out, wo, bo);
        for (int i = 0; i < width; ++i) tokens[t][i] += proj[i];
    }
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<float> x = tokens[t];
        layer_norm_inplace(x, ln2_g, ln2_b);
        std::vector<float> h1 = linear(x, w1, b1);
        relu_inplace(h1);
        std::vector<float> h2 = linear(h1, w2, b2);
        for (int i = 0; i < width; ++i) tokens[t][i] += h2[i];
    }
}

}  // namespace voxelmesh
