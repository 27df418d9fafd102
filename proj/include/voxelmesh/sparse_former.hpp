// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "voxelmesh/attention.hpp"
#include "voxelmesh/volume.hpp"

namespace voxelmesh {

/// Captured intermediate state of the sparse forward pass (for inspection
/// and locality tests).
struct SparseTrace {
    std::vector<SparseVoxelGrid> down_features;  // after each level's attention
};

namespace detail {

/// Submanifold 3x3x3 sparse convolution: output sites equal input sites,
/// neighbors absent from the grid contribute zero. Weight [out][in][3][3][3].
inline SparseVoxelGrid sparse_conv3d(const SparseVoxelGrid& in, const Tensor& w,
                                     const Tensor& b) {
    int c_out = w.shape[0], c_in = w.shape[1];
    if (c_in != in.channels) throw Error("sparse_conv3d: channel mismatch");
    SparseVoxelGrid out;
    out.spec = in.spec;
    out.coords = in.coords;
    out.channels = c_out;
    out.features.assign(in.coords.size() * c_out, 0.0f);
    for (std::size_t v = 0; v < in.coords.size(); ++v) {
        const Vec3i& c = in.coords[v];
        float* dst = out.feature(v);
        for (int oc = 0; oc < c_out; ++oc) dst[oc] = b.data[oc];
        for (int kz = 0; kz < 3; ++kz)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    Vec3i nb{c.x + kx - 1, c.y + ky - 1, c.z + kz - 1};
                    std::ptrdiff_t idx = in.find(nb);
                    if (idx < 0) continue;
                    const float* src = in.feature(idx);
                    std::size_t koff = (static_cast<std::size_t>(kz) * 3 + ky) * 3 + kx;
                    for (int oc = 0; oc < c_out; ++oc) {
                        const float* wk =
                            w.data.data() + (static_cast<std::size_t>(oc) * c_in) * 27 + koff;
                        float acc = 0;
                        for (int ic = 0; ic < c_in; ++ic) acc += wk[ic * 27] * src[ic];
                        dst[oc] += acc;
                    }
                }
    }
    return out;
}

inline SparseVoxelGrid sparse_resblock(const SparseVoxelGrid& x, WeightStore& ws,
                                       const std::string& prefix) {
    int c = x.channels;
    SparseVoxelGrid h = sparse_conv3d(x, ws.get(prefix + ".conv1.weight", {c, c, 3, 3, 3}),
                                      ws.get(prefix + ".conv1.bias", {c}));
    relu_inplace(h.features);
    h = sparse_conv3d(h, ws.get(prefix + ".conv2.weight", {c, c, 3, 3, 3}),
                      ws.get(prefix + ".conv2.bias", {c}));
    for (std::size_t i = 0; i < h.features.size(); ++i) h.features[i] += x.features[i];
    relu_inplace(h.features);
    return h;
}

/// Downsample by 2: parent coords are the unique child>>1 coords, parent
/// feature is the mean of its present children followed by a linear map.
inline SparseVoxelGrid sparse_downsample(const SparseVoxelGrid& in, const Tensor& w,
                                         const Tensor& b) {
    SparseVoxelGrid out;
    out.spec = GridSpec(in.spec.resolution / 2, in.spec.bounds);
    out.channels = w.shape[0];
    for (const Vec3i& c : in.coords) out.coords.push_back({c.x / 2, c.y / 2, c.z / 2});
    std::sort(out.coords.begin(), out.coords.end(), SparseVoxelGrid::coord_less);
    out.coords.erase(std::unique(out.coords.begin(), out.coords.end(),
                                 [](const Vec3i& a, const Vec3i& b2) { return a == b2; }),
                     out.coords.end());
    out.features.assign(out.coords.size() * out.channels, 0.0f);
    std::vector<float> mean(in.channels);
    std::vector<int> counts(out.coords.size(), 0);
    std::vector<std::vector<float>> sums(out.coords.size(),
                                         std::vector<float>(in.channels, 0.0f));
    for (std::size_t v = 0; v < in.coords.size(); ++v) {
        const Vec3i& c = in.coords[v];
        std::ptrdiff_t p = out.find({c.x / 2, c.y / 2, c.z / 2});
        const float* f = in.feature(v);
        for (int ch = 0; ch < in.channels; ++ch) sums[p][ch] += f[ch];
        ++counts[p];
    }
    for (std::size_t p = 0; p < out.coords.size(); ++p) {
        for (int ch = 0; ch < in.channels; ++ch) mean[ch] = sums[p][ch] / counts[p];
        linear(mean, w, b, std::span<float>(out.feature(p), out.channels));
    }
    return out;
}

/// Attends every sparse voxel. Voxels sit on the corner lattice used by
/// trilinear sampling: coord c maps to bounds.min + c * voxel_size.
inline void sparse_attend(SparseVoxelGrid& x, const ViewSet& views,
                          const std::vector<EncodedView>& encoded, const ArchConfig& config,
                          WeightStore& ws, const std::string& prefix) {
    auto w = CrossAttentionWeights::fetch(ws, prefix, x.channels, pixel_feature_width(config));
    float s = x.spec.voxel_size();
    for (std::size_t v = 0; v < x.coords.size(); ++v) {
        const Vec3i& c = x.coords[v];
        Vec3f pos{x.spec.bounds.min.x + c.x * s, x.spec.bounds.min.y + c.y * s,
                  x.spec.bounds.min.z + c.z * s};
        auto pixels = collect_pixel_features(pos, views, encoded, config);
        float* f = x.feature(v);
        std::vector<float> nv = projection_aware_cross_attention(
            std::span<const float>(f, x.channels), pixels, w, config.attention_heads);
        std::copy(nv.begin(), nv.end(), f);
    }
}

}  // namespace detail

/// Sparse UNet + bottleneck transformer predicting per-voxel features of the
/// sparse grid. Output coords equal input coords; feature width is
/// config.sparse_out_channels.
inline SparseVoxelGrid sparsevoxelformer_forward(const ViewSet& views,
                                                 const std::vector<EncodedView>& encoded,
                                                 const SparseVoxelGrid& sparse,
                                                 const ArchConfig& config, WeightStore& ws,
                                                 const FormerOptions& opts = {},
                                                 SparseTrace* trace = nullptr) {
    config.validate();
    if (sparse.coords.empty()) throw Error("sparsevoxelformer: empty sparse grid");
    const auto& levels = config.sparse_levels;
    if (sparse.spec.resolution != levels[0].resolution)
        throw Error("sparsevoxelformer: grid resolution does not match the configuration");

    // project the input features (the shared subdivision token) to level-0 width
    SparseVoxelGrid x;
    x.spec = sparse.spec;
    x.coords = sparse.coords;
    x.channels = levels[0].channels;
    x.features.resize(x.coords.size() * x.channels);
    {
        const Tensor& w = ws.get("sparseformer.stem.weight", {levels[0].channels, sparse.channels});
        const Tensor& b = ws.get("sparseformer.stem.bias", {levels[0].channels});
        for (std::size_t v = 0; v < x.coords.size(); ++v)
            linear(std::span<const float>(sparse.feature(v), sparse.channels), w, b,
                   std::span<float>(x.feature(v), x.channels));
    }

    std::vector<SparseVoxelGrid> skips;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        std::string lp = "sparseformer.down" + std::to_string(l);
        x = detail::sparse_resblock(x, ws, lp + ".res");
        detail::sparse_attend(x, views, encoded, config, ws, lp + ".attn");
        skips.push_back(x);
        if (trace) trace->down_features.push_back(x);
        if (l + 1 < levels.size()) {
            int stride = levels[l].resolution / levels[l + 1].resolution;
            if (stride == 2) {
                x = detail::sparse_downsample(
                    x, ws.get(lp + ".down.weight", {levels[l + 1].channels, levels[l].channels}),
                    ws.get(lp + ".down.bias", {levels[l + 1].channels}));
            } else {
                x = detail::sparse_conv3d(
                    x,
                    ws.get(lp + ".down.weight",
                           {levels[l + 1].channels, levels[l].channels, 3, 3, 3}),
                    ws.get(lp + ".down.bias", {levels[l + 1].channels}));
            }
            relu_inplace(x.features);
        }
    }

    if (opts.enable_transformer && config.sparse_transformer_layers > 0) {
        int tw = config.sparse_transformer_width;
        int cl = x.channels;
        const Tensor& win = ws.get("sparseformer.bottleneck.in.weight", {tw, cl});
        const Tensor& bin = ws.get("sparseformer.bottleneck.in.bias", {tw});
        const Tensor& wout = ws.get("sparseformer.bottleneck.out.weight", {cl, tw});
        const Tensor& bout = ws.get("sparseformer.bottleneck.out.bias", {cl});
        std::vector<std::vector<float>> tokens;
        tokens.reserve(x.coords.size());
        for (std::size_t v = 0; v < x.coords.size(); ++v) {
            std::vector<float> t = linear(std::span<const float>(x.feature(v), cl), win, bin);
            std::vector<float> pe = sinusoidal_position_encoding(x.coords[v], tw);
            for (int c = 0; c < tw; ++c) t[c] += pe[c];
            tokens.push_back(std::move(t));
        }
        for (int layer = 0; layer < config.sparse_transformer_layers; ++layer)
            transformer_layer(tokens, ws,
                              "sparseformer.bottleneck.layer" + std::to_string(layer), tw,
                              config.attention_heads);
        for (std::size_t v = 0; v < x.coords.size(); ++v)
            linear(tokens[v], wout, bout, std::span<float>(x.feature(v), cl));
    }

    for (std::size_t l = levels.size() - 1; l-- > 0;) {
        std::string lp = "sparseformer.up" + std::to_string(l);
        if (levels[l].resolution == 2 * levels[l + 1].resolution) {
            // each child inherits its parent's feature
            SparseVoxelGrid up;
            up.spec = skips[l].spec;
            up.coords = skips[l].coords;
            up.channels = x.channels;
            up.features.resize(up.coords.size() * up.channels);
            for (std::size_t v = 0; v < up.coords.size(); ++v) {
                const Vec3i& c = up.coords[v];
                std::ptrdiff_t p = x.find({c.x / 2, c.y / 2, c.z / 2});
                std::copy(x.feature(p), x.feature(p) + x.channels, up.feature(v));
            }
            x = std::move(up);
        }
        x = detail::sparse_conv3d(
            x, ws.get(lp + ".conv.weight", {levels[l].channels, x.channels, 3, 3, 3}),
            ws.get(lp + ".conv.bias", {levels[l].channels}));
        for (std::size_t i = 0; i < x.features.size(); ++i) x.features[i] += skips[l].features[i];
        x = detail::sparse_resblock(x, ws, lp + ".res");
    }

    SparseVoxelGrid out;
    out.spec = x.spec;
    out.coords = x.coords;
    out.channels = config.sparse_out_channels;
    out.features.resize(out.coords.size() * out.channels);
    {
        const Tensor& w =
            ws.get("sparseformer.head.weight", {config.sparse_out_channels, x.channels});
        const Tensor& b = ws.get("sparseformer.head.bias", {config.sparse_out_channels});
        for (std::size_t v = 0; v < out.coords.size(); ++v)
            linear(std::span<const float>(x.feature(v), x.channels), w, b,
                   std::span<float>(out.feature(v), out.channels));
    }
    return out;
}

}  // namespace voxelmesh
