// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "voxelmesh/attention.hpp"
#include "voxelmesh/volume.hpp"

namespace voxelmesh {

namespace detail {

inline FeatureVolume resblock3d(const FeatureVolume& x, WeightStore& ws,
                                const std::string& prefix) {
    int c = x.channels;
    FeatureVolume h = conv3d(x, ws.get(prefix + ".conv1.weight", {c, c, 3, 3, 3}),
                             ws.get(prefix + ".conv1.bias", {c}), 1);
    relu_inplace(h.data);
    h = conv3d(h, ws.get(prefix + ".conv2.weight", {c, c, 3, 3, 3}),
               ws.get(prefix + ".conv2.bias", {c}), 1);
    for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] += x.data[i];
    relu_inplace(h.data);
    return h;
}

inline FeatureVolume upsample_nearest(const FeatureVolume& x) {
    FeatureVolume out(x.resolution * 2, x.channels);
    for (int k = 0; k < out.resolution; ++k)
        for (int j = 0; j < out.resolution; ++j)
            for (int i = 0; i < out.resolution; ++i) {
                const float* src = x.at(i / 2, j / 2, k / 2);
                float* dst = out.at(i, j, k);
                for (int c = 0; c < x.channels; ++c) dst[c] = src[c];
            }
    return out;
}

/// Applies projection-aware cross-attention to every voxel of a level grid.
inline void attend_level(FeatureVolume& x, const GridSpec& level_spec, const ViewSet& views,
                         const std::vector<EncodedView>& encoded, const ArchConfig& config,
                         WeightStore& ws, const std::string& prefix) {
    auto w = CrossAttentionWeights::fetch(ws, prefix, x.channels, pixel_feature_width(config));
    for (int k = 0; k < x.resolution; ++k)
        for (int j = 0; j < x.resolution; ++j)
            for (int i = 0; i < x.resolution; ++i) {
                Vec3f pos = level_spec.voxel_center(i, j, k);
                auto pixels = collect_pixel_features(pos, views, encoded, config);
                float* f = x.at(i, j, k);
                std::vector<float> v = projection_aware_cross_attention(
                    std::span<const float>(f, x.channels), pixels, w, config.attention_heads);
                std::copy(v.begin(), v.end(), f);
            }
}

}  // namespace detail

/// Dense UNet + bottleneck transformer predicting coarse occupancy logits.
/// Downsampling interleaves ResNet blocks and projection-aware
/// cross-attention per level; the upsampling path adds skip connections.
inline DenseVolume voxelformer_forward(const ViewSet& views,
                                       const std::vector<EncodedView>& encoded,
                                       const Aabbf& bounds, const ArchConfig& config,
                                       WeightStore& ws, const FormerOptions& opts = {}) {
    config.validate();
    views.validate();
    const auto& levels = config.dense_levels;
    int res0 = levels[0].resolution;

    // shared learnable start token
    const Tensor& token = ws.get("voxelformer.token", {levels[0].channels});
    FeatureVolume x(res0, levels[0].channels);
    for (int v = 0; v < res0 * res0 * res0; ++v)
        std::copy(token.data.begin(), token.data.end(),
                  x.data.data() + static_cast<std::size_t>(v) * x.channels);

    std::vector<FeatureVolume> skips;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        std::string lp = "voxelformer.down" + std::to_string(l);
        GridSpec level_spec(levels[l].resolution, bounds);
        x = detail::resblock3d(x, ws, lp + ".res");
        detail::attend_level(x, level_spec, views, encoded, config, ws, lp + ".attn");
        skips.push_back(x);
        if (l + 1 < levels.size()) {
            int stride = levels[l].resolution / levels[l + 1].resolution;
            if (stride != 1 && stride != 2)
                throw Error("voxelformer: level resolutions must halve or repeat");
            x = conv3d(x,
                       ws.get(lp + ".down.weight",
                              {levels[l + 1].channels, levels[l].channels, 3, 3, 3}),
                       ws.get(lp + ".down.bias", {levels[l + 1].channels}), stride);
            relu_inplace(x.data);
        }
    }

    if (opts.enable_transformer && config.dense_transformer_layers > 0) {
        int tw = config.dense_transformer_width;
        int cl = x.channels;
        const Tensor& win = ws.get("voxelformer.bottleneck.in.weight", {tw, cl});
        const Tensor& bin = ws.get("voxelformer.bottleneck.in.bias", {tw});
        const Tensor& wout = ws.get("voxelformer.bottleneck.out.weight", {cl, tw});
        const Tensor& bout = ws.get("voxelformer.bottleneck.out.bias", {cl});
        int n = x.resolution;
        std::vector<std::vector<float>> tokens;
        tokens.reserve(static_cast<std::size_t>(n) * n * n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    std::vector<float> t =
                        linear(std::span<const float>(x.at(i, j, k), cl), win, bin);
                    std::vector<float> pe = sinusoidal_position_encoding({i, j, k}, tw);
                    for (int c = 0; c < tw; ++c) t[c] += pe[c];
                    tokens.push_back(std::move(t));
                }
        for (int layer = 0; layer < config.dense_transformer_layers; ++layer)
            transformer_layer(tokens, ws,
                              "voxelformer.bottleneck.layer" + std::to_string(layer), tw,
                              config.attention_heads);
        std::size_t t = 0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i, ++t)
                    linear(tokens[t], wout, bout, std::span<float>(x.at(i, j, k), cl));
    }

    for (std::size_t l = levels.size() - 1; l-- > 0;) {
        std::string lp = "voxelformer.up" + std::to_string(l);
        if (levels[l].resolution == 2 * levels[l + 1].resolution)
            x = detail::upsample_nearest(x);
        x = conv3d(x, ws.get(lp + ".conv.weight", {levels[l].channels, x.channels, 3, 3, 3}),
                   ws.get(lp + ".conv.bias", {levels[l].channels}), 1);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += skips[l].data[i];
        x = detail::resblock3d(x, ws, lp + ".res");
    }

    const Tensor& whead = ws.get("voxelformer.head.weight", {1, x.channels});
    const Tensor& bhead = ws.get("voxelformer.head.bias", {1});
    DenseVolume logits(GridSpec(res0, bounds));
    for (int k = 0; k < res0; ++k)
        for (int j = 0; j < res0; ++j)
            for (int i = 0; i < res0; ++i) {
                float out;
                linear(std::span<const float>(x.at(i, j, k), x.channels), whead, bhead,
                       std::span<float>(&out, 1));
                logits.at(i, j, k) = out;
            }
    return logits;
}

}  // namespace voxelmesh
