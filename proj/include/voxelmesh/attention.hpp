// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "voxelmesh/camera.hpp"
#include "voxelmesh/encoder.hpp"
#include "voxelmesh/nn.hpp"

namespace voxelmesh {

struct FormerOptions {
    bool enable_transformer = true;
};

/// Projected 2D pixel feature of one view for one voxel: the concatenation
/// [rgb patch feature, normal patch feature, rgb value, normal value].
struct ProjectedPixelFeature {
    std::vector<float> p;
    bool valid = false;  // false when the projection falls behind the camera or off-image
};

inline int pixel_feature_width(const ArchConfig& config) {
    return 2 * config.encoder.channels + 6;
}

/// Assembles the m projected pixel features of a world point.
inline std::vector<ProjectedPixelFeature> collect_pixel_features(
    const Vec3f& pos, const ViewSet& views, const std::vector<EncodedView>& encoded,
    const ArchConfig& config) {
    int ec = config.encoder.channels;
    std::vector<ProjectedPixelFeature> out(views.views.size());
    for (std::size_t i = 0; i < views.views.size(); ++i) {
        const View& view = views.views[i];
        Projection proj = project(view.camera, pos);
        if (!proj.valid) continue;
        if (proj.u < 0 || proj.v < 0 || proj.u > view.rgb.width - 1 ||
            proj.v > view.rgb.height - 1)
            continue;
        auto& f = out[i];
        f.valid = true;
        f.p.resize(2 * ec + 6);
        sample_feature_map(encoded[i].rgb, proj.u, proj.v, config.encoder.stride, f.p.data());
        sample_feature_map(encoded[i].normal, proj.u, proj.v, config.encoder.stride,
                           f.p.data() + ec);
        auto rgb = sample_image(view.rgb, proj.u, proj.v);
        auto nrm = sample_image(view.normal, proj.u, proj.v);
        for (int c = 0; c < 3; ++c) {
            f.p[2 * ec + c] = rgb.value[c];
            f.p[2 * ec + 3 + c] = nrm.value[c];
        }
    }
    return out;
}

/// Weights of one projection-aware cross-attention module. The voxel feature
/// and the projected pixel features have different widths, so each side has
/// its own key/value projections.
struct CrossAttentionWeights {
    const Tensor* wq;        // [C, C]
    const Tensor* bq;        // [C]
    const Tensor* wk_voxel;  // [C, C]
    const Tensor* bk_voxel;
    const Tensor* wv_voxel;  // [C, C]
    const Tensor* bv_voxel;
    const Tensor* wk_pixel;  // [C, Cp]
    const Tensor* bk_pixel;
    const Tensor* wv_pixel;  // [C, Cp]
    const Tensor* bv_pixel;

    static CrossAttentionWeights fetch(WeightStore& ws, const std::string& prefix,
                                       int voxel_dim, int pixel_dim) {
        CrossAttentionWeights w;
        w.wq = &ws.get(prefix + ".q.weight", {voxel_dim, voxel_dim});
        w.bq = &ws.get(prefix + ".q.bias", {voxel_dim});
        w.wk_voxel = &ws.get(prefix + ".k_voxel.weight", {voxel_dim, voxel_dim});
        w.bk_voxel = &ws.get(prefix + ".k_voxel.bias", {voxel_dim});
        w.wv_voxel = &ws.get(prefix + ".v_voxel.weight", {voxel_dim, voxel_dim});
        w.bv_voxel = &ws.get(prefix + ".v_voxel.bias", {voxel_dim});
        w.wk_pixel = &ws.get(prefix + ".k_pixel.weight", {voxel_dim, pixel_dim});
        w.bk_pixel = &ws.get(prefix + ".k_pixel.bias", {voxel_dim});
        w.wv_pixel = &ws.get(prefix + ".v_pixel.weight", {voxel_dim, pixel_dim});
        w.bv_pixel = &ws.get(prefix + ".v_pixel.bias", {voxel_dim});
        return w;
    }
};

/// Single-query softmax attention: query from the voxel feature, keys/values
/// from the valid projected pixel features plus the voxel feature itself
/// (m+1 tokens when all views are valid). Views with invalid projections
/// contribute no key/value; with every view invalid the output is the voxel's
/// own value vector.
inline std::vector<float> projection_aware_cross_attention(
    std::span<const float> voxel, const std::vector<ProjectedPixelFeature>& pixels,
    const CrossAttentionWeights& w, int heads = 1) {
    if (pixels.empty()) throw Error("cross_attention: m must be >= 1");
    int dim = w.wq->shape[0];
    if (static_cast<int>(voxel.size()) != dim)
        throw Error("cross_attention: voxel feature width mismatch");
    if (heads < 1 || dim % heads != 0)
        throw Error("cross_attention: head count must divide feature width");
    int pixel_dim = w.wk_pixel->shape[1];

    std::vector<float> q = linear(voxel, *w.wq, *w.bq);
    std::vector<std::vector<float>> keys, values;
    for (const auto& pf : pixels) {
        if (!pf.valid) continue;
        if (static_cast<int>(pf.p.size()) != pixel_dim)
            throw Error("cross_attention: pixel feature width mismatch");
        keys.push_back(linear(pf.p, *w.wk_pixel, *w.bk_pixel));
        values.push_back(linear(pf.p, *w.wv_pixel, *w.bv_pixel));
    }
    keys.push_back(linear(voxel, *w.wk_voxel, *w.bk_voxel));
    values.push_back(linear(voxel, *w.wv_voxel, *w.bv_voxel));

    int d_head = dim / heads;
    float scale = 1.0f / std::sqrt(static_cast<float>(d_head));
    std::vector<float> out(dim, 0.0f);
    std::size_t n = keys.size();
    std::vector<float> scores(n);
    for (int h = 0; h < heads; ++h) {
        int off = h * d_head;
        for (std::size_t s = 0; s < n; ++s) {
            float dotp = 0;
            for (int i = 0; i < d_head; ++i) dotp += q[off + i] * keys[s][off + i];
            scores[s] = dotp * scale;
        }
        softmax_inplace(std::span<float>(scores.data(), n));
        for (std::size_t s = 0; s < n; ++s)
            for (int i = 0; i < d_head; ++i) out[off + i] += scores[s] * values[s][off + i];
    }
    return out;
}

}  // namespace voxelmesh
