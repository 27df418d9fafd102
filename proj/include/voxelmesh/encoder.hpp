// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "voxelmesh/arch.hpp"
#include "voxelmesh/camera.hpp"
#include "voxelmesh/nn.hpp"
#include "voxelmesh/weights.hpp"

namespace voxelmesh {

/// Per-view encoder output: one feature map per input stream.
struct EncodedView {
    FeatureMap2D rgb;
    FeatureMap2D normal;
};

namespace detail {

inline FeatureMap2D image_to_map(const Image& img) {
    FeatureMap2D m(img.width, img.height, img.channels);
    m.data = img.data;
    return m;
}

/// Strided conv stack: one stride-1 layer then log2(stride) stride-2 layers.
inline FeatureMap2D encode_stream(const FeatureMap2D& input, WeightStore& ws,
                                  const std::string& prefix, int stride, int channels) {
    if (stride < 1 || (stride & (stride - 1)) != 0)
        throw Error("encoder: stride must be a power of two");
    FeatureMap2D x = conv2d(input, ws.get(prefix + ".conv0.weight", {channels, input.channels, 3, 3}),
                            ws.get(prefix + ".conv0.bias", {channels}), 1);
    relu_inplace(x.data);
    int stage = 1;
    for (int s = stride; s > 1; s /= 2, ++stage) {
        std::string p = prefix + ".conv" + std::to_string(stage);
        x = conv2d(x, ws.get(p + ".weight", {channels, channels, 3, 3}),
                   ws.get(p + ".bias", {channels}), 2);
        if (s > 2) relu_inplace(x.data);
    }
    return x;
}

}  // namespace detail

/// Fixture 2D encoder standing in for a learned feature extractor: a small
/// strided convolutional stack with seeded weights, one stack per stream.
inline std::vector<EncodedView> encode_views(const ViewSet& views, const ArchConfig& config,
                                             WeightStore& ws) {
    views.validate();
    int stride = config.encoder.stride;
    std::vector<EncodedView> out;
    for (const auto& view : views.views) {
        if (view.rgb.width % stride != 0 || view.rgb.height % stride != 0)
            throw Error("encode_views: image size not divisible by encoder stride");
        EncodedView ev;
        ev.rgb = detail::encode_stream(detail::image_to_map(view.rgb), ws, "encoder.rgb",
                                       stride, config.encoder.channels);
        ev.normal = detail::encode_stream(detail::image_to_map(view.normal), ws,
                                          "encoder.normal", stride, config.encoder.channels);
        out.push_back(std::move(ev));
    }
    return out;
}

/// Bilinear sample of an encoder feature map at input-image pixel (u,v).
/// Feature pixel (i,j) sits at input pixel ((i+0.5)*stride - 0.5).
inline void sample_feature_map(const FeatureMap2D& map, float u, float v, int stride,
                               float* out) {
    float fu = std::clamp((u + 0.5f) / stride - 0.5f, 0.0f, static_cast<float>(map.width - 1));
    float fv = std::clamp((v + 0.5f) / stride - 0.5f, 0.0f, static_cast<float>(map.height - 1));
    int x0 = std::min(static_cast<int>(fu), std::max(map.width - 2, 0));
    int y0 = std::min(static_cast<int>(fv), std::max(map.height - 2, 0));
    int x1 = std::min(x0 + 1, map.width - 1);
    int y1 = std::min(y0 + 1, map.height - 1);
    float tx = fu - x0, ty = fv - y0;
    const float* p00 = map.at(x0, y0);
    const float* p10 = map.at(x1, y0);
    const float* p01 = map.at(x0, y1);
    const float* p11 = map.at(x1, y1);
    for (int c = 0; c < map.channels; ++c)
        out[c] = (1 - tx) * (1 - ty) * p00[c] + tx * (1 - ty) * p10[c] +
                 (1 - tx) * ty * p01[c] + tx * ty * p11[c];
}

}  // namespace voxelmesh
