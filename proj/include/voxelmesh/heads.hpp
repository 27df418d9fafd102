// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

#include "voxelmesh/arch.hpp"
#include "voxelmesh/nn.hpp"

namespace voxelmesh {

struct HeadOutputs {
    float sdf = 0.0f;   // unbounded
    Vec3f color{};      // in [0,1]^3 (sigmoid output)
    Vec3f normal{};     // unit length
};

namespace detail {

inline std::vector<float> head_mlp(std::span<const float> feature, const ArchConfig& config,
                                   WeightStore& ws, const std::string& prefix, int out_dim) {
    int in = static_cast<int>(feature.size());
    int hidden = config.head_hidden;
    std::vector<float> h = linear(feature, ws.get(prefix + ".fc1.weight", {hidden, in}),
                                  ws.get(prefix + ".fc1.bias", {hidden}));
    relu_inplace(h);
    return linear(h, ws.get(prefix + ".fc2.weight", {out_dim, hidden}),
                  ws.get(prefix + ".fc2.bias", {out_dim}));
}

}  // namespace detail

/// The three tiny MLP heads over an interpolated sparse feature: SDF scalar,
/// RGB color via sigmoid, unit normal via explicit normalization.
inline HeadOutputs query_heads(std::span<const float> feature, const ArchConfig& config,
                               WeightStore& ws) {
    HeadOutputs out;
    out.sdf = detail::head_mlp(feature, config, ws, "heads.sdf", 1)[0];
    std::vector<float> c = detail::head_mlp(feature, config, ws, "heads.color", 3);
    out.color = {sigmoid(c[0]), sigmoid(c[1]), sigmoid(c[2])};
    std::vector<float> n = detail::head_mlp(feature, config, ws, "heads.normal", 3);
    Vec3f nv{n[0], n[1], n[2]};
    float len = norm(nv);
    out.normal = len > 1e-12f ? nv / len : Vec3f{0, 0, 1};
    return out;
}

}  // namespace voxelmesh
