// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxelmesh/image.hpp"
#include "voxelmesh/volume.hpp"

namespace voxelmesh {

/// The six loss-term weights. Defaults are the published values.
struct LossWeights {
    float mse_color = 80.0f;
    float lpips_color = 2.0f;
    float mse_normal = 16.0f;
    float lpips_normal = 2.0f;
    float occ = 8.0f;
    float sdf = 8.0f;

    void validate() const {
        for (float w : {mse_color, lpips_color, mse_normal, lpips_normal, occ, sdf})
            if (w < 0) throw Error("LossWeights: weights must be non-negative");
    }
};

struct LossBreakdown {
    double mse_color = 0;
    double lpips_color = 0;  // perceptual substitute, not LPIPS
    double mse_normal = 0;
    double lpips_normal = 0;
    double occ = 0;
    double sdf = 0;
    double total = 0;

    nlohmann::json to_json() const {
        return {{"mse_color", mse_color},   {"lpips_color", lpips_color},
                {"mse_normal", mse_normal}, {"lpips_normal", lpips_normal},
                {"occ", occ},               {"sdf", sdf},
                {"total", total}};
    }
};

struct MseResult {
    double value = 0;
    bool empty_mask = false;  // mask union was empty; value defined as 0
};

/// Mean squared error over pixels in the union of the two masks (all pixels
/// when masks are null). Summation order is fixed.
inline MseResult image_mse(const Image& a, const Image& b, const Image* mask_a = nullptr,
                           const Image* mask_b = nullptr) {
    if (!a.same_shape(b)) throw Error("image_mse: shape mismatch");
    double acc = 0;
    std::size_t count = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            bool in = true;
            if (mask_a && mask_b)
                in = mask_a->at(x, y, 0) != 0.0f || mask_b->at(x, y, 0) != 0.0f;
            if (!in) continue;
            for (int c = 0; c < a.channels; ++c) {
                double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
                acc += d * d;
                ++count;
            }
        }
    MseResult out;
    if (count == 0) {
        out.empty_mask = true;
        return out;
    }
    out.value = acc / count;
    return out;
}

/// d(image_mse)/d(a) per pixel channel: 2 (a - b) / N over the mask union.
inline Image image_mse_gradient(const Image& a, const Image& b, const Image* mask_a = nullptr,
                                const Image* mask_b = nullptr) {
    if (!a.same_shape(b)) throw Error("image_mse_gradient: shape mismatch");
    Image grad(a.width, a.height, a.channels, 0.0f);
    std::size_t count = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            bool in = true;
            if (mask_a && mask_b)
                in = mask_a->at(x, y, 0) != 0.0f || mask_b->at(x, y, 0) != 0.0f;
            if (in) count += a.channels;
        }
    if (count == 0) return grad;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            bool in = true;
            if (mask_a && mask_b)
                in = mask_a->at(x, y, 0) != 0.0f || mask_b->at(x, y, 0) != 0.0f;
            if (!in) continue;
            for (int c = 0; c < a.channels; ++c)
                grad.at(x, y, c) = 2.0f * (a.at(x, y, c) - b.at(x, y, c)) / count;
        }
    return grad;
}

namespace detail {

/// Per-channel gradient-magnitude image (forward differences, zero at the
/// trailing row/column).
inline Image gradient_magnitude(const Image& img) {
    Image out(img.width, img.height, img.channels, 0.0f);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                float gx = x + 1 < img.width ? img.at(x + 1, y, c) - img.at(x, y, c) : 0.0f;
                float gy = y + 1 < img.height ? img.at(x, y + 1, c) - img.at(x, y, c) : 0.0f;
                out.at(x, y, c) = std::sqrt(gx * gx + gy * gy);
            }
    return out;
}

inline double mean_abs_diff(const Image& a, const Image& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        acc += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
    return acc / a.data.size();
}

}  // namespace detail

/// Perceptual-loss substitute (NOT LPIPS): L1 difference of per-channel
/// image-gradient magnitudes, summed over a 3-level box-downsampling pyramid
/// with unit weights. Invariant under a shared global intensity shift of
/// both images.
inline double perceptual_substitute(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw Error("perceptual_substitute: shape mismatch");
    Image la = a, lb = b;
    double loss = 0;
    for (int level = 0; level < 3; ++level) {
        loss += detail::mean_abs_diff(detail::gradient_magnitude(la),
                                      detail::gradient_magnitude(lb));
        if (level < 2) {
            la = downsample2(la);
            lb = downsample2(lb);
        }
    }
    return loss;
}

inline double volume_mse(const DenseVolume& a, const DenseVolume& b) {
    if (!(a.spec == b.spec)) throw Error("volume_mse: resolution or bounds mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = static_cast<double>(a.values[i]) - b.values[i];
        acc += d * d;
    }
    return acc / a.values.size();
}

/// One rendered/reference image pair with masks.
struct SupervisionView {
    Image pred_rgb, ref_rgb;
    Image pred_normal, ref_normal;
    Image pred_mask, ref_mask;
};

/// The six-term training loss: masked MSE + perceptual substitute on color
/// and normal renders (averaged over views), plus occupancy and SDF volume
/// MSE. total = sum of weighted terms.
inline LossBreakdown total_loss(const std::vector<SupervisionView>& views,
                                const DenseVolume& pred_occ, const DenseVolume& gt_occ,
                                const DenseVolume& pred_sdf, const DenseVolume& gt_sdf,
                                const LossWeights& weights = {}) {
    weights.validate();
    LossBreakdown out;
    if (!views.empty()) {
        for (const auto& v : views) {
            out.mse_color += image_mse(v.pred_rgb, v.ref_rgb, &v.pred_mask, &v.ref_mask).value;
            out.mse_normal +=
                image_mse(v.pred_normal, v.ref_normal, &v.pred_mask, &v.ref_mask).value;
            out.lpips_color += perceptual_substitute(v.pred_rgb, v.ref_rgb);
            out.lpips_normal += perceptual_substitute(v.pred_normal, v.ref_normal);
        }
        out.mse_color /= views.size();
        out.mse_normal /= views.size();
        out.lpips_color /= views.size();
        out.lpips_normal /= views.size();
    }
    out.occ = volume_mse(pred_occ, gt_occ);
    out.sdf = volume_mse(pred_sdf, gt_sdf);
    out.total = weights.mse_color * out.mse_color + weights.lpips_color * out.lpips_color +
                weights.mse_normal * out.mse_normal + weights.lpips_normal * out.lpips_normal +
                weights.occ * out.occ + weights.sdf * out.sdf;
    return out;
}

}  // namespace voxelmesh
