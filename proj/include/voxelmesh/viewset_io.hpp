// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "voxelmesh/camera.hpp"
#include "voxelmesh/image_io.hpp"

namespace voxelmesh {

// ---------------------------------------------------------------------------
// View-set directory layout: rig.json plus, per view i,
//   view_%03d_rgb.png, view_%03d_normal.{png|pfm}, view_%03d_mask.png.
// PNG normal maps use the [-1,1] -> [0,1] encoding; PFM stores raw floats.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string view_file(const std::string& dir, int i, const char* kind,
                             const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "view_%03d_%s.%s", i, kind, ext);
    return (std::filesystem::path(dir) / buf).string();
}

}  // namespace detail

inline void save_view_set(const ViewSet& set, const std::string& dir,
                          bool pfm_normals = false) {
    set.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("save_view_set: cannot create directory " + dir);
    std::vector<Camera> rig;
    for (int i = 0; i < set.size(); ++i) {
        const View& v = set.views[i];
        rig.push_back(v.camera);
        save_png(v.rgb, detail::view_file(dir, i, "rgb", "png"));
        if (pfm_normals)
            save_pfm(v.normal, detail::view_file(dir, i, "normal", "pfm"));
        else
            save_png(encode_normal_map(v.normal), detail::view_file(dir, i, "normal", "png"));
        save_png(v.mask, detail::view_file(dir, i, "mask", "png"));
    }
    save_camera_rig(rig, (std::filesystem::path(dir) / "rig.json").string());
}

inline ViewSet load_view_set(const std::string& dir) {
    std::string rig_path = (std::filesystem::path(dir) / "rig.json").string();
    if (!std::filesystem::exists(rig_path)) throw Error("load_view_set: missing " + rig_path);
    std::vector<Camera> rig = load_camera_rig(rig_path);
    ViewSet set;
    for (int i = 0; i < static_cast<int>(rig.size()); ++i) {
        View v;
        v.camera = rig[i];
        v.rgb = load_png(detail::view_file(dir, i, "rgb", "png"));
        std::string pfm = detail::view_file(dir, i, "normal", "pfm");
        v.mask = load_png(detail::view_file(dir, i, "mask", "png"));
        for (float& m : v.mask.data) m = m > 0.5f ? 1.0f : 0.0f;
        if (std::filesystem::exists(pfm)) {
            v.normal = load_pfm(pfm);
        } else {
            v.normal = decode_normal_map(load_png(detail::view_file(dir, i, "normal", "png")));
            // renormalize away 8-bit quantization so the unit invariant holds
            for (int y = 0; y < v.normal.height; ++y)
                for (int x = 0; x < v.normal.width; ++x) {
                    if (v.mask.at(x, y, 0) == 0.0f) continue;
                    float* n = v.normal.pixel(x, y);
                    float len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                    if (len > 1e-6f) {
                        n[0] /= len; n[1] /= len; n[2] /= len;
                    }
                }
        }
        set.views.push_back(std::move(v));
    }
    set.validate();
    return set;
}

}  // namespace voxelmesh
