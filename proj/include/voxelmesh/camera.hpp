// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxelmesh/image.hpp"
#include "voxelmesh/math.hpp"

namespace voxelmesh {

/// Pinhole camera, +z forward, y-down image axes. Pixel (u,v) with u along
/// image width. cam_to_world is rigid (rotation orthonormal, det +1).
struct Camera {
    float fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    Rigidf cam_to_world;

    void validate() const {
        if (fx <= 0 || fy <= 0) throw Error("Camera: focal lengths must be positive");
        if (width <= 0 || height <= 0) throw Error("Camera: image size must be positive");
        Mat3f rtr = cam_to_world.rotation.transposed() * cam_to_world.rotation;
        Mat3f id = Mat3f::identity();
        for (int i = 0; i < 9; ++i)
            if (std::abs(rtr.m[i] - id.m[i]) > 1e-5f)
                throw Error("Camera: rotation is not orthonormal");
        if (cam_to_world.rotation.det() < 0)
            throw Error("Camera: rotation determinant must be +1");
    }

    Rigidf world_to_cam() const { return cam_to_world.inverse(); }

    /// Camera position in world coordinates.
    Vec3f position() const { return cam_to_world.translation; }
};

struct Projection {
    float u = 0, v = 0;
    float depth = 0;  // distance along the camera forward (+z) axis
    bool valid = false;  // false when the point is at or behind the camera
};

/// Standard pinhole projection of a world point.
template <typename T>
inline void project_t(const Camera& cam, const Vec3<T>& world, T& u, T& v, T& depth,
                      bool& valid) {
    Rigidf w2c = cam.world_to_cam();
    Vec3<T> p;
    {
        const Mat3f& r = w2c.rotation;
        p.x = T(r.m[0]) * world.x + T(r.m[1]) * world.y + T(r.m[2]) * world.z + T(w2c.translation.x);
        p.y = T(r.m[3]) * world.x + T(r.m[4]) * world.y + T(r.m[5]) * world.z + T(w2c.translation.y);
        p.z = T(r.m[6]) * world.x + T(r.m[7]) * world.y + T(r.m[8]) * world.z + T(w2c.translation.z);
    }
    depth = p.z;
    valid = depth > T(0);
    if (!valid) { u = T(0); v = T(0); return; }
    u = T(cam.fx) * p.x / p.z + T(cam.cx);
    v = T(cam.fy) * p.y / p.z + T(cam.cy);
}

inline Projection project(const Camera& cam, const Vec3f& point) {
    Projection out;
    float u, v, d;
    bool valid;
    project_t<float>(cam, point, u, v, d, valid);
    out.u = u; out.v = v; out.depth = d; out.valid = valid;
    return out;
}

/// Inverse of project: world point at pixel (u,v) and forward depth d.
inline Vec3f unproject(const Camera& cam, float u, float v, float depth) {
    Vec3f p_cam{(u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth};
    return cam.cam_to_world * p_cam;
}

/// Rotates camera-frame normals into the world frame. Mask unchanged,
/// unit norms preserved.
inline Image normals_to_world(const Image& normal_map, const Camera& cam) {
    if (normal_map.channels != 3) throw Error("normals_to_world: expected 3-channel map");
    Image out = normal_map;
    const Mat3f& r = cam.cam_to_world.rotation;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const float* n = normal_map.pixel(x, y);
            Vec3f w = r * Vec3f{n[0], n[1], n[2]};
            float* o = out.pixel(x, y);
            o[0] = w.x; o[1] = w.y; o[2] = w.z;
        }
    return out;
}

///// One posed input view: RGB in [0,1], camera-frame normal map
/// with unit-norm valid pixels, binary foreground mask.
struct View {
    Camera camera;
    Image rgb;     // H x W x 3
    Image normal;  // H x W x 3
    Image mask;    // H x W x 1, values in {0,1}
};

struct ViewSet {
    std::vector<View> views;

    void validate() const {
        if (views.empty()) throw Error("ViewSet: at least one view required");
        int w = views[0].rgb.width, h = views[0].rgb.height;
        for (const auto& v : views) {
            v.camera.validate();
            if (v.rgb.width != w || v.rgb.height != h || v.normal.width != w ||
                v.normal.height != h || v.mask.width != w || v.mask.height != h)
                throw Error("ViewSet: all views must share the image size");
            if (v.rgb.channels != 3 || v.normal.channels != 3 || v.mask.channels != 1)
                throw Error("ViewSet: bad channel layout");
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (v.mask.at(x, y, 0) == 0.0f) continue;
                    const float* n = v.normal.pixel(x, y);
                    float len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                    if (std::abs(len - 1.0f) > 1e-3f)
                        throw Error("ViewSet: masked normal pixel is not unit length");
                }
        }
    }

    int size() const { return static_cast<int>(views.size()); }
};

// ---------------------------------------------------------------------------
// Camera rig JSON: a list of {fx, fy, cx, cy, width, height,
// cam_to_world: 16 floats row-major}.
// ---------------------------------------------------------------------------

inline nlohmann::json camera_to_json(const Camera& cam) {
    std::vector<float> m(16, 0.0f);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r * 4 + c] = cam.cam_to_world.rotation(r, c);
        m[r * 4 + 3] = (&cam.cam_to_world.translation.x)[r];
    }
    m[15] = 1.0f;
    return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},     {"cy", cam.cy},
            {"width", cam.width}, {"height", cam.height}, {"cam_to_world", m}};
}

inline Camera camera_from_json(const nlohmann::json& j) {
    Camera cam;
    cam.fx = j.at("fx").get<float>();
    cam.fy = j.at("fy").get<float>();
    cam.cx = j.at("cx").get<float>();
    cam.cy = j.at("cy").get<float>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    auto m = j.at("cam_to_world").get<std::vector<float>>();
    if (m.size() != 16) throw Error("camera rig: cam_to_world must hold 16 floats");
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam.cam_to_world.rotation(r, c) = m[r * 4 + c];
        (&cam.cam_to_world.translation.x)[r] = m[r * 4 + 3];
    }
    cam.validate();
    return cam;
}

inline void save_camera_rig(const std::vector<Camera>& rig, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& cam : rig) j.push_back(camera_to_json(cam));
    std::ofstream os(path);
    if (!os) throw Error("save_camera_rig: cannot open " + path);
    os << j.dump(2) << "\n";
}

inline std::vector<Camera> load_camera_rig(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_camera_rig: cannot open " + path);
    nlohmann::json j;
    is >> j;
    std::vector<Camera> rig;
    for (const auto& e : j) rig.push_back(camera_from_json(e));
    return rig;
}

}  // namespace voxelmesh
