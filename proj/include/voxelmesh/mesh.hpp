// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

/// Indexed triangle mesh with optional per-vertex color and normal texture.
/// The normal texture is a learned/prescribed field, distinct from normals
/// derived from the geometry (see vertex_normals).
struct TriMesh {
    std::vector<Vec3f> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3f> colors;          // optional, [0,1]^3, per vertex
    std::vector<Vec3f> normal_texture;  // optional, unit vectors, per vertex

    bool empty() const { return faces.empty(); }
    bool has_colors() const { return colors.size() == vertices.size() && !vertices.empty(); }
    bool has_normal_texture() const {
        return normal_texture.size() == vertices.size() && !vertices.empty();
    }

    void validate() const {
        int n = static_cast<int>(vertices.size());
        for (const auto& f : faces)
            for (int idx : f)
                if (idx < 0 || idx >= n) throw Error("TriMesh: face index out of range");
        if (!colors.empty() && colors.size() != vertices.size())
            throw Error("TriMesh: color count != vertex count");
        if (!normal_texture.empty() && normal_texture.size() != vertices.size())
            throw Error("TriMesh: normal texture count != vertex count");
    }

    Aabbf bounds() const {
        Aabbf b;
        for (const auto& v : vertices) b.expand(v);
        return b;
    }

    double face_area(std::size_t f) const {
        const Vec3f& a = vertices[faces[f][0]];
        const Vec3f& b = vertices[faces[f][1]];
        const Vec3f& c = vertices[faces[f][2]];
        return 0.5 * norm(cross((b - a).cast<double>(), (c - a).cast<double>()));
    }

    double total_area() const {
        double s = 0;
        for (std::size_t f = 0; f < faces.size(); ++f) s += face_area(f);
        return s;
    }
};

struct VertexNormalResult {
    std::vector<Vec3f> normals;
    int isolated_count = 0;  // vertices with no incident face area; their normal is zero
};

/// Area-weighted per-vertex unit normals. Outward on consistently oriented
/// closed meshes.
inline VertexNormalResult vertex_normals(const TriMesh& mesh) {
    mesh.validate();
    VertexNormalResult out;
    std::vector<Vec3d> acc(mesh.vertices.size(), Vec3d{});
    for (const auto& f : mesh.faces) {
        Vec3d a = mesh.vertices[f[0]].cast<double>();
        Vec3d b = mesh.vertices[f[1]].cast<double>();
        Vec3d c = mesh.vertices[f[2]].cast<double>();
        Vec3d n = cross(b - a, c - a);  // magnitude = 2 * area
        acc[f[0]] += n;
        acc[f[1]] += n;
        acc[f[2]] += n;
    }
    out.normals.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        double len = norm(acc[i]);
        if (len <= 1e-30) {
            out.normals[i] = {0, 0, 0};
            ++out.isolated_count;
        } else {
            out.normals[i] = (acc[i] / len).cast<float>();
        }
    }
    return out;
}

/// Area-weighted uniform surface samples, deterministic per seed.
inline std::vector<Vec3f> sample_surface(const TriMesh& mesh, std::size_t n, uint64_t seed) {
    if (mesh.empty()) throw Error("sample_surface: empty mesh");
    std::vector<double> cum(mesh.faces.size());
    double total = 0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += mesh.face_area(f);
        cum[f] = total;
    }
    if (total <= 0) throw Error("sample_surface: zero-area mesh");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vec3f> pts;
    pts.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        double r = uni(rng) * total;
        std::size_t f = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
        if (f >= mesh.faces.size()) f = mesh.faces.size() - 1;
        double u = uni(rng), v = uni(rng);
        if (u + v > 1.0) { u = 1.0 - u; v = 1.0 - v; }
        const Vec3f& a = mesh.vertices[mesh.faces[f][0]];
        const Vec3f& b = mesh.vertices[mesh.faces[f][1]];
        const Vec3f& c = mesh.vertices[mesh.faces[f][2]];
        pts.push_back(a + (b - a) * static_cast<float>(u) + (c - a) * static_cast<float>(v));
    }
    return pts;
}

/// Scales and centers the mesh so the bounding box has max extent 1 centered
/// at the origin. Returns the applied similarity transform.
inline std::pair<TriMesh, Similarityf> normalize_unit_box(const TriMesh& mesh) {
    if (mesh.vertices.empty()) throw Error("normalize_unit_box: empty mesh");
    Aabbf b = mesh.bounds();
    Vec3f e = b.extent();
    float m = std::max({e.x, e.y, e.z});
    if (m <= 0) throw Error("normalize_unit_box: degenerate mesh extent");
    Similarityf t;
    t.scale = 1.0f / m;
    Vec3f c = b.center();
    t.translation = -c * t.scale;
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = t * v;
    return {out, t};
}

/// Counts boundary (open) edges: edges used by exactly one face.
inline int open_edge_count(const TriMesh& mesh) {
    std::vector<std::pair<uint64_t, int>> edges;
    edges.reserve(mesh.faces.size() * 3);
    for (const auto& f : mesh.faces)
        for (int e = 0; e < 3; ++e) {
            uint64_t a = static_cast<uint32_t>(f[e]);
            uint64_t b = static_cast<uint32_t>(f[(e + 1) % 3]);
            if (a > b) std::swap(a, b);
            edges.emplace_back((a << 32) | b, 1);
        }
    std::sort(edges.begin(), edges.end());
    int open = 0;
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j].first == edges[i].first) ++j;
        if (j - i == 1) ++open;
        i = j;
    }
    return open;
}

// ---------------------------------------------------------------------------
// OBJ import/export. Vertex colors use the common extended "v x y z r g b"
// form; normal texture exported as vn records paired 1:1 with vertices.
// ---------------------------------------------------------------------------

inline void save_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("save_obj: cannot open " + path);
    os.precision(9);
    bool nt = mesh.has_normal_texture();
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3f& v = mesh.vertices[i];
        os << "v " << v.x << ' ' << v.y << ' ' << v.z;
        if (mesh.has_colors()) {
            const Vec3f& c = mesh.colors[i];
            os << ' ' << c.x << ' ' << c.y << ' ' << c.z;
        }
        os << '\n';
    }
    if (nt)
        for (const Vec3f& n : mesh.normal_texture)
            os << "vn " << n.x << ' ' << n.y << ' ' << n.z << '\n';
    for (const auto& f : mesh.faces) {
        if (nt)
            os << "f " << f[0] + 1 << "//" << f[0] + 1 << ' ' << f[1] + 1 << "//" << f[1] + 1
               << ' ' << f[2] + 1 << "//" << f[2] + 1 << '\n';
        else
            os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    if (!os) throw Error("save_obj: write failed for " + path);
}

inline TriMesh load_obj(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_obj: cannot open " + path);
    TriMesh mesh;
    std::vector<Vec3f> vn;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3f v;
            ss >> v.x >> v.y >> v.z;
            mesh.vertices.push_back(v);
            Vec3f c;
            if (ss >> c.x >> c.y >> c.z) mesh.colors.push_back(c);
        } else if (tag == "vn") {
            Vec3f n;
            ss >> n.x >> n.y >> n.z;
            vn.push_back(n);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // take the leading position index of "i", "i/t", "i//n", "i/t/n"
                idx.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
            }
            for (std::size_t t = 2; t < idx.size(); ++t)
                mesh.faces.push_back({idx[0], idx[t - 1], idx[t]});
        }
    }
    if (!mesh.colors.empty() && mesh.colors.size() != mesh.vertices.size()) mesh.colors.clear();
    if (vn.size() == mesh.vertices.size()) mesh.normal_texture = std::move(vn);
    mesh.validate();
    return mesh;
}

// ---------------------------------------------------------------------------
// PLY binary-little-endian export/import with color (uchar) and normal
// texture (float nx ny nz) vertex properties.
// ---------------------------------------------------------------------------

inline void save_ply(const TriMesh& mesh, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_ply: cannot open " + path);
    bool col = mesh.has_colors(), nt = mesh.has_normal_texture();
    os << "ply\nformat binary_little_endian 1.0\n";
    os << "element vertex " << mesh.vertices.size() << "\n";
    os << "property float x\nproperty float y\nproperty float z\n";
    if (nt) os << "property float nx\nproperty float ny\nproperty float nz\n";
    if (col) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    os << "element face " << mesh.faces.size() << "\n";
    os << "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        os.write(reinterpret_cast<const char*>(&mesh.vertices[i]), 12);
        if (nt) os.write(reinterpret_cast<const char*>(&mesh.normal_texture[i]), 12);
        if (col) {
            auto q = [](float v) {
                return static_cast<uint8_t>(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f);
            };
            uint8_t rgb[3] = {q(mesh.colors[i].x), q(mesh.colors[i].y), q(mesh.colors[i].z)};
            os.write(reinterpret_cast<const char*>(rgb), 3);
        }
    }
    for (const auto& f : mesh.faces) {
        uint8_t n = 3;
        os.write(reinterpret_cast<const char*>(&n), 1);
        os.write(reinterpret_cast<const char*>(f.data()), 12);
    }
    if (!os) throw Error("save_ply: write failed for " + path);
}

inline TriMesh load_ply(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("load_ply: cannot open " + path);
    std::string line;
    std::getline(is, line);
    if (line != "ply") throw Error("load_ply: not a PLY file: " + path);
    std::size_t n_vert = 0, n_face = 0;
    struct Prop { std::string name; bool is_uchar; };
    std::vector<Prop> vprops;
    std::string element;
    bool binary = false;
    while (std::getline(is, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            binary = fmt == "binary_little_endian";
        } else if (tag == "element") {
            ss >> element;
            if (element == "vertex") ss >> n_vert;
            else if (element == "face") ss >> n_face;
        } else if (tag == "property" && element == "vertex") {
            std::string type, name;
            ss >> type >> name;
            if (type == "list") continue;
            vprops.push_back({name, type == "uchar"});
        } else if (tag == "end_header") {
            break;
        }
    }
    if (!binary) throw Error("load_ply: only binary_little_endian PLY is supported");
    TriMesh mesh;
    mesh.vertices.resize(n_vert);
    bool has_n = false, has_c = false;
    for (const auto& p : vprops) {
        if (p.name == "nx") has_n = true;
        if (p.name == "red") has_c = true;
    }
    if (has_n) mesh.normal_texture.resize(n_vert);
    if (has_c) mesh.colors.resize(n_vert);
    for (std::size_t i = 0; i < n_vert; ++i) {
        for (const auto& p : vprops) {
            float v;
            if (p.is_uchar) {
                uint8_t b;
                is.read(reinterpret_cast<char*>(&b), 1);
                v = b / 255.0f;
            } else {
                is.read(reinterpret_cast<char*>(&v), 4);
            }
            if (p.name == "x") mesh.vertices[i].x = v;
            else if (p.name == "y") mesh.vertices[i].y = v;
            else if (p.name == "z") mesh.vertices[i].z = v;
            else if (p.name == "nx") mesh.normal_texture[i].x = v;
            else if (p.name == "ny") mesh.normal_texture[i].y = v;
            else if (p.name == "nz") mesh.normal_texture[i].z = v;
            else if (p.name == "red") mesh.colors[i].x = v;
            else if (p.name == "green") mesh.colors[i].y = v;
            else if (p.name == "blue") mesh.colors[i].z = v;
        }
    }
    mesh.faces.resize(n_face);
    for (std::size_t f = 0; f < n_face; ++f) {
        uint8_t cnt;
        is.read(reinterpret_cast<char*>(&cnt), 1);
        if (cnt != 3) throw Error("load_ply: non-triangle face");
        is.read(reinterpret_cast<char*>(mesh.faces[f].data()), 12);
    }
    if (!is) throw Error("load_ply: truncated file " + path);
    mesh.validate();
    return mesh;
}

inline void save_mesh(const TriMesh& mesh, const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply") save_ply(mesh, path);
    else save_obj(mesh, path);
}

inline TriMesh load_mesh(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply") return load_ply(path);
    return load_obj(path);
}

}  // namespace voxelmesh
