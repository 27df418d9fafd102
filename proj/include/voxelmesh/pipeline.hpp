// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxelmesh/enhance.hpp"
#include "voxelmesh/heads.hpp"
#include "voxelmesh/loss.hpp"
#include "voxelmesh/sparse_former.hpp"
#include "voxelmesh/surface_nets.hpp"
#include "voxelmesh/toml_lite.hpp"
#include "voxelmesh/voxelformer.hpp"

namespace voxelmesh {

/// Everything the end-to-end reconstruction needs from one file. Unknown
/// keys are rejected; the defaults reproduce the "toy" preset.
struct PipelineConfig {
    std::string arch = "toy";
    uint64_t seed = 1;
    std::string weights_path;       // empty: seeded initialization
    int sdf_resolution = 32;        // supervision volume resolution
    int extraction_resolution = 0;  // 0: the arch preset's sparse resolution
    float occupancy_band_voxels = 1.5f;
    float occupancy_threshold = 0.5f;
    bool auto_iso = true;  // center the iso level on the mean predicted SDF
    LossWeights loss;
    EnhanceParams enhance;
    bool enhance_enabled = true;

    void validate() const {
        ArchConfig::preset(arch).validate();
        if (sdf_resolution < 2) throw Error("PipelineConfig: sdf_resolution must be >= 2");
        if (extraction_resolution != 0 && extraction_resolution < 2)
            throw Error("PipelineConfig: extraction_resolution must be 0 or >= 2");
        if (occupancy_band_voxels <= 0)
            throw Error("PipelineConfig: occupancy_band_voxels must be positive");
        if (occupancy_threshold <= 0 || occupancy_threshold >= 1)
            throw Error("PipelineConfig: occupancy_threshold must be in (0,1)");
        loss.validate();
        enhance.validate();
    }

    ArchConfig arch_config() const { return ArchConfig::preset(arch); }

    int effective_extraction_resolution() const {
        return extraction_resolution ? extraction_resolution
                                     : arch_config().sparse_resolution();
    }

    nlohmann::json to_json() const {
        return {{"arch", arch},
                {"seed", seed},
                {"weights_path", weights_path},
                {"sdf_resolution", sdf_resolution},
                {"extraction_resolution", extraction_resolution},
                {"occupancy_band_voxels", occupancy_band_voxels},
                {"occupancy_threshold", occupancy_threshold},
                {"auto_iso", auto_iso},
                {"loss",
                 {{"mse_color", loss.mse_color},
                  {"lpips_color", loss.lpips_color},
                  {"mse_normal", loss.mse_normal},
                  {"lpips_normal", loss.lpips_normal},
                  {"occ", loss.occ},
                  {"sdf", loss.sdf}}},
                {"enhance",
                 {{"enabled", enhance_enabled},
                  {"alpha", enhance.alpha},
                  {"beta", enhance.beta},
                  {"iterations", enhance.iterations},
                  {"step_size", enhance.step_size},
                  {"max_displacement", enhance.max_displacement}}}};
    }

    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::string& path);

    /// FNV-1a over the canonical JSON form, combined with the arch hash.
    uint64_t hash() const {
        std::string s = to_json().dump();
        uint64_t h = 14695981039346656037ull;
        for (char ch : s) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ull;
        }
        return h ^ arch_config().hash();
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& scope) {
    if (!j.is_object()) throw Error("config: " + scope + " must be a table");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw Error("config: unknown key '" + scope + it.key() + "'");
}

}  // namespace detail

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(
        j,
        {"arch", "seed", "weights_path", "sdf_resolution", "extraction_resolution",
         "occupancy_band_voxels", "occupancy_threshold", "auto_iso", "loss", "enhance"},
        "");
    PipelineConfig c;
    if (j.contains("arch")) c.arch = j["arch"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("weights_path")) c.weights_path = j["weights_path"].get<std::string>();
    if (j.contains("sdf_resolution")) c.sdf_resolution = j["sdf_resolution"].get<int>();
    if (j.contains("extraction_resolution"))
        c.extraction_resolution = j["extraction_resolution"].get<int>();
    if (j.contains("occupancy_band_voxels"))
        c.occupancy_band_voxels = j["occupancy_band_voxels"].get<float>();
    if (j.contains("occupancy_threshold"))
        c.occupancy_threshold = j["occupancy_threshold"].get<float>();
    if (j.contains("auto_iso")) c.auto_iso = j["auto_iso"].get<bool>();
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        detail::reject_unknown_keys(
            l, {"mse_color", "lpips_color", "mse_normal", "lpips_normal", "occ", "sdf"},
            "loss.");
        if (l.contains("mse_color")) c.loss.mse_color = l["mse_color"].get<float>();
        if (l.contains("lpips_color")) c.loss.lpips_color = l["lpips_color"].get<float>();
        if (l.contains("mse_normal")) c.loss.mse_normal = l["mse_normal"].get<float>();
        if (l.contains("lpips_normal")) c.loss.lpips_normal = l["lpips_normal"].get<float>();
        if (l.contains("occ")) c.loss.occ = l["occ"].get<float>();
        if (l.contains("sdf")) c.loss.sdf = l["sdf"].get<float>();
    }
    if (j.contains("enhance")) {
        const auto& e = j["enhance"];
        detail::reject_unknown_keys(
            e, {"enabled", "alpha", "beta", "iterations", "step_size", "max_displacement"},
            "enhance.");
        if (e.contains("enabled")) c.enhance_enabled = e["enabled"].get<bool>();
        if (e.contains("alpha")) c.enhance.alpha = e["alpha"].get<float>();
        if (e.contains("beta")) c.enhance.beta = e["beta"].get<float>();
        if (e.contains("iterations")) c.enhance.iterations = e["iterations"].get<int>();
        if (e.contains("step_size")) c.enhance.step_size = e["step_size"].get<float>();
        if (e.contains("max_displacement"))
            c.enhance.max_displacement = e["max_displacement"].get<float>();
    }
    c.validate();
    return c;
}

inline PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("PipelineConfig: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    nlohmann::json j;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        j = nlohmann::json::parse(text);
    } else {
        j = parse_toml_lite(text);
    }
    return from_json(j);
}

struct ReconstructOptions {
    bool skip_enhance = false;
    const DenseVolume* gt_sdf = nullptr;  // bypass the coarse stage when set
};

struct ReconstructResult {
    TriMesh mesh;          // final output (enhanced when enabled)
    TriMesh pre_enhance;   // checkpoint before enhancement
    DenseVolume logits;    // coarse occupancy logits (zero when bypassed)
    DenseVolume occupancy; // binary coarse occupancy
    SparseVoxelGrid features;
    nlohmann::json provenance;  // config hash, seed, stage timings
};

struct PredictedSdf {
    DenseVolume volume;
    float iso = 0.0f;  // level set the surface is extracted at
};

/// Queries the SDF head over a dense grid of voxel centers. Voxels outside
/// the sparse grid's coverage get a background value above the iso level;
/// with auto_iso the level is the mean predicted value over covered voxels
/// (untrained weights carry no calibrated zero level).
inline PredictedSdf predict_sdf_volume(const SparseVoxelGrid& features, const ArchConfig& arch,
                                       WeightStore& ws, const GridSpec& spec, bool auto_iso) {
    int n = spec.resolution;
    PredictedSdf out;
    out.volume = DenseVolume(spec);
    std::vector<uint8_t> present(out.volume.values.size(), 0);
    double sum = 0;
    std::size_t count = 0;
    float lo = 0, hi = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                SparseSample s = trilinear_sample(features, spec.voxel_center(i, j, k));
                if (s.missing_corner) continue;
                std::size_t idx = spec.index(i, j, k);
                float sdf = query_heads(s.feature, arch, ws).sdf;
                out.volume.values[idx] = sdf;
                present[idx] = 1;
                sum += sdf;
                if (count == 0) lo = hi = sdf;
                lo = std::min(lo, sdf);
                hi = std::max(hi, sdf);
                ++count;
            }
    if (count == 0) throw Error("no grid voxel is covered by the sparse features");
    out.iso = auto_iso ? static_cast<float>(sum / count) : 0.0f;
    float background = out.iso + (hi - lo) + 1e-3f;
    for (std::size_t i = 0; i < out.volume.values.size(); ++i)
        if (!present[i]) out.volume.values[i] = background;
    return out;
}

namespace detail {

template <typename Fn>
auto timed_stage(const std::string& name, nlohmann::json& timings, Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            timings[name] = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        } else {
            auto result = fn();
            timings[name] = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
            return result;
        }
    } catch (const std::exception& e) {
        throw Error("stage " + name + ": " + e.what());
    }
}

}  // namespace detail

/// Feed-forward reconstruction: encode views, predict coarse occupancy,
/// subdivide, predict sparse features, query the heads over a dense
/// extraction grid, extract the surface, texture it, optionally enhance.
inline ReconstructResult reconstruct(const ViewSet& views, const PipelineConfig& cfg,
                                     WeightStore& ws, const ReconstructOptions& opts = {}) {
    cfg.validate();
    views.validate();
    ArchConfig arch = cfg.arch_config();
    Aabbf bounds{{-1, -1, -1}, {1, 1, 1}};

    ReconstructResult out;
    nlohmann::json timings = nlohmann::json::object();
    auto t_start = std::chrono::steady_clock::now();

    std::vector<EncodedView> encoded = detail::timed_stage(
        "encode", timings, [&] { return encode_views(views, arch, ws); });

    GridSpec coarse_spec(arch.coarse_resolution(), bounds);
    out.occupancy = detail::timed_stage("occupancy", timings, [&] {
        if (opts.gt_sdf) {
            DenseVolume resampled(coarse_spec);
            int n = coarse_spec.resolution;
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i)
                        resampled.values[coarse_spec.index(i, j, k)] =
                            opts.gt_sdf->sample(coarse_spec.voxel_center(i, j, k));
            out.logits = DenseVolume(coarse_spec);
            return occupancy_from_sdf(resampled,
                                      cfg.occupancy_band_voxels * coarse_spec.voxel_size());
        }
        out.logits = voxelformer_forward(views, encoded, bounds, arch, ws);
        DenseVolume occ(coarse_spec);
        for (std::size_t i = 0; i < occ.values.size(); ++i)
            occ.values[i] = sigmoid(out.logits.values[i]) > cfg.occupancy_threshold ? 1.0f : 0.0f;
        return occ;
    });
    bool any = false;
    for (float v : out.occupancy.values) any = any || v != 0.0f;
    if (!any) throw Error("stage occupancy: no voxel exceeded the threshold");

    SparseVoxelGrid sparse = detail::timed_stage("subdivide", timings, [&] {
        int width = arch.sparse_levels.front().channels;
        const Tensor& token = ws.get("subdivide.token", {width});
        return subdivide_occupied(out.occupancy, arch.subdivision_factor(), width, token.data);
    });

    out.features = detail::timed_stage("sparse_former", timings, [&] {
        return sparsevoxelformer_forward(views, encoded, sparse, arch, ws);
    });

    TriMesh mesh = detail::timed_stage("extract", timings, [&] {
        GridSpec spec(cfg.effective_extraction_resolution(), bounds);
        PredictedSdf pred = predict_sdf_volume(out.features, arch, ws, spec, cfg.auto_iso);
        TriMesh m = extract_mesh(pred.volume, pred.iso);
        if (m.empty()) throw Error("extracted surface is empty");
        return m;
    });

    detail::timed_stage("texture", timings, [&] {
        mesh.colors.resize(mesh.vertices.size());
        mesh.normal_texture.resize(mesh.vertices.size());
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            SparseSample s = trilinear_sample(out.features, mesh.vertices[v]);
            HeadOutputs h = query_heads(s.feature, arch, ws);
            mesh.colors[v] = h.color;
            mesh.normal_texture[v] = h.normal;
        }
    });

    out.pre_enhance = mesh;
    if (cfg.enhance_enabled && !opts.skip_enhance) {
        out.mesh = detail::timed_stage("enhance", timings, [&] {
            return enhance_geometry(mesh, mesh.normal_texture, cfg.enhance).mesh;
        });
    } else {
        out.mesh = mesh;
    }

    out.provenance = {{"config", cfg.to_json()},
                      {"config_hash", cfg.hash()},
                      {"seed", ws.seed()},
                      {"stage_seconds", timings},
                      {"total_seconds", std::chrono::duration<double>(
                                            std::chrono::steady_clock::now() - t_start)
                                            .count()}};
    return out;
}

}  // namespace voxelmesh
