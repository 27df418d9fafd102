// SPDX-License-Identifier: Apache-2.0
//
// voxelmesh: multi-view feed-forward mesh reconstruction toolkit.
//
// Exit codes: 0 success, 2 usage error, 3 input error, 4 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "voxelmesh/voxelmesh.hpp"

namespace vm = voxelmesh;
namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw vm::Error("missing input file: " + path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw vm::Error("cannot open for writing: " + path);
    os << text;
    if (!os) throw vm::Error("write failed: " + path);
}

struct Common {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_given = false;
    std::string out;

    void add_to(CLI::App* cmd, const char* out_default) {
        cmd->add_option("--config", config_path, "pipeline config file (.toml or .json)");
        cmd->add_option("--seed", seed, "weight/sampling seed (overrides the config)")
            ->each([this](const std::string&) { seed_given = true; });
        cmd->add_option("--out", out, "output path")->default_val(out_default);
    }

    vm::PipelineConfig load_config() const {
        vm::PipelineConfig cfg;
        if (!config_path.empty()) {
            require_file(config_path);
            cfg = vm::PipelineConfig::load(config_path);
        }
        if (seed_given) cfg.seed = seed;
        return cfg;
    }
};

vm::WeightStore open_weights(const vm::PipelineConfig& cfg) {
    if (!cfg.weights_path.empty()) {
        require_file(cfg.weights_path);
        uint64_t hash = 0;
        vm::WeightStore ws = vm::WeightStore::load(cfg.weights_path, &hash);
        if (hash != cfg.arch_config().hash())
            throw vm::Error("weights file was produced for a different architecture");
        return ws;
    }
    return vm::WeightStore(cfg.seed);
}

std::vector<vm::Camera> load_rig_or_default(const std::string& rig_path, int poses = 24) {
    if (rig_path.empty()) return vm::make_camera_ring(poses);
    require_file(rig_path);
    return vm::load_camera_rig(rig_path);
}

// ---------------------------------------------------------------------------

void cmd_fixtures(const Common& common, const std::string& shape, int views, int resolution,
                  int sdf_resolution, bool pfm_normals) {
    vm::Fixture fx = vm::make_fixture(shape);
    std::vector<vm::Camera> rig = vm::make_camera_ring(views, resolution, resolution);
    vm::ViewSet set = vm::render_fixture_views(fx, rig);
    vm::save_view_set(set, common.out, pfm_normals);
    vm::save_mesh(fx.mesh, (fs::path(common.out) / "mesh.obj").string());
    vm::save_volume(vm::fixture_sdf_volume(fx, sdf_resolution),
                    (fs::path(common.out) / "sdf.vxm1").string());
    std::cout << "wrote " << views << " views, mesh.obj and sdf.vxm1 to " << common.out
              << "\n";
}

void cmd_sdf(const Common& common, const std::string& mesh_path, int resolution,
             float extent) {
    require_file(mesh_path);
    vm::TriMesh mesh = vm::load_mesh(mesh_path);
    vm::GridSpec spec(resolution, vm::Aabbf{{-extent, -extent, -extent},
                                            {extent, extent, extent}});
    vm::save_volume(vm::mesh_to_sdf(mesh, spec), common.out);
    std::cout << "wrote " << common.out << "\n";
}

void cmd_extract(const Common& common, const std::string& volume_path, float iso) {
    require_file(volume_path);
    vm::DenseVolume vol = vm::load_volume(volume_path);
    vm::TriMesh mesh = vm::extract_mesh(vol, iso);
    vm::save_mesh(mesh, common.out);
    std::cout << "wrote " << common.out << " (" << mesh.vertices.size() << " vertices, "
              << mesh.faces.size() << " faces)\n";
}

void cmd_enhance(const Common& common, const std::string& mesh_path,
                 const std::string& normals_path) {
    require_file(mesh_path);
    vm::PipelineConfig cfg = common.load_config();
    vm::TriMesh mesh = vm::load_mesh(mesh_path);
    std::vector<vm::Vec3f> targets;
    if (!normals_path.empty()) {
        require_file(normals_path);
        targets = vm::load_normals(normals_path);
    } else if (mesh.has_normal_texture()) {
        targets = mesh.normal_texture;
    } else {
        throw vm::Error("mesh has no normals; pass --normals");
    }
    vm::NormalConsistencyReport before = vm::normal_consistency(mesh, targets);
    vm::EnhanceResult res = vm::enhance_geometry(mesh, targets, cfg.enhance);
    vm::NormalConsistencyReport after = vm::normal_consistency(res.mesh, targets);
    vm::save_mesh(res.mesh, common.out);
    nlohmann::json report = {
        {"iterations_accepted", res.energy_history.size() - 1},
        {"energy_initial", res.energy_history.front()},
        {"energy_final", res.energy_history.back()},
        {"normal_within_10deg_before", before.fraction_at(10)},
        {"normal_within_10deg_after", after.fraction_at(10)}};
    std::cout << report.dump(2) << "\n";
}

void cmd_render(const Common& common, const std::string& mesh_path,
                const std::string& rig_path) {
    require_file(mesh_path);
    vm::TriMesh mesh = vm::with_default_textures(vm::load_mesh(mesh_path));
    std::vector<vm::Camera> rig = load_rig_or_default(rig_path, 6);
    std::error_code ec;
    fs::create_directories(common.out, ec);
    if (ec) throw vm::Error("cannot create directory " + common.out);
    for (std::size_t i = 0; i < rig.size(); ++i) {
        vm::RenderTarget rt = vm::rasterize(mesh, rig[i], rig[i].width, rig[i].height);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "render_%03zu_", i);
        std::string stem = (fs::path(common.out) / buf).string();
        vm::save_png(rt.rgb, stem + "rgb.png");
        vm::save_png(vm::encode_normal_map(rt.normal), stem + "normal.png");
        vm::save_png(rt.mask, stem + "mask.png");
    }
    std::cout << "wrote " << rig.size() << " renders to " << common.out << "\n";
}

void cmd_eval(const Common& common, const std::string& pred_path, const std::string& gt_path,
              const std::string& rig_path, const std::string& manifest_path, int points,
              double threshold) {
    std::vector<vm::Camera> rig = load_rig_or_default(rig_path);
    vm::EvalOptions opts;
    opts.point_count = static_cast<std::size_t>(points);
    opts.threshold = threshold;
    if (common.seed_given) opts.seed = common.seed;

    if (!manifest_path.empty()) {
        require_file(manifest_path);
        std::string csv = vm::eval_csv_header() + "\n";
        for (const vm::BatchEntry& e : vm::load_batch_manifest(manifest_path)) {
            require_file(e.pred_path);
            require_file(e.gt_path);
            vm::EvalReport r = vm::evaluate(vm::load_mesh(e.pred_path),
                                            vm::load_mesh(e.gt_path), rig, opts);
            csv += vm::eval_csv_row(e, r) + "\n";
        }
        if (common.out.empty() || common.out == "-")
            std::cout << csv;
        else
            write_text(common.out, csv);
        return;
    }

    if (pred_path.empty() || gt_path.empty())
        throw CLI::ValidationError("eval", "need PRED and GT meshes (or --manifest)");
    require_file(pred_path);
    require_file(gt_path);
    vm::EvalReport report =
        vm::evaluate(vm::load_mesh(pred_path), vm::load_mesh(gt_path), rig, opts);
    std::string text = report.to_json().dump(2) + "\n";
    if (common.out.empty() || common.out == "-")
        std::cout << text;
    else
        write_text(common.out, text);
}

void cmd_reconstruct(const Common& common, const std::string& views_dir, bool skip_enhance,
                     bool occupancy_from_gt) {
    if (!fs::exists(views_dir)) throw vm::Error("missing input file: " + views_dir);
    vm::PipelineConfig cfg = common.load_config();
    vm::WeightStore ws = open_weights(cfg);
    vm::ViewSet views = vm::load_view_set(views_dir);

    vm::ReconstructOptions opts;
    opts.skip_enhance = skip_enhance;
    vm::DenseVolume gt_sdf;
    std::string gt_sdf_path = (fs::path(views_dir) / "sdf.vxm1").string();
    bool have_gt = fs::exists(gt_sdf_path);
    if (occupancy_from_gt) {
        require_file(gt_sdf_path);
        gt_sdf = vm::load_volume(gt_sdf_path);
        opts.gt_sdf = &gt_sdf;
    } else if (have_gt) {
        gt_sdf = vm::load_volume(gt_sdf_path);
    }

    vm::ReconstructResult res = vm::reconstruct(views, cfg, ws, opts);
    vm::save_mesh(res.mesh, common.out);
    write_text(common.out + ".provenance.json", res.provenance.dump(2) + "\n");

    if (have_gt) {
        // supervision-style loss against the input views and the stored SDF
        std::vector<vm::SupervisionView> sup;
        for (const vm::View& v : views.views) {
            vm::RenderTarget rt =
                vm::rasterize(res.mesh, v.camera, v.rgb.width, v.rgb.height);
            vm::Image normal_cam = rt.normal;
            const vm::Mat3f rinv = v.camera.cam_to_world.rotation.transposed();
            for (int y = 0; y < normal_cam.height; ++y)
                for (int x = 0; x < normal_cam.width; ++x) {
                    float* n = normal_cam.pixel(x, y);
                    vm::Vec3f c = rinv * vm::Vec3f{n[0], n[1], n[2]};
                    n[0] = c.x; n[1] = c.y; n[2] = c.z;
                }
            sup.push_back({rt.rgb, v.rgb, normal_cam, v.normal, rt.mask, v.mask});
        }
        vm::DenseVolume gt_coarse(res.occupancy.spec);
        int n = gt_coarse.spec.resolution;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    gt_coarse.values[gt_coarse.spec.index(i, j, k)] =
                        gt_sdf.sample(gt_coarse.spec.voxel_center(i, j, k));
        vm::DenseVolume gt_occ = vm::occupancy_from_sdf(
            gt_coarse, cfg.occupancy_band_voxels * gt_coarse.spec.voxel_size());
        vm::PredictedSdf psdf = vm::predict_sdf_volume(
            res.features, cfg.arch_config(), ws,
            vm::GridSpec(cfg.sdf_resolution, vm::fixture_bounds()), cfg.auto_iso);
        vm::DenseVolume pred_sdf = std::move(psdf.volume);
        for (float& v : pred_sdf.values) v -= psdf.iso;  // zero-centered level set
        vm::DenseVolume gt_sup(pred_sdf.spec);
        for (int k = 0; k < cfg.sdf_resolution; ++k)
            for (int j = 0; j < cfg.sdf_resolution; ++j)
                for (int i = 0; i < cfg.sdf_resolution; ++i)
                    gt_sup.values[gt_sup.spec.index(i, j, k)] =
                        gt_sdf.sample(gt_sup.spec.voxel_center(i, j, k));
        vm::LossBreakdown loss =
            vm::total_loss(sup, res.occupancy, gt_occ, pred_sdf, gt_sup, cfg.loss);
        write_text(common.out + ".loss.json", loss.to_json().dump(2) + "\n");
    }
    std::cout << "wrote " << common.out << " (" << res.mesh.vertices.size() << " vertices)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view feed-forward mesh reconstruction toolkit"};
    app.require_subcommand(1);

    // fixtures
    Common common_fixtures;
    std::string fx_shape = "sphere";
    int fx_views = 6, fx_resolution = 128, fx_sdf_resolution = 64;
    bool fx_pfm = false;
    CLI::App* fixtures = app.add_subcommand("fixtures", "generate a synthetic test scene");
    common_fixtures.add_to(fixtures, "fixture_out");
    fixtures->add_option("--shape", fx_shape, "sphere, cube, torus or composite");
    fixtures->add_option("--views", fx_views, "number of ring cameras")->default_val(6);
    fixtures->add_option("--resolution", fx_resolution, "image size in pixels")
        ->default_val(128);
    fixtures->add_option("--sdf-resolution", fx_sdf_resolution, "SDF volume resolution")
        ->default_val(64);
    fixtures->add_flag("--pfm-normals", fx_pfm, "store normals losslessly as PFM");
    fixtures->callback([&] {
        cmd_fixtures(common_fixtures, fx_shape, fx_views, fx_resolution, fx_sdf_resolution,
                     fx_pfm);
    });

    // sdf
    Common common_sdf;
    std::string sdf_mesh;
    int sdf_resolution = 64;
    float sdf_extent = 1.0f;
    CLI::App* sdf = app.add_subcommand("sdf", "sample a signed distance volume from a mesh");
    sdf->add_option("mesh", sdf_mesh, "input mesh (.obj or .ply)")->required();
    common_sdf.add_to(sdf, "sdf.vxm1");
    sdf->add_option("--resolution", sdf_resolution, "volume resolution")->default_val(64);
    sdf->add_option("--extent", sdf_extent, "half extent of the cubic volume bounds")
        ->default_val(1.0f);
    sdf->callback([&] { cmd_sdf(common_sdf, sdf_mesh, sdf_resolution, sdf_extent); });

    // extract
    Common common_extract;
    std::string ex_volume;
    float ex_iso = 0.0f;
    CLI::App* extract = app.add_subcommand("extract", "extract an isosurface mesh");
    extract->add_option("volume", ex_volume, "input SDF volume (.vxm1)")->required();
    common_extract.add_to(extract, "extracted.obj");
    extract->add_option("--iso", ex_iso, "iso level")->default_val(0.0f);
    extract->callback([&] { cmd_extract(common_extract, ex_volume, ex_iso); });

    // enhance
    Common common_enhance;
    std::string en_mesh, en_normals;
    CLI::App* enhance = app.add_subcommand("enhance", "normal-driven geometry refinement");
    enhance->add_option("mesh", en_mesh, "input mesh")->required();
    common_enhance.add_to(enhance, "enhanced.obj");
    enhance->add_option("--normals", en_normals, "target normals file (NRM1)");
    enhance->callback([&] { cmd_enhance(common_enhance, en_mesh, en_normals); });

    // render
    Common common_render;
    std::string rd_mesh, rd_rig;
    CLI::App* render = app.add_subcommand("render", "rasterize a mesh from rig poses");
    render->add_option("mesh", rd_mesh, "input mesh")->required();
    common_render.add_to(render, "renders");
    render->add_option("--rig", rd_rig, "camera rig JSON (default: 6-pose ring)");
    render->callback([&] { cmd_render(common_render, rd_mesh, rd_rig); });

    // eval
    Common common_eval;
    std::string ev_pred, ev_gt, ev_rig, ev_manifest;
    int ev_points = 100000;
    double ev_threshold = 0.05;
    CLI::App* eval_cmd = app.add_subcommand("eval", "compare a mesh against a reference");
    eval_cmd->add_option("pred", ev_pred, "predicted mesh");
    eval_cmd->add_option("gt", ev_gt, "reference mesh");
    common_eval.add_to(eval_cmd, "-");
    eval_cmd->add_option("--rig", ev_rig, "camera rig JSON (default: 24-pose ring)");
    eval_cmd->add_option("--manifest", ev_manifest,
                         "batch manifest JSON of {pred, gt} pairs; emits CSV");
    eval_cmd->add_option("--points", ev_points, "surface samples per mesh")
        ->default_val(100000);
    eval_cmd->add_option("--threshold", ev_threshold, "F-score distance threshold")
        ->default_val(0.05);
    eval_cmd->callback([&] {
        cmd_eval(common_eval, ev_pred, ev_gt, ev_rig, ev_manifest, ev_points, ev_threshold);
    });

    // reconstruct
    Common common_rec;
    std::string rc_views;
    bool rc_skip_enhance = false, rc_occ_gt = false;
    CLI::App* rec = app.add_subcommand("reconstruct", "full feed-forward reconstruction");
    rec->add_option("views", rc_views, "view-set directory (rig.json + images)")->required();
    common_rec.add_to(rec, "reconstructed.obj");
    rec->add_flag("--skip-enhance", rc_skip_enhance, "skip the enhancement stage");
    rec->add_flag("--occupancy-from-gt-sdf", rc_occ_gt,
                  "bypass the coarse stage using the view set's sdf.vxm1");
    rec->callback(
        [&] { cmd_reconstruct(common_rec, rc_views, rc_skip_enhance, rc_occ_gt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const vm::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const vm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
