#include "edgefit/attention.hpp"
#include "edgefit/dota.hpp"
#include "edgefit/edge_loss.hpp"
#include "edgefit/edges.hpp"
#include "edgefit/error.hpp"
#include "edgefit/fitter.hpp"
#include "edgefit/grad_check.hpp"
#include "edgefit/image.hpp"
#include "edgefit/json_io.hpp"
#include "edgefit/matcher.hpp"
#include "edgefit/scene.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgefit;

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

struct ToolConfig {
    LossConfig loss;
    CannyConfig canny;
};

ToolConfig load_tool_config(const std::string& path) {
    ToolConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    in >> j;
    cfg.loss = loss_config_from_json(j);
    if (j.contains("canny")) cfg.canny = canny_config_from_json(j.at("canny"));
    return cfg;
}

// Output files land in place only after a complete write.
void atomic_write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open file for writing: " + tmp.string());
        out << text;
        if (!out) throw IoError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void atomic_write_json(const fs::path& path, const json& j) {
    atomic_write_text(path, j.dump(2) + "\n");
}

void atomic_write_pgm(const fs::path& path, const GrayImage& img) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    write_pgm(img, tmp.string());
    fs::rename(tmp, path);
}

void atomic_write_tensor(const fs::path& path, const FeatureMap& fm) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    write_tensor(fm, tmp.string());
    fs::rename(tmp, path);
}

OrientedBox parse_box_arg(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') {
        return box_from_json(json::parse(arg));
    }
    std::ifstream in(arg);
    if (!in) throw IoError("cannot open box file: " + arg);
    json j;
    in >> j;
    return box_from_json(j);
}

std::string error_type_name(const std::exception& e) {
    if (dynamic_cast<const FormatError*>(&e)) return "format_error";
    if (dynamic_cast<const UnsupportedError*>(&e)) return "unsupported_error";
    if (dynamic_cast<const IoError*>(&e)) return "io_error";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension_error";
    if (dynamic_cast<const GeometryError*>(&e)) return "geometry_error";
    if (dynamic_cast<const ArgumentError*>(&e)) return "argument_error";
    if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input_error";
    if (dynamic_cast<const EmptyTemplateError*>(&e)) return "empty_template_error";
    if (dynamic_cast<const json::exception*>(&e)) return "json_error";
    return "error";
}

GrayImage scale_mask_to_bytes(const GrayImage& mask) {
    GrayImage out = mask;
    for (double& v : out.data) v = v * 255.0;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"edgefit: edge-gradient matching, loss evaluation and box fitting"};
    app.require_subcommand(1);

    unsigned seed = 1;
    std::string config_path;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "Deterministic seed")->capture_default_str();
    app.add_option("--config", config_path, "JSON config for loss and canny settings");
    app.add_option("--out-dir", out_dir, "Directory for output files")->capture_default_str();

    // ---- edges ----------------------------------------------------------
    auto* edges_cmd = app.add_subcommand("edges", "Extract the edge field and mask of an image");
    std::string edges_input;
    edges_cmd->add_option("--input", edges_input, "Input PGM image")->required();
    edges_cmd->callback([&]() {
        const ToolConfig cfg = load_tool_config(config_path);
        const GrayImage img = load_pgm(edges_input);
        CannyDiagnostics diag;
        const EdgeField field = adaptive_canny(img, cfg.canny, &diag);
        const GrayImage mask = edge_mask(field);

        atomic_write_pgm(fs::path(out_dir) / "edge_mask.pgm", scale_mask_to_bytes(mask));
        std::string lines;
        for (const auto& p : field.points) {
            lines += json{{"x", p.x}, {"y", p.y}, {"gx", p.gx}, {"gy", p.gy}}.dump();
            lines += '\n';
        }
        atomic_write_text(fs::path(out_dir) / "edges.jsonl", lines);

        const json summary = {{"edge_count", field.size()},
                              {"passes", diag.passes},
                              {"hit_floor", diag.hit_floor},
                              {"final_high_threshold", diag.high_thresholds.back()},
                              {"width", img.width},
                              {"height", img.height}};
        std::cout << summary.dump(2) << "\n";
    });

    // ---- match ----------------------------------------------------------
    auto* match_cmd = app.add_subcommand("match", "Rotation-swept template matching");
    std::string match_template, match_source;
    double angle_lo = -10.0, angle_hi = 10.0, angle_step = 2.0, score_min = 0.7, nms_radius = -1.0;
    bool write_overlay = false;
    match_cmd->add_option("--template", match_template, "Template PGM image")->required();
    match_cmd->add_option("--source", match_source, "Source PGM image")->required();
    match_cmd->add_option("--angle-lo", angle_lo, "Sweep start, degrees")->capture_default_str();
    match_cmd->add_option("--angle-hi", angle_hi, "Sweep end, degrees")->capture_default_str();
    match_cmd->add_option("--angle-step", angle_step, "Sweep step, degrees")->capture_default_str();
    match_cmd->add_option("--score-min", score_min, "Minimum score")->capture_default_str();
    match_cmd->add_option("--nms-radius", nms_radius,
                          "Suppression radius in px (default: half template diagonal)");
    match_cmd->add_flag("--overlay", write_overlay, "Write an overlay PGM of the matches");
    match_cmd->callback([&]() {
        const ToolConfig cfg = load_tool_config(config_path);
        const TemplateModel tpl = build_template(load_pgm(match_template), cfg.canny);
        const GrayImage src = load_pgm(match_source);

        MatchParams params;
        params.angle_lo = angle_lo / kDegPerRad;
        params.angle_hi = angle_hi / kDegPerRad;
        params.angle_step = angle_step / kDegPerRad;
        params.score_min = score_min;
        params.nms_radius = nms_radius;
        const auto results = match_search(tpl, src, params);

        const json arr = match_results_to_json(results);
        atomic_write_json(fs::path(out_dir) / "matches.json", arr);
        if (write_overlay) {
            GrayImage overlay = src;
            for (const auto& m : results) {
                const double ca = std::cos(m.angle), sa = std::sin(m.angle);
                for (const auto& tp : tpl.points) {
                    const int x = int(std::lround(m.c + ca * tp.c - sa * tp.r));
                    const int y = int(std::lround(m.r + sa * tp.c + ca * tp.r));
                    if (overlay.in_bounds(x, y)) overlay.at(x, y) = 255.0;
                }
            }
            atomic_write_pgm(fs::path(out_dir) / "overlay.pgm", overlay);
        }
        std::cout << arr.dump(2) << "\n";
    });

    // ---- fit ------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Fit a box to image edges by gradient descent");
    std::string fit_image, fit_gt, fit_init;
    bool fit_trace = false;
    fit_cmd->add_option("--image", fit_image, "Input PGM image")->required();
    fit_cmd->add_option("--gt", fit_gt, "Reference box (inline JSON or file)")->required();
    fit_cmd->add_option("--init", fit_init, "Initial box (inline JSON or file)")->required();
    fit_cmd->add_flag("--trace", fit_trace, "Include the per-iteration trace");
    fit_cmd->callback([&]() {
        const ToolConfig cfg = load_tool_config(config_path);
        const GrayImage img = load_pgm(fit_image);
        const FitResult fit = fit_box(img, parse_box_arg(fit_gt), parse_box_arg(fit_init),
                                      cfg.loss, {}, cfg.canny);
        const json j = fit_result_to_json(fit, fit_trace);
        atomic_write_json(fs::path(out_dir) / "fit.json", j);
        std::cout << j.dump(2) << "\n";
    });

    // ---- bench ----------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "Synthetic-scene fitting benchmark");
    int bench_scenes = 50;
    double bench_noise = 4.0;
    double pert_center = 5.0, pert_scale = 0.10, pert_angle = 10.0;
    std::vector<std::string> bench_variants = {"normalized"};
    bench_cmd->add_option("--scenes", bench_scenes, "Number of scenes")->capture_default_str();
    bench_cmd->add_option("--noise", bench_noise, "Scene noise sigma")->capture_default_str();
    bench_cmd->add_option("--perturb-center", pert_center, "Center perturbation, px")
        ->capture_default_str();
    bench_cmd->add_option("--perturb-scale", pert_scale, "Size perturbation fraction")
        ->capture_default_str();
    bench_cmd->add_option("--perturb-angle", pert_angle, "Angle perturbation, degrees")
        ->capture_default_str();
    bench_cmd
        ->add_option("--variants", bench_variants,
                     "Loss variants: normalized, literal, rotation_compensated")
        ->delimiter(',');
    bench_cmd->callback([&]() {
        const ToolConfig cfg = load_tool_config(config_path);
        BenchmarkConfig bc;
        bc.n_scenes = bench_scenes;
        bc.seed = seed;
        bc.noise_sigma = bench_noise;
        bc.perturbation = {pert_center, pert_scale, pert_angle};
        bc.base_loss = cfg.loss;
        bc.canny = cfg.canny;
        bc.variants.clear();
        for (const std::string& name : bench_variants) {
            if (name == "normalized") {
                bc.variants.push_back(LossVariant::Normalized);
            } else if (name == "literal") {
                bc.variants.push_back(LossVariant::Literal);
            } else if (name == "rotation_compensated") {
                bc.variants.push_back(LossVariant::RotationCompensated);
            } else {
                throw ArgumentError("unknown loss variant: " + name);
            }
        }
        const BenchmarkReport report = run_benchmark(bc);
        const json j = benchmark_report_to_json(report);
        atomic_write_json(fs::path(out_dir) / "benchmark.json", j);
        std::cout << j.dump(2) << "\n";
    });

    // ---- gradcheck ------------------------------------------------------
    auto* grad_cmd = app.add_subcommand("gradcheck", "Analytic-vs-numeric gradient validation");
    int grad_trials = 100;
    grad_cmd->add_option("--trials", grad_trials, "Number of random trials")->capture_default_str();
    grad_cmd->callback([&]() {
        const ToolConfig cfg = load_tool_config(config_path);
        GradCheckConfig gc;
        gc.trials = grad_trials;
        gc.seed = seed;
        gc.loss = cfg.loss;
        const GradCheckReport report = grad_check(gc);
        const json j = grad_check_report_to_json(report);
        atomic_write_json(fs::path(out_dir) / "gradcheck.json", j);
        std::cout << j.dump(2) << "\n";
    });

    // ---- attend ---------------------------------------------------------
    auto* attend_cmd =
        app.add_subcommand("attend", "Mask feature pyramids with the image's edge pyramid");
    std::string attend_image;
    std::vector<std::string> attend_features;
    int attend_channels = 4;
    bool attend_fuse = false;
    attend_cmd->add_option("--image", attend_image, "Input PGM image")->required();
    attend_cmd
        ->add_option("--features", attend_features,
                     "Five raw tensor files, finest level first (default: synthetic features)")
        ->expected(5);
    attend_cmd->add_option("--channels", attend_channels, "Channels for synthetic features")
        ->capture_default_str();
    attend_cmd->add_flag("--fuse", attend_fuse,
                         "Also write the averaging fusion of attended and original features");
    attend_cmd->callback([&]() {
        const ToolConfig cfg = load_tool_config(config_path);
        const GrayImage img = load_pgm(attend_image);
        const EdgeField field = adaptive_canny(img, cfg.canny);
        const EdgePyramid ep = build_edge_pyramid(edge_mask(field));

        FeaturePyramid fp;
        if (!attend_features.empty()) {
            for (const std::string& path : attend_features) {
                fp.levels.push_back(load_tensor(path));
            }
        } else {
            fp = synthetic_feature_pyramid(attend_channels, ep.levels[0].width,
                                           ep.levels[0].height, 5, seed);
        }

        const FeaturePyramid attended = apply_edge_attention(fp, ep);
        for (std::size_t l = 0; l < attended.levels.size(); ++l) {
            atomic_write_tensor(fs::path(out_dir) / ("attended_" + std::to_string(l + 1) + ".bin"),
                                attended.levels[l]);
        }
        if (attend_fuse) {
            const FusionWeights w =
                FusionWeights::averaging(fp.levels[0].channels, int(fp.levels.size()));
            const FeaturePyramid fused = fuse_features(fp, attended, w);
            for (std::size_t l = 0; l < fused.levels.size(); ++l) {
                atomic_write_tensor(fs::path(out_dir) / ("fused_" + std::to_string(l + 1) + ".bin"),
                                    fused.levels[l]);
            }
        }
        const json stats = attention_stats_to_json(attention_report(fp, ep));
        atomic_write_json(fs::path(out_dir) / "attention_stats.json", stats);
        std::cout << stats.dump(2) << "\n";
    });

    // ---- convert --------------------------------------------------------
    auto* convert_cmd =
        app.add_subcommand("convert", "Convert corner annotations to long-edge box records");
    std::string convert_input;
    convert_cmd->add_option("--input", convert_input, "Annotation text file")->required();
    convert_cmd->callback([&]() {
        const auto annotations = parse_dota(convert_input);
        const ConversionResult result = convert_le90(annotations);
        const json j = conversion_to_json(result);
        atomic_write_json(fs::path(out_dir) / "boxes.json", j);
        for (const auto& skip : result.skipped) {
            std::cerr << "skipped annotation " << skip.index << ": " << skip.reason << "\n";
        }
        std::cout << j.dump(2) << "\n";
    });

    // ---- crop -----------------------------------------------------------
    auto* crop_cmd = app.add_subcommand("crop", "Plan sliding-window crops of a large image");
    std::string crop_input;
    int crop_window = 1024, crop_overlap = 512;
    bool crop_write = false;
    crop_cmd->add_option("--input", crop_input, "Input PGM image")->required();
    crop_cmd->add_option("--window", crop_window, "Window size, px")->capture_default_str();
    crop_cmd->add_option("--overlap", crop_overlap, "Window overlap, px")->capture_default_str();
    crop_cmd->add_flag("--write-images", crop_write, "Also write each window as a PGM");
    crop_cmd->callback([&]() {
        const GrayImage img = load_pgm(crop_input);
        const CropPlan plan = plan_crops(img.width, img.height, crop_window, crop_overlap);
        const json j = crop_plan_to_json(plan);
        atomic_write_json(fs::path(out_dir) / "crop_plan.json", j);
        if (crop_write) {
            for (std::size_t i = 0; i < plan.origins.size(); ++i) {
                const auto [x0, y0] = plan.origins[i];
                const int w = std::min(plan.window, img.width - x0);
                const int h = std::min(plan.window, img.height - y0);
                GrayImage window(w, h);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) window.at(x, y) = img.at(x0 + x, y0 + y);
                char name[64];
                std::snprintf(name, sizeof name, "crop_%04zu_%d_%d.pgm", i, x0, y0);
                atomic_write_pgm(fs::path(out_dir) / name, window);
            }
        }
        std::cout << j.dump(2) << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        const json err = {{"error", {{"type", error_type_name(e)}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
