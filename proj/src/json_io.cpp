#include "edgefit/json_io.hpp"

#include "edgefit/error.hpp"

#include <cmath>
#include <numbers>

namespace edgefit {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double require_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw FormatError(std::string("missing or non-numeric field \"") + key + "\"");
    }
    return j.at(key).get<double>();
}

}  // namespace

nlohmann::json box_to_json(const OrientedBox& box) {
    return {{"cx", box.cx},
            {"cy", box.cy},
            {"w", box.w},
            {"h", box.h},
            {"theta_deg", box.theta * kDegPerRad}};
}

OrientedBox box_from_json(const nlohmann::json& j) {
    OrientedBox box;
    box.cx = require_number(j, "cx");
    box.cy = require_number(j, "cy");
    box.w = require_number(j, "w");
    box.h = require_number(j, "h");
    box.theta = require_number(j, "theta_deg") / kDegPerRad;
    if (!box.valid()) {
        throw GeometryError("box record violates the long-edge convention (w >= h > 0, "
                            "theta_deg in [-90, 90))");
    }
    return box;
}

LossConfig loss_config_from_json(const nlohmann::json& j) {
    LossConfig cfg;
    if (j.contains("sigma_px")) cfg.sigma_px = j.at("sigma_px").get<double>();
    if (j.contains("trunc_sigmas")) cfg.trunc_sigmas = j.at("trunc_sigmas").get<double>();
    if (j.contains("slope")) cfg.containment_slope = j.at("slope").get<double>();
    if (j.contains("literal")) cfg.literal_mode = j.at("literal").get<bool>();
    if (j.contains("raw_inner_product")) cfg.raw_inner_product = j.at("raw_inner_product").get<bool>();
    if (j.contains("rotate_gradients")) cfg.rotate_gradients = j.at("rotate_gradients").get<bool>();
    if (j.contains("full_extent")) cfg.full_extent_containment = j.at("full_extent").get<bool>();
    return cfg;
}

CannyConfig canny_config_from_json(const nlohmann::json& j) {
    CannyConfig cfg;
    if (j.contains("high_init")) cfg.high_init = j.at("high_init").get<double>();
    if (j.contains("low_init")) cfg.low_init = j.at("low_init").get<double>();
    if (j.contains("decay")) cfg.decay = j.at("decay").get<double>();
    if (j.contains("density_target")) cfg.density_target = j.at("density_target").get<double>();
    if (j.contains("floor")) cfg.floor = j.at("floor").get<double>();
    return cfg;
}

nlohmann::json match_results_to_json(const std::vector<MatchResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : results) {
        arr.push_back({{"r", m.r}, {"c", m.c}, {"angle_deg", m.angle * kDegPerRad},
                       {"score", m.score}});
    }
    return arr;
}

nlohmann::json fit_result_to_json(const FitResult& fit, bool include_trace) {
    nlohmann::json j = {{"final_box", box_to_json(fit.final_box)},
                        {"angle_error_deg", fit.angle_error_deg},
                        {"center_error_px", fit.center_error_px},
                        {"final_similarity", fit.final_similarity},
                        {"converged", fit.converged},
                        {"iterations", fit.iterations}};
    if (include_trace) {
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& s : fit.trace.steps) {
            trace.push_back({{"cx", s.params[0]},
                             {"cy", s.params[1]},
                             {"w", s.params[2]},
                             {"h", s.params[3]},
                             {"theta_deg", s.params[4] * kDegPerRad},
                             {"loss", s.loss},
                             {"grad_norm", s.grad_norm}});
        }
        j["trace"] = std::move(trace);
    }
    return j;
}

nlohmann::json benchmark_report_to_json(const BenchmarkReport& report) {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : report.variants) {
        variants.push_back({{"variant", v.variant},
                            {"median_angle_err_deg", v.median_angle_err_deg},
                            {"p90_angle_err_deg", v.p90_angle_err_deg},
                            {"median_center_err_px", v.median_center_err_px},
                            {"p90_center_err_px", v.p90_center_err_px},
                            {"convergence_rate", v.convergence_rate},
                            {"n", v.n}});
    }
    return {{"seed", report.seed}, {"variants", std::move(variants)}};
}

nlohmann::json grad_check_report_to_json(const GradCheckReport& report) {
    static const char* names[5] = {"cx", "cy", "w", "h", "theta"};
    nlohmann::json params = nlohmann::json::object();
    for (int k = 0; k < 5; ++k) {
        params[names[k]] = {{"max_rel_err", report.max_rel_err[k]},
                            {"mean_rel_err", report.mean_rel_err[k]},
                            {"samples", report.samples[k]}};
    }
    return {{"trials", report.trials},
            {"max_rel_err_overall", report.max_overall()},
            {"params", std::move(params)}};
}

nlohmann::json attention_stats_to_json(const std::vector<AttentionLevelStats>& stats) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < stats.size(); ++i) {
        arr.push_back({{"level", i + 1},
                       {"edge_mean", stats[i].edge_mean},
                       {"non_edge_mean", stats[i].non_edge_mean},
                       {"ratio", stats[i].ratio},
                       {"degenerate", stats[i].degenerate}});
    }
    return arr;
}

nlohmann::json crop_plan_to_json(const CropPlan& plan) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& [x, y] : plan.origins) {
        windows.push_back({{"x0", x}, {"y0", y}});
    }
    return {{"window", plan.window}, {"overlap", plan.overlap}, {"windows", std::move(windows)}};
}

nlohmann::json conversion_to_json(const ConversionResult& result) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records) {
        nlohmann::json j = box_to_json(r.box);
        j["label"] = r.label;
        j["difficulty"] = r.difficulty;
        records.push_back(std::move(j));
    }
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& s : result.skipped) {
        skipped.push_back({{"index", s.index}, {"reason", s.reason}});
    }
    return {{"records", std::move(records)}, {"skipped", std::move(skipped)}};
}

}  // namespace edgefit
