#pragma once

#include "edgefit/attention.hpp"
#include "edgefit/dota.hpp"
#include "edgefit/edges.hpp"
#include "edgefit/fitter.hpp"
#include "edgefit/geometry.hpp"
#include "edgefit/grad_check.hpp"
#include "edgefit/matcher.hpp"

#include <json.hpp>

namespace edgefit {

/// Box record {"cx", "cy", "w", "h", "theta_deg"}; angles cross the JSON
/// boundary in degrees, internal math stays in radians.
nlohmann::json box_to_json(const OrientedBox& box);
OrientedBox box_from_json(const nlohmann::json& j);

/// Loss settings from {"sigma_px", "trunc_sigmas", "slope", "literal",
/// ...}; absent keys keep their defaults.
LossConfig loss_config_from_json(const nlohmann::json& j);
CannyConfig canny_config_from_json(const nlohmann::json& j);

nlohmann::json match_results_to_json(const std::vector<MatchResult>& results);
nlohmann::json fit_result_to_json(const FitResult& fit, bool include_trace = false);
nlohmann::json benchmark_report_to_json(const BenchmarkReport& report);
nlohmann::json grad_check_report_to_json(const GradCheckReport& report);
nlohmann::json attention_stats_to_json(const std::vector<AttentionLevelStats>& stats);
nlohmann::json crop_plan_to_json(const CropPlan& plan);
nlohmann::json conversion_to_json(const ConversionResult& result);

}  // namespace edgefit
