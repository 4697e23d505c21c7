#pragma once

#include "edgefit/edge_loss.hpp"
#include "edgefit/edges.hpp"
#include "edgefit/geometry.hpp"
#include "edgefit/scene.hpp"

#include <array>
#include <string>
#include <vector>

namespace edgefit {

/// First-order optimizer settings for box fitting: per-parameter adaptive
/// steps with running first/second moment averages and a mild exponential
/// step decay.
struct OptimizerSettings {
    double step_center = 0.5;  // px-scale step for cx, cy
    double step_size = 0.5;    // step for w, h
    double step_theta = 0.01;  // radians
    double beta1 = 0.9;
    double beta2 = 0.999;
    double step_decay = 0.99;  // per-iteration multiplier on the base steps
    int max_iters = 300;
    double grad_tol = 1e-5;    // stop when the gradient norm falls below
    double loss_stop = 0.01;   // stop when 1 - similarity falls below
    double min_size = 2.0;     // lower clamp on w and h
    /// No improvement of the best loss for this many iterations stops the
    /// fit; non-positive disables the plateau stop.
    int patience = 50;
    /// Poorly aligned starts first run up to a third of the budget with
    /// the neighborhood sigma inflated by this factor (a wider basin),
    /// then refine at the target sigma. The coarse stage is skipped when
    /// the start already explains the edges nearly as well as the
    /// reference box. <= 1 disables the coarse stage.
    double coarse_sigma_scale = 2.5;
};

struct FitIteration {
    std::array<double, 5> params{};
    double loss = 0.0;
    double grad_norm = 0.0;
};

struct FitTrace {
    std::vector<FitIteration> steps;
};

struct FitResult {
    OrientedBox final_box;
    FitTrace trace;
    double angle_error_deg = 0.0;
    double center_error_px = 0.0;
    /// Normalized similarity of the final box (measured in normalized
    /// mode regardless of the optimization variant).
    double final_similarity = 0.0;
    /// Normalized similarity of the reference box itself on this edge
    /// field; the attainable plateau given the scene's noise edges.
    double reference_similarity = 0.0;
    /// The final box explains the edges comparably well to the reference
    /// box: final similarity >= max(0.3, 0.7 * reference similarity).
    /// False when the fit stalled on a flat-loss plateau (for example an
    /// init beyond every edge neighborhood, where the gradient vanishes).
    bool converged = false;
    int iterations = 0;
};

/// Angle difference in degrees modulo the box symmetry: 180 deg for
/// rectangles, 90 deg for squares (within 1% of w == h).
double angle_error_deg(const OrientedBox& fitted, const OrientedBox& reference);

/// Extracts edges from the image and fits the candidate box to them by
/// minimizing the edge-gradient loss against the reference box. Theta is
/// re-folded into the long-edge convention (swapping w/h when needed)
/// after every step. The reference box enters only the loss
/// correspondence and the reported errors.
FitResult fit_box(const GrayImage& img, const OrientedBox& gt, const OrientedBox& init,
                  const LossConfig& loss_cfg = {}, const OptimizerSettings& opt = {},
                  const CannyConfig& canny_cfg = {});

/// Same as fit_box but on an already extracted edge field.
FitResult fit_to_edges(const EdgeField& edge, const OrientedBox& gt, const OrientedBox& init,
                       const LossConfig& loss_cfg = {}, const OptimizerSettings& opt = {});

enum class LossVariant { Normalized, Literal, RotationCompensated };

std::string variant_name(LossVariant v);
LossConfig variant_config(LossVariant v, const LossConfig& base = {});

/// Uniform perturbation bounds applied to ground truth to produce fit
/// initializations.
struct PerturbationSpec {
    double max_center_px = 5.0;
    double max_scale_frac = 0.10;  // relative size perturbation on w and h
    double max_angle_deg = 10.0;
};

struct BenchmarkConfig {
    int n_scenes = 50;
    PerturbationSpec perturbation;
    unsigned seed = 1;
    double noise_sigma = 4.0;
    bool box_blur = false;
    std::vector<LossVariant> variants = {LossVariant::Normalized};
    LossConfig base_loss;
    OptimizerSettings optimizer;
    CannyConfig canny;
};

struct BenchmarkVariantReport {
    std::string variant;
    double median_angle_err_deg = 0.0;
    double p90_angle_err_deg = 0.0;
    double median_center_err_px = 0.0;
    double p90_center_err_px = 0.0;
    double convergence_rate = 0.0;
    int n = 0;
};

struct BenchmarkReport {
    std::vector<BenchmarkVariantReport> variants;
    unsigned seed = 0;
};

/// Generates n_scenes random rectangle scenes, perturbs each ground truth
/// uniformly within the given bounds, fits with every requested loss
/// variant and reports median / 90th-percentile errors plus the
/// convergence rate. Deterministic for a fixed config.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

}  // namespace edgefit
