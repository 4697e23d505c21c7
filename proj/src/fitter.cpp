#include "edgefit/fitter.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace edgefit {

namespace {

constexpr double kPi = std::numbers::pi;

OrientedBox box_from_params(const std::array<double, 5>& p) {
    return {p[0], p[1], p[2], p[3], p[4]};
}

// Keeps the parameter vector a valid long-edge box: sizes clamped, w >= h
// (swapping rotates theta by 90 deg), theta folded into [-pi/2, pi/2).
// Moment vectors swap alongside w/h so the optimizer state stays attached
// to the right parameter.
void canonicalize(std::array<double, 5>& p, std::array<double, 5>& m, std::array<double, 5>& v,
                  double min_size) {
    p[2] = std::max(p[2], min_size);
    p[3] = std::max(p[3], min_size);
    if (p[2] < p[3]) {
        std::swap(p[2], p[3]);
        std::swap(m[2], m[3]);
        std::swap(v[2], v[3]);
        p[4] += kPi / 2.0;
    }
    p[4] = fold_angle(p[4], kPi);
}

double grad_norm(const std::array<double, 5>& g) {
    double s = 0.0;
    for (const double x : g) s += x * x;
    return std::sqrt(s);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * double(values.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - double(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

double angle_error_deg(const OrientedBox& fitted, const OrientedBox& reference) {
    const bool squarish =
        std::abs(reference.w - reference.h) <= 0.01 * std::max(reference.w, reference.h);
    const double period = squarish ? kPi / 2.0 : kPi;
    return std::abs(fold_angle(fitted.theta - reference.theta, period)) * 180.0 / kPi;
}

FitResult fit_box(const GrayImage& img, const OrientedBox& gt, const OrientedBox& init,
                  const LossConfig& loss_cfg, const OptimizerSettings& opt,
                  const CannyConfig& canny_cfg) {
    const EdgeField edge = adaptive_canny(img, canny_cfg);
    if (edge.empty()) throw DegenerateInputError("image yielded no edge points to fit against");
    return fit_to_edges(edge, gt, init, loss_cfg, opt);
}

namespace {

// One optimization stage: adaptive moment steps from `p`, recording into
// the shared trace, returning the best parameters seen.
std::array<double, 5> run_stage(std::array<double, 5> p, const OrientedBox& gt,
                                const EdgeField& edge, const LossConfig& loss_cfg,
                                const OptimizerSettings& opt, int max_iters, FitTrace& trace) {
    std::array<double, 5> m{}, v{};
    const std::array<double, 5> base_step{opt.step_center, opt.step_center, opt.step_size,
                                          opt.step_size, opt.step_theta};
    std::array<double, 5> best_p = p;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;
    double step_scale = 1.0;

    for (int t = 1; t <= max_iters; ++t) {
        const LossEval ev = edge_loss_grad(gt, box_from_params(p), edge, loss_cfg);
        const double gn = grad_norm(ev.grad);
        trace.steps.push_back({p, ev.loss, gn});

        if (ev.loss < best_loss - 1e-12) {
            best_loss = ev.loss;
            best_p = p;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (!loss_cfg.literal_mode && ev.loss <= opt.loss_stop) break;
        if (gn < opt.grad_tol) break;
        if (opt.patience > 0 && since_best >= opt.patience) break;

        const double bc1 = 1.0 - std::pow(opt.beta1, t);
        const double bc2 = 1.0 - std::pow(opt.beta2, t);
        for (int k = 0; k < 5; ++k) {
            m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * ev.grad[k];
            v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * ev.grad[k] * ev.grad[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= base_step[k] * step_scale * mhat / (std::sqrt(vhat) + 1e-8);
        }
        canonicalize(p, m, v, opt.min_size);
        step_scale *= opt.step_decay;
    }
    return best_p;
}

}  // namespace

FitResult fit_to_edges(const EdgeField& edge, const OrientedBox& gt, const OrientedBox& init,
                       const LossConfig& loss_cfg, const OptimizerSettings& opt) {
    if (edge.empty()) throw DegenerateInputError("edge field is empty");

    LossConfig report_cfg = loss_cfg;
    report_cfg.literal_mode = false;
    report_cfg.rotate_gradients = false;
    report_cfg.raw_inner_product = false;
    const double ref_sim = edge_similarity(gt, gt, edge, report_cfg).similarity;
    const double init_sim = edge_similarity(gt, init, edge, report_cfg).similarity;

    std::array<double, 5> p{init.cx, init.cy, init.w, init.h, init.theta};
    FitResult res;
    int budget = opt.max_iters;

    // Poorly aligned starts get a coarse pass with a widened neighborhood
    // before refinement; a well-aligned start goes straight to the target
    // sigma (and stops immediately when already at the optimum). Widening
    // only helps when the field is signal-dominated, which a high
    // reference similarity certifies; on speckle-flooded fields the wide
    // neighborhoods drown the alignment signal instead.
    if (opt.coarse_sigma_scale > 1.0 && ref_sim > 0.85 && init_sim < 0.8 * ref_sim) {
        LossConfig coarse = loss_cfg;
        coarse.sigma_px = loss_cfg.resolved_sigma(init) * opt.coarse_sigma_scale;
        p = run_stage(p, gt, edge, coarse, opt, opt.max_iters / 3, res.trace);
        budget = opt.max_iters - int(res.trace.steps.size());
    }
    p = run_stage(p, gt, edge, loss_cfg, opt, budget, res.trace);

    res.iterations = int(res.trace.steps.size());
    res.final_box = box_from_params(p);

    // Convergence is judged on the normalized similarity so that all
    // optimization variants report a comparable quantity. The bar is
    // relative to the reference box's own similarity: noise edges inside
    // the box cap the attainable plateau well below 1.
    const LossEval final_ev = edge_similarity(gt, res.final_box, edge, report_cfg);
    res.final_similarity = final_ev.similarity;
    res.reference_similarity = ref_sim;
    res.converged = final_ev.similarity >= std::max(0.3, 0.7 * ref_sim);
    res.angle_error_deg = angle_error_deg(res.final_box, gt);
    res.center_error_px = std::hypot(res.final_box.cx - gt.cx, res.final_box.cy - gt.cy);
    return res;
}

std::string variant_name(LossVariant v) {
    switch (v) {
        case LossVariant::Normalized: return "normalized";
        case LossVariant::Literal: return "literal";
        case LossVariant::RotationCompensated: return "rotation_compensated";
    }
    return "unknown";
}

LossConfig variant_config(LossVariant v, const LossConfig& base) {
    LossConfig cfg = base;
    cfg.literal_mode = (v == LossVariant::Literal);
    cfg.rotate_gradients = (v == LossVariant::RotationCompensated);
    return cfg;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    if (cfg.n_scenes < 1) throw ArgumentError("benchmark needs at least one scene");

    std::mt19937 rng(cfg.seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (double(rng()) / 4294967296.0);
    };

    struct SceneCase {
        EdgeField edge;
        OrientedBox gt;
        OrientedBox init;
    };
    std::vector<SceneCase> cases;
    cases.reserve(std::size_t(cfg.n_scenes));

    for (int s = 0; s < cfg.n_scenes; ++s) {
        SceneSpec spec;
        spec.width = 128;
        spec.height = 128;
        spec.background = uniform(20.0, 60.0);
        spec.noise_sigma = cfg.noise_sigma;
        spec.box_blur = cfg.box_blur;

        OrientedBox box;
        box.w = uniform(28.0, 64.0);
        box.h = box.w / uniform(1.4, 3.0);
        box.theta = uniform(-kPi / 2.0, kPi / 2.0);
        // Keep the rotated box inside the canvas with margin to spare.
        const double half_span = 0.5 * std::hypot(box.w, box.h);
        box.cx = uniform(half_span + 3.0, spec.width - half_span - 3.0);
        box.cy = uniform(half_span + 3.0, spec.height - half_span - 3.0);

        spec.objects.push_back({ShapeKind::Rectangle, box, uniform(150.0, 235.0)});

        const RenderedScene scene = render_scene(spec, cfg.seed * 7919u + unsigned(s));
        SceneCase c;
        c.edge = adaptive_canny(scene.image, cfg.canny);
        c.gt = box;

        const double ang = cfg.perturbation.max_angle_deg * kPi / 180.0;
        OrientedBox init = box;
        init.cx += uniform(-cfg.perturbation.max_center_px, cfg.perturbation.max_center_px);
        init.cy += uniform(-cfg.perturbation.max_center_px, cfg.perturbation.max_center_px);
        init.w *= 1.0 + uniform(-cfg.perturbation.max_scale_frac, cfg.perturbation.max_scale_frac);
        init.h *= 1.0 + uniform(-cfg.perturbation.max_scale_frac, cfg.perturbation.max_scale_frac);
        init.theta = fold_angle(init.theta + uniform(-ang, ang), kPi);
        if (init.w < init.h) {
            std::swap(init.w, init.h);
            init.theta = fold_angle(init.theta + kPi / 2.0, kPi);
        }
        c.init = init;
        cases.push_back(std::move(c));
    }

    BenchmarkReport report;
    report.seed = cfg.seed;
    for (const LossVariant variant : cfg.variants) {
        const LossConfig loss_cfg = variant_config(variant, cfg.base_loss);
        std::vector<double> angle_errs, center_errs;
        int converged = 0;
        for (const auto& c : cases) {
            const FitResult fit = fit_to_edges(c.edge, c.gt, c.init, loss_cfg, cfg.optimizer);
            angle_errs.push_back(fit.angle_error_deg);
            center_errs.push_back(fit.center_error_px);
            converged += fit.converged ? 1 : 0;
        }
        BenchmarkVariantReport vr;
        vr.variant = variant_name(variant);
        vr.median_angle_err_deg = quantile(angle_errs, 0.5);
        vr.p90_angle_err_deg = quantile(angle_errs, 0.9);
        vr.median_center_err_px = quantile(center_errs, 0.5);
        vr.p90_center_err_px = quantile(center_errs, 0.9);
        vr.convergence_rate = double(converged) / double(cases.size());
        vr.n = int(cases.size());
        report.variants.push_back(std::move(vr));
    }
    return report;
}

}  // namespace edgefit
