#include "edgefit/grad_check.hpp"

#include "edgefit/error.hpp"
#include "edgefit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace edgefit {

namespace {

constexpr double kPi = std::numbers::pi;

double loss_value(const OrientedBox& gt, const std::array<double, 5>& p, const EdgeField& edge,
                  const LossConfig& cfg) {
    const OrientedBox pb{p[0], p[1], p[2], p[3], p[4]};
    return edge_similarity(gt, pb, edge, cfg).loss;
}

}  // namespace

double GradCheckReport::max_overall() const {
    double m = 0.0;
    for (const double e : max_rel_err) m = std::max(m, e);
    return m;
}

std::array<double, 5> relative_grad_errors(const OrientedBox& gt, const OrientedBox& pb,
                                           const EdgeField& edge, const LossConfig& cfg,
                                           const std::array<double, 5>& fd_steps,
                                           double numeric_floor) {
    // Pin sigma so finite differences through w/h do not drag the
    // adaptive default along, and drop truncation so the compared
    // function is smooth.
    LossConfig pinned = cfg;
    pinned.sigma_px = cfg.resolved_sigma(pb);
    pinned.trunc_sigmas = 0.0;

    const LossEval analytic = edge_loss_grad(gt, pb, edge, pinned);
    const std::array<double, 5> p0{pb.cx, pb.cy, pb.w, pb.h, pb.theta};

    std::array<double, 5> errs{};
    for (int k = 0; k < 5; ++k) {
        // Five-point central stencil: h^4 truncation keeps the numeric
        // reference sharp even where the net gradient nearly cancels.
        const double h = fd_steps[k];
        std::array<double, 5> p = p0;
        p[k] = p0[k] + 2 * h;
        const double f2p = loss_value(gt, p, edge, pinned);
        p[k] = p0[k] + h;
        const double f1p = loss_value(gt, p, edge, pinned);
        p[k] = p0[k] - h;
        const double f1m = loss_value(gt, p, edge, pinned);
        p[k] = p0[k] - 2 * h;
        const double f2m = loss_value(gt, p, edge, pinned);
        const double numeric = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h);
        if (std::abs(numeric) < numeric_floor && std::abs(analytic.grad[k]) < numeric_floor) {
            errs[k] = -1.0;
            continue;
        }
        const double denom = std::max(std::abs(numeric), std::abs(analytic.grad[k]));
        errs[k] = std::abs(analytic.grad[k] - numeric) / denom;
    }
    return errs;
}

GradCheckReport grad_check(const GradCheckConfig& cfg) {
    if (cfg.trials < 1) throw ArgumentError("grad_check needs at least one trial");

    std::mt19937 rng(cfg.seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (double(rng()) / 4294967296.0);
    };

    GradCheckReport report;
    report.trials = cfg.trials;

    for (int trial = 0; trial < cfg.trials; ++trial) {
        SceneSpec spec;
        spec.width = 96;
        spec.height = 96;
        spec.background = uniform(20.0, 50.0);
        spec.noise_sigma = uniform(0.0, 4.0);

        OrientedBox gt;
        gt.w = uniform(24.0, 52.0);
        gt.h = gt.w / uniform(1.4, 2.8);
        gt.theta = uniform(-kPi / 2.0, kPi / 2.0);
        const double half_span = 0.5 * std::hypot(gt.w, gt.h);
        gt.cx = uniform(half_span + 3.0, spec.width - half_span - 3.0);
        gt.cy = uniform(half_span + 3.0, spec.height - half_span - 3.0);
        spec.objects.push_back(
            {trial % 4 == 3 ? ShapeKind::Ellipse : ShapeKind::Rectangle, gt, uniform(150.0, 235.0)});

        const RenderedScene scene = render_scene(spec, cfg.seed * 40493u + unsigned(trial));
        EdgeField edge = adaptive_canny(scene.image);
        if (edge.empty()) continue;
        // Noisy scenes can flood the detector with speckle edges; the
        // check compares gradients, not detection quality, so a stride
        // subsample keeps the untruncated double sum affordable.
        if (edge.size() > 600) {
            const std::size_t stride = (edge.size() + 599) / 600;
            EdgeField thin;
            thin.source_width = edge.source_width;
            thin.source_height = edge.source_height;
            for (std::size_t j = 0; j < edge.points.size(); j += stride) {
                thin.points.push_back(edge.points[j]);
            }
            edge = std::move(thin);
        }

        OrientedBox pb = gt;
        if (trial % 10 != 0) {  // every tenth trial checks the unperturbed optimum
            pb.cx += uniform(-4.0, 4.0);
            pb.cy += uniform(-4.0, 4.0);
            pb.w *= 1.0 + uniform(-0.1, 0.1);
            pb.h *= 1.0 + uniform(-0.1, 0.1);
            pb.theta = fold_angle(pb.theta + uniform(-0.15, 0.15), kPi);
            if (pb.w < pb.h) {
                std::swap(pb.w, pb.h);
                pb.theta = fold_angle(pb.theta + kPi / 2.0, kPi);
            }
        }

        const std::array<double, 5> errs =
            relative_grad_errors(gt, pb, edge, cfg.loss, cfg.fd_steps, cfg.numeric_floor);
        for (int k = 0; k < 5; ++k) {
            if (errs[k] < 0.0) continue;
            report.max_rel_err[k] = std::max(report.max_rel_err[k], errs[k]);
            report.mean_rel_err[k] += errs[k];
            ++report.samples[k];
        }
    }
    for (int k = 0; k < 5; ++k) {
        if (report.samples[k] > 0) report.mean_rel_err[k] /= double(report.samples[k]);
    }
    return report;
}

}  // namespace edgefit
