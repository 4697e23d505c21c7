#include "edgefit/edge_loss.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace edgefit {

namespace {

constexpr double kDenomEps = 1e-8;

struct Vec2 {
    double x, y;
};

}  // namespace

double LossConfig::resolved_sigma(const OrientedBox& pb) const {
    if (sigma_px > 0.0) return sigma_px;
    return std::max(2.0, 0.03 * std::min(pb.w, pb.h));
}

Correspondence map_point(const OrientedBox& gt, const OrientedBox& pb, double px, double py) {
    const auto [u, v] = local_coords(gt, px, py);
    const double alpha = (u + 0.5 * gt.w) / gt.w;
    const double beta = (v + 0.5 * gt.h) / gt.h;

    const double c = std::cos(pb.theta), s = std::sin(pb.theta);
    const double ux = c, uy = s;    // candidate long axis
    const double vx = -s, vy = c;   // candidate short axis
    const double aw = (alpha - 0.5) * pb.w;
    const double bh = (beta - 0.5) * pb.h;

    Correspondence out;
    out.source_point = {px, py};
    out.rel = {alpha, beta};
    out.mapped_point = {pb.cx + aw * ux + bh * vx, pb.cy + aw * uy + bh * vy};
    // d(axis_long)/dtheta = axis_short, d(axis_short)/dtheta = -axis_long.
    out.d_mapped[0] = {1.0, 0.0, (alpha - 0.5) * ux, (beta - 0.5) * vx, aw * vx - bh * ux};
    out.d_mapped[1] = {0.0, 1.0, (alpha - 0.5) * uy, (beta - 0.5) * vy, aw * vy - bh * uy};
    return out;
}

std::vector<WeightedNeighbor> gaussian_weights(const std::array<double, 2>& mapped,
                                               const EdgeField& edge, const LossConfig& cfg) {
    if (!(cfg.sigma_px > 0.0)) {
        throw ArgumentError("gaussian_weights requires an explicit positive sigma_px");
    }
    const double inv2s2 = 1.0 / (2.0 * cfg.sigma_px * cfg.sigma_px);
    const double r2 = cfg.trunc_sigmas > 0.0
                          ? (cfg.trunc_sigmas * cfg.sigma_px) * (cfg.trunc_sigmas * cfg.sigma_px)
                          : std::numeric_limits<double>::infinity();
    std::vector<WeightedNeighbor> out;
    for (std::size_t j = 0; j < edge.points.size(); ++j) {
        const double dx = edge.points[j].x - mapped[0];
        const double dy = edge.points[j].y - mapped[1];
        const double d2 = dx * dx + dy * dy;
        if (d2 > r2) continue;
        out.push_back({j, std::exp(-d2 * inv2s2)});
    }
    return out;
}

namespace {

// Uniform grid over the edge points: cells at least as large as the
// search radius (so a query scans the surrounding block) but never more
// than ~1k cells per axis, which bounds memory for tiny radii on large
// rasters.
class NeighborGrid {
public:
    NeighborGrid(const EdgeField& edge, double radius) {
        min_x_ = min_y_ = std::numeric_limits<double>::infinity();
        double max_x = -min_x_, max_y = -min_y_;
        for (const auto& p : edge.points) {
            min_x_ = std::min(min_x_, p.x);
            min_y_ = std::min(min_y_, p.y);
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
        }
        cell_ = std::max({radius, (max_x - min_x_) / 1024.0, (max_y - min_y_) / 1024.0});
        reach_ = int(std::ceil(radius / cell_));
        nx_ = int((max_x - min_x_) / cell_) + 1;
        ny_ = int((max_y - min_y_) / cell_) + 1;
        cells_.resize(std::size_t(nx_) * ny_);
        for (std::size_t j = 0; j < edge.points.size(); ++j) {
            cells_[cell_of(edge.points[j].x, edge.points[j].y)].push_back(j);
        }
    }

    // Visits every candidate within the search radius of (x, y); cells
    // are scanned row-major and filled in input order, keeping sums
    // deterministic.
    template <typename Fn>
    void for_candidates(double x, double y, Fn&& fn) const {
        // Clamping before the int conversion keeps far-out queries (a
        // diverged candidate box) defined; they simply visit no cells.
        const int cx = int(std::floor(std::clamp((x - min_x_) / cell_, -2.0, double(nx_) + 1.0)));
        const int cy = int(std::floor(std::clamp((y - min_y_) / cell_, -2.0, double(ny_) + 1.0)));
        for (int gy = std::max(0, cy - reach_); gy <= std::min(ny_ - 1, cy + reach_); ++gy) {
            for (int gx = std::max(0, cx - reach_); gx <= std::min(nx_ - 1, cx + reach_); ++gx) {
                for (const std::size_t j : cells_[std::size_t(gy) * nx_ + gx]) fn(j);
            }
        }
    }

private:
    std::size_t cell_of(double x, double y) const {
        const int cx = std::clamp(int((x - min_x_) / cell_), 0, nx_ - 1);
        const int cy = std::clamp(int((y - min_y_) / cell_), 0, ny_ - 1);
        return std::size_t(cy) * nx_ + cx;
    }

    double cell_ = 1.0;
    double min_x_ = 0.0, min_y_ = 0.0;
    int reach_ = 1;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::size_t>> cells_;
};

LossEval evaluate(const OrientedBox& gt, const OrientedBox& pb, const EdgeField& edge,
                  const LossConfig& cfg, bool with_grad) {
    if (edge.empty()) throw DegenerateInputError("edge field is empty");

    const std::size_t n = edge.points.size();
    const double sigma = cfg.resolved_sigma(pb);
    const double inv_s2 = 1.0 / (sigma * sigma);
    const double inv2s2 = 0.5 * inv_s2;
    const double trunc_r2 = cfg.trunc_sigmas > 0.0
                                ? (cfg.trunc_sigmas * sigma) * (cfg.trunc_sigmas * sigma)
                                : std::numeric_limits<double>::infinity();

    const ContainmentConfig ccfg{cfg.containment_slope, cfg.full_extent_containment};

    // Per-point constants: comparison vectors, reference containment, and
    // the candidate containment with its partials.
    std::vector<Vec2> dir(n);
    std::vector<double> a_gt(n);
    std::vector<SoftContainment> a_pb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const EdgePoint& p = edge.points[i];
        if (cfg.raw_inner_product) {
            dir[i] = {p.gx, p.gy};
        } else {
            const double mag = std::hypot(p.gx, p.gy);
            dir[i] = mag > 0.0 ? Vec2{p.gx / mag, p.gy / mag} : Vec2{0.0, 0.0};
        }
        a_gt[i] = soft_containment(gt, p.x, p.y, ccfg).value;
        a_pb[i] = soft_containment(pb, p.x, p.y, ccfg);
    }

    const double dtheta = pb.theta - gt.theta;
    const double cr = std::cos(dtheta), sr = std::sin(dtheta);

    const bool truncated = std::isfinite(trunc_r2);
    std::optional<NeighborGrid> grid;
    if (truncated) grid.emplace(edge, cfg.trunc_sigmas * sigma);

    LossEval out;
    double s_num = 0.0, s_den = 0.0;
    std::array<double, 5> ds_num{};

    for (std::size_t i = 0; i < n; ++i) {
        const Correspondence corr = map_point(gt, pb, edge.points[i].x, edge.points[i].y);
        const double mx = corr.mapped_point[0], my = corr.mapped_point[1];

        // Reference-side vector, optionally rotated into the candidate frame.
        Vec2 ri = dir[i];
        Vec2 dri_dtheta{0.0, 0.0};
        if (cfg.rotate_gradients) {
            ri = {cr * dir[i].x - sr * dir[i].y, sr * dir[i].x + cr * dir[i].y};
            dri_dtheta = {-sr * dir[i].x - cr * dir[i].y, cr * dir[i].x - sr * dir[i].y};
        }

        double num = 0.0, den = kDenomEps;
        std::array<double, 5> dnum{}, dden{};
        auto process_pair = [&](std::size_t j) {
            const double qx = edge.points[j].x - mx;
            const double qy = edge.points[j].y - my;
            const double d2 = qx * qx + qy * qy;
            if (d2 > trunc_r2) return;
            const double wij = std::exp(-d2 * inv2s2);
            if (wij > 0.0) ++out.pairs_used;
            const double cos_ij = ri.x * dir[j].x + ri.y * dir[j].y;
            const double aj = a_pb[j].value;

            num += wij * cos_ij * aj;
            den += wij * aj;
            if (!with_grad) return;

            for (int k = 0; k < 5; ++k) {
                // dw/dparam: the Gaussian moves with the mapped position.
                const double dw =
                    wij * inv_s2 * (qx * corr.d_mapped[0][k] + qy * corr.d_mapped[1][k]);
                const double daj = a_pb[j].d_params[k];
                double dcos = 0.0;
                if (cfg.rotate_gradients && k == 4) {
                    dcos = dri_dtheta.x * dir[j].x + dri_dtheta.y * dir[j].y;
                }
                dnum[k] += dw * cos_ij * aj + wij * dcos * aj + wij * cos_ij * daj;
                dden[k] += dw * aj + wij * daj;
            }
        };
        if (truncated) {
            grid->for_candidates(mx, my, process_pair);
        } else {
            for (std::size_t j = 0; j < n; ++j) process_pair(j);
        }

        if (cfg.literal_mode) {
            // den carries the epsilon seed only for the normalized form.
            s_num += a_gt[i] * num;
            if (with_grad) {
                for (int k = 0; k < 5; ++k) ds_num[k] += a_gt[i] * dnum[k];
            }
        } else {
            const double r = num / den;
            s_num += a_gt[i] * r;
            s_den += a_gt[i];
            if (with_grad) {
                for (int k = 0; k < 5; ++k) {
                    ds_num[k] += a_gt[i] * (dnum[k] * den - num * dden[k]) / (den * den);
                }
            }
        }
    }

    if (cfg.literal_mode) {
        const double scale = 1.0 / (double(n) * double(n));
        out.similarity = s_num * scale;
        out.loss = -out.similarity;
        if (with_grad) {
            for (int k = 0; k < 5; ++k) out.grad[k] = -ds_num[k] * scale;
        }
    } else {
        const double den_total = s_den + kDenomEps;
        out.similarity = s_num / den_total;
        out.loss = 1.0 - out.similarity;
        if (with_grad) {
            for (int k = 0; k < 5; ++k) out.grad[k] = -ds_num[k] / den_total;
        }
    }
    return out;
}

}  // namespace

LossEval edge_similarity(const OrientedBox& gt, const OrientedBox& pb, const EdgeField& edge,
                         const LossConfig& cfg) {
    return evaluate(gt, pb, edge, cfg, false);
}

LossEval edge_loss_grad(const OrientedBox& gt, const OrientedBox& pb, const EdgeField& edge,
                        const LossConfig& cfg) {
    return evaluate(gt, pb, edge, cfg, true);
}

}  // namespace edgefit
