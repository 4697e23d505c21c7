#include "edgefit/matcher.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace edgefit {

namespace {

constexpr double kNormEps = 1e-9;

struct Candidate {
    double score;
    int r, c, ai;
};

// Peak offset of the parabola through (-1, sm), (0, s0), (+1, sp),
// clamped to one grid step; zero when the triple is not concave.
double parabolic_offset(double sm, double s0, double sp) {
    const double denom = sm - 2.0 * s0 + sp;
    if (denom >= -1e-12) return 0.0;
    return std::clamp(0.5 * (sm - sp) / denom, -1.0, 1.0);
}

}  // namespace

TemplateModel build_template(const GrayImage& img, const CannyConfig& cfg) {
    const EdgeField field = adaptive_canny(img, cfg);
    if (field.empty()) {
        throw EmptyTemplateError("template image yielded no edge points");
    }
    TemplateModel tpl;
    tpl.points.reserve(field.size());
    for (const auto& p : field.points) {
        const double mag = std::hypot(p.gx, p.gy);
        tpl.points.push_back({p.y, p.x, p.gx / mag, p.gy / mag});
    }
    return tpl;
}

double similarity_at(const TemplateModel& tpl, const VectorField& src, double r, double c,
                     double angle) {
    if (tpl.points.empty()) return 0.0;
    const double ca = std::cos(angle), sa = std::sin(angle);
    double sum = 0.0;
    for (const auto& tp : tpl.points) {
        const double ox = ca * tp.c - sa * tp.r;
        const double oy = sa * tp.c + ca * tp.r;
        const auto [qx, qy] = bilinear_sample(src, c + ox, r + oy);
        const double qn = std::sqrt(qx * qx + qy * qy);
        if (qn < kNormEps) continue;
        const double tgx = ca * tp.gx - sa * tp.gy;
        const double tgy = sa * tp.gx + ca * tp.gy;
        sum += (tgx * qx + tgy * qy) / qn;
    }
    return std::clamp(sum / double(tpl.points.size()), -1.0, 1.0);
}

std::vector<MatchResult> match_search(const TemplateModel& tpl, const GrayImage& src,
                                      const MatchParams& params) {
    if (params.angle_hi < params.angle_lo) throw ArgumentError("empty angle range");
    if (!(params.angle_step > 0.0)) throw ArgumentError("angle_step must be positive");
    if (!(params.score_min > 0.0)) throw ArgumentError("score_min must be positive");
    if (tpl.points.empty()) throw EmptyTemplateError("cannot match an empty template");

    std::vector<double> angles;
    for (double a = params.angle_lo; a <= params.angle_hi + 1e-12; a += params.angle_step) {
        angles.push_back(a);
    }

    double nms_radius = params.nms_radius;
    if (nms_radius <= 0.0) {
        double rmin = tpl.points[0].r, rmax = rmin, cmin = tpl.points[0].c, cmax = cmin;
        for (const auto& p : tpl.points) {
            rmin = std::min(rmin, p.r);
            rmax = std::max(rmax, p.r);
            cmin = std::min(cmin, p.c);
            cmax = std::max(cmax, p.c);
        }
        nms_radius = 0.5 * std::hypot(rmax - rmin, cmax - cmin);
    }

    const VectorField grad = sobel_gradients(src);
    const int h = src.height, w = src.width;
    const int na = int(angles.size());
    std::vector<double> scores(std::size_t(na) * h * w);
    auto score_at = [&](int ai, int r, int c) -> double {
        return scores[(std::size_t(ai) * h + r) * w + c];
    };
    for (int ai = 0; ai < na; ++ai) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                scores[(std::size_t(ai) * h + r) * w + c] =
                    similarity_at(tpl, grad, double(r), double(c), angles[ai]);
            }
        }
    }

    // Grid-local maxima along the six axis directions (clamped at borders).
    std::vector<Candidate> cands;
    for (int ai = 0; ai < na; ++ai) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const double s = score_at(ai, r, c);
                if (s < params.score_min) continue;
                bool ok = true;
                if (r > 0 && score_at(ai, r - 1, c) > s) ok = false;
                if (ok && r + 1 < h && score_at(ai, r + 1, c) > s) ok = false;
                if (ok && c > 0 && score_at(ai, r, c - 1) > s) ok = false;
                if (ok && c + 1 < w && score_at(ai, r, c + 1) > s) ok = false;
                if (ok && ai > 0 && score_at(ai - 1, r, c) > s) ok = false;
                if (ok && ai + 1 < na && score_at(ai + 1, r, c) > s) ok = false;
                if (ok) cands.push_back({s, r, c, ai});
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(b.score, a.r, a.c, a.ai) < std::tie(a.score, b.r, b.c, b.ai);
    });

    // Greedy suppression: survivors are pairwise separated by at least
    // nms_radius in position or 2 * angle_step in angle.
    std::vector<Candidate> kept;
    for (const auto& cand : cands) {
        bool suppressed = false;
        for (const auto& k : kept) {
            const double dist = std::hypot(double(cand.r - k.r), double(cand.c - k.c));
            const double dang = std::abs(angles[cand.ai] - angles[k.ai]);
            if (dist < nms_radius && dang < 2.0 * params.angle_step) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }

    std::vector<MatchResult> results;
    results.reserve(kept.size());
    for (const auto& k : kept) {
        const double r0 = k.r, c0 = k.c, a0 = angles[k.ai];
        const double s0 = k.score;
        const double dr = parabolic_offset(similarity_at(tpl, grad, r0 - 1, c0, a0), s0,
                                           similarity_at(tpl, grad, r0 + 1, c0, a0));
        const double dc = parabolic_offset(similarity_at(tpl, grad, r0, c0 - 1, a0), s0,
                                           similarity_at(tpl, grad, r0, c0 + 1, a0));
        const double da = parabolic_offset(similarity_at(tpl, grad, r0, c0, a0 - params.angle_step),
                                           s0,
                                           similarity_at(tpl, grad, r0, c0, a0 + params.angle_step));
        MatchResult m;
        m.r = r0 + dr;
        m.c = c0 + dc;
        m.angle = a0 + da * params.angle_step;
        m.score = similarity_at(tpl, grad, m.r, m.c, m.angle);
        results.push_back(m);
    }
    std::sort(results.begin(), results.end(),
              [](const MatchResult& a, const MatchResult& b) { return a.score > b.score; });
    return results;
}

}  // namespace edgefit
