#include "edgefit/edge_loss.hpp"

#include "edgefit/error.hpp"
#include "edgefit/grad_check.hpp"
#include "edgefit/scene.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace edgefit;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Hand-built edge field: points spread around a box with outward-normal
// gradients, mirroring what edge extraction produces on a rendered
// rectangle but fully under test control.
EdgeField synthetic_rect_field(const OrientedBox& box, double step = 1.0) {
    EdgeField field;
    field.source_width = int(box.cx * 2);
    field.source_height = int(box.cy * 2);
    const auto lu = box.axis_long();
    const auto sv = box.axis_short();
    auto emit = [&](double u, double v, double nx, double ny) {
        field.points.push_back({box.cx + u * lu[0] + v * sv[0], box.cy + u * lu[1] + v * sv[1],
                                100.0 * (nx * lu[0] + ny * sv[0]),
                                100.0 * (nx * lu[1] + ny * sv[1])});
    };
    for (double u = -box.w / 2; u <= box.w / 2; u += step) {
        emit(u, -box.h / 2, 0.0, -1.0);
        emit(u, box.h / 2, 0.0, 1.0);
    }
    for (double v = -box.h / 2 + step; v <= box.h / 2 - step; v += step) {
        emit(-box.w / 2, v, -1.0, 0.0);
        emit(box.w / 2, v, 1.0, 0.0);
    }
    return field;
}

// Literal double-sum evaluated from scratch: own local frame, own
// sigmoids, own mapping. Independent of the library evaluation path.
double naive_literal_similarity(const OrientedBox& gt, const OrientedBox& pb,
                                const EdgeField& field, double sigma, double slope) {
    auto containment = [&](const OrientedBox& b, double x, double y) {
        const double c = std::cos(b.theta), s = std::sin(b.theta);
        const double u = c * (x - b.cx) + s * (y - b.cy);
        const double v = -s * (x - b.cx) + c * (y - b.cy);
        auto G = [&](double d, double e) { return 1.0 - 1.0 / (1.0 + std::exp(-slope * (d - e))); };
        return G(std::abs(u), b.w / 2) * G(std::abs(v), b.h / 2);
    };
    const std::size_t n = field.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const EdgePoint& pi = field.points[i];
        const double cg = std::cos(gt.theta), sg = std::sin(gt.theta);
        const double ug = cg * (pi.x - gt.cx) + sg * (pi.y - gt.cy);
        const double vg = -sg * (pi.x - gt.cx) + cg * (pi.y - gt.cy);
        const double alpha = (ug + gt.w / 2) / gt.w;
        const double beta = (vg + gt.h / 2) / gt.h;
        const double cp = std::cos(pb.theta), sp = std::sin(pb.theta);
        const double mx = pb.cx + (alpha - 0.5) * pb.w * cp + (beta - 0.5) * pb.h * -sp;
        const double my = pb.cy + (alpha - 0.5) * pb.w * sp + (beta - 0.5) * pb.h * cp;

        const double mi = std::hypot(pi.gx, pi.gy);
        for (std::size_t j = 0; j < n; ++j) {
            const EdgePoint& pj = field.points[j];
            const double d2 = (pj.x - mx) * (pj.x - mx) + (pj.y - my) * (pj.y - my);
            const double w = std::exp(-d2 / (2.0 * sigma * sigma));
            const double mj = std::hypot(pj.gx, pj.gy);
            const double cos_ij = (pi.gx * pj.gx + pi.gy * pj.gy) / (mi * mj);
            total += w * cos_ij * containment(gt, pi.x, pi.y) * containment(pb, pj.x, pj.y);
        }
    }
    return total / (double(n) * double(n));
}

}  // namespace

TEST_CASE("map_point is the identity for coincident boxes") {
    std::mt19937 rng(3);
    for (int t = 0; t < 200; ++t) {
        const OrientedBox b = testutil::random_box(rng);
        const double px = b.cx + testutil::uniform(rng, -40, 40);
        const double py = b.cy + testutil::uniform(rng, -40, 40);
        const Correspondence corr = map_point(b, b, px, py);
        CHECK(std::abs(corr.mapped_point[0] - px) < 1e-9);
        CHECK(std::abs(corr.mapped_point[1] - py) < 1e-9);
    }
}

TEST_CASE("map_point anchors the top-left corner for any candidate") {
    std::mt19937 rng(5);
    for (int t = 0; t < 100; ++t) {
        const OrientedBox gt = testutil::random_box(rng);
        const OrientedBox pb = testutil::random_box(rng);
        const auto gt_tl = to_corners(gt).corner(0);
        const auto pb_tl = to_corners(pb).corner(0);
        const Correspondence corr = map_point(gt, pb, gt_tl[0], gt_tl[1]);
        CHECK(std::abs(corr.rel[0]) < 1e-9);
        CHECK(std::abs(corr.rel[1]) < 1e-9);
        CHECK(std::abs(corr.mapped_point[0] - pb_tl[0]) < 1e-9);
        CHECK(std::abs(corr.mapped_point[1] - pb_tl[1]) < 1e-9);
    }
}

TEST_CASE("map_point sends centers to centers") {
    const Correspondence corr = map_point({0, 0, 20, 10, 0}, {5, 5, 40, 10, 0}, 0.0, 0.0);
    CHECK(corr.rel[0] == doctest::Approx(0.5));
    CHECK(corr.rel[1] == doctest::Approx(0.5));
    CHECK(corr.mapped_point[0] == doctest::Approx(5.0));
    CHECK(corr.mapped_point[1] == doctest::Approx(5.0));
}

TEST_CASE("map_point jacobian matches finite differences") {
    std::mt19937 rng(7);
    for (int t = 0; t < 100; ++t) {
        const OrientedBox gt = testutil::random_box(rng);
        const OrientedBox pb = testutil::random_box(rng);
        const double px = gt.cx + testutil::uniform(rng, -30, 30);
        const double py = gt.cy + testutil::uniform(rng, -30, 30);
        const Correspondence corr = map_point(gt, pb, px, py);
        const std::array<double, 5> p0{pb.cx, pb.cy, pb.w, pb.h, pb.theta};
        for (int k = 0; k < 5; ++k) {
            const double h = 1e-6;
            std::array<double, 5> p = p0;
            p[k] += h;
            const auto up = map_point(gt, {p[0], p[1], p[2], p[3], p[4]}, px, py).mapped_point;
            p[k] = p0[k] - h;
            const auto dn = map_point(gt, {p[0], p[1], p[2], p[3], p[4]}, px, py).mapped_point;
            CHECK(corr.d_mapped[0][k] ==
                  doctest::Approx((up[0] - dn[0]) / (2 * h)).epsilon(1e-5));
            CHECK(corr.d_mapped[1][k] ==
                  doctest::Approx((up[1] - dn[1]) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("gaussian_weights closed forms and truncation") {
    EdgeField field;
    field.source_width = field.source_height = 64;
    field.points.push_back({10.0, 10.0, 1.0, 0.0});           // at the mapped point
    field.points.push_back({10.0, 12.0, 1.0, 0.0});           // at distance sigma = 2
    field.points.push_back({10.0, 10.0 + 3.1 * 2.0, 1.0, 0.0});  // beyond 3 sigma

    LossConfig cfg;
    cfg.sigma_px = 2.0;
    const auto weights = gaussian_weights({10.0, 10.0}, field, cfg);
    REQUIRE(weights.size() == 2);
    CHECK(weights[0].index == 0);
    CHECK(weights[0].weight == doctest::Approx(1.0));
    CHECK(weights[1].index == 1);
    CHECK(weights[1].weight == doctest::Approx(std::exp(-0.5)));

    LossConfig untruncated = cfg;
    untruncated.trunc_sigmas = 0.0;
    CHECK(gaussian_weights({10.0, 10.0}, field, untruncated).size() == 3);

    LossConfig bad;
    bad.sigma_px = 0.0;
    CHECK_THROWS_AS(gaussian_weights({10.0, 10.0}, field, bad), ArgumentError);
}

TEST_CASE("literal similarity equals the naive double sum") {
    std::mt19937 rng(11);
    const OrientedBox gt{40, 40, 30, 14, 20 * kDeg};
    OrientedBox pb = gt;
    pb.cx += 2.0;
    pb.w *= 1.08;
    pb.theta += 4 * kDeg;

    SUBCASE("six handpicked points against the 36-term loop") {
        EdgeField field;
        field.source_width = field.source_height = 80;
        for (int i = 0; i < 6; ++i) {
            field.points.push_back({testutil::uniform(rng, 20, 60), testutil::uniform(rng, 20, 60),
                                    testutil::uniform(rng, -30, 30),
                                    testutil::uniform(rng, -30, 30)});
        }
        LossConfig cfg;
        cfg.sigma_px = 2.5;
        cfg.trunc_sigmas = 0.0;  // oracle runs every pair
        cfg.literal_mode = true;
        const LossEval ev = edge_similarity(gt, pb, field, cfg);
        const double expect = naive_literal_similarity(gt, pb, field, 2.5, 10.0);
        CHECK(std::abs(ev.similarity - expect) < 1e-12);
        CHECK(ev.loss == doctest::Approx(-ev.similarity));
        CHECK(ev.pairs_used == 36);
    }
    SUBCASE("fifty synthetic perimeter points") {
        EdgeField field = synthetic_rect_field({40, 40, 16, 8, 10 * kDeg}, 2.0);
        field.points.resize(std::min<std::size_t>(field.size(), 50));
        LossConfig cfg;
        cfg.sigma_px = 2.0;
        cfg.trunc_sigmas = 0.0;
        cfg.literal_mode = true;
        const LossEval ev = edge_similarity(gt, pb, field, cfg);
        const double expect = naive_literal_similarity(gt, pb, field, 2.0, 10.0);
        CHECK(std::abs(ev.similarity - expect) < 1e-12);
    }
}

TEST_CASE("normalized similarity at the true box on a clean scene") {
    SceneSpec spec = testutil::rect_scene(90, 36, 25 * kDeg, 160);
    const OrientedBox gt = spec.objects[0].box;
    const RenderedScene scene = render_scene(spec, 1);
    const EdgeField edge = adaptive_canny(scene.image);
    REQUIRE(!edge.empty());

    // Tight neighborhoods are dominated by each point pairing with itself
    // at weight 1 and cosine 1.
    LossConfig tight;
    tight.sigma_px = 1.0;
    CHECK(edge_similarity(gt, gt, edge, tight).similarity >= 0.99);

    // The default adaptive sigma admits corner neighborhoods where
    // perpendicular gradients mix, which caps the plateau lower.
    const LossEval ev = edge_similarity(gt, gt, edge, {});
    CHECK(ev.similarity >= 0.95);
    CHECK(ev.similarity <= 1.0);
    CHECK(ev.loss == doctest::Approx(1.0 - ev.similarity));
}

TEST_CASE("candidate displaced onto flat background scores zero with zero gradient") {
    SceneSpec spec = testutil::rect_scene(40, 18, 15 * kDeg, 128);
    const OrientedBox gt = spec.objects[0].box;
    const RenderedScene scene = render_scene(spec, 1);
    const EdgeField edge = adaptive_canny(scene.image);

    OrientedBox pb = gt;
    pb.cx += 400.0;  // far beyond every edge neighborhood
    pb.cy += 400.0;

    const LossEval ev = edge_loss_grad(gt, pb, edge, {});
    CHECK(ev.pairs_used == 0);
    CHECK(std::abs(ev.similarity) < 1e-12);
    CHECK(ev.loss == doctest::Approx(1.0));
    for (const double g : ev.grad) CHECK(g == 0.0);

    LossConfig untruncated;
    untruncated.trunc_sigmas = 0.0;
    const LossEval ev2 = edge_loss_grad(gt, pb, edge, untruncated);
    for (const double g : ev2.grad) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("empty edge fields are rejected") {
    EdgeField empty;
    empty.source_width = empty.source_height = 32;
    CHECK_THROWS_AS(edge_similarity({0, 0, 4, 2, 0}, {0, 0, 4, 2, 0}, empty, {}),
                    DegenerateInputError);
    CHECK_THROWS_AS(edge_loss_grad({0, 0, 4, 2, 0}, {0, 0, 4, 2, 0}, empty, {}),
                    DegenerateInputError);
}

TEST_CASE("analytic gradient matches finite differences across variants") {
    std::mt19937 rng(17);
    GradCheckConfig base;
    for (int t = 0; t < 12; ++t) {
        const OrientedBox gt{64, 64, testutil::uniform(rng, 30, 50), testutil::uniform(rng, 14, 24),
                             testutil::uniform(rng, -1.2, 1.2)};
        OrientedBox pb = gt;
        pb.cx += testutil::uniform(rng, -4, 4);
        pb.cy += testutil::uniform(rng, -4, 4);
        pb.w *= 1.0 + testutil::uniform(rng, -0.08, 0.08);
        pb.h *= 1.0 + testutil::uniform(rng, -0.08, 0.08);
        pb.theta += testutil::uniform(rng, -0.12, 0.12);
        const EdgeField field = synthetic_rect_field(gt);

        for (const bool literal : {false, true}) {
            for (const bool rotate : {false, true}) {
                LossConfig cfg;
                cfg.literal_mode = literal;
                cfg.rotate_gradients = rotate;
                const auto errs =
                    relative_grad_errors(gt, pb, field, cfg, base.fd_steps, base.numeric_floor);
                for (int k = 0; k < 5; ++k) {
                    if (errs[k] < 0.0) continue;
                    CHECK(errs[k] < 1e-4);
                }
            }
        }
    }
}

TEST_CASE("mirror-symmetric scene has a stationary center coordinate") {
    // Points and gradients mirrored about the vertical axis through the
    // box center; the horizontal pulls cancel.
    const OrientedBox box{50, 50, 24, 12, 0.0};
    EdgeField field;
    field.source_width = field.source_height = 100;
    auto add_pair = [&](double dx, double dy, double gx, double gy) {
        field.points.push_back({box.cx + dx, box.cy + dy, gx, gy});
        field.points.push_back({box.cx - dx, box.cy + dy, -gx, gy});
    };
    add_pair(12.0, 0.0, 40.0, 0.0);
    add_pair(12.0, 3.0, 40.0, 5.0);
    add_pair(6.0, 6.0, 10.0, 30.0);
    add_pair(9.0, -6.0, 25.0, -30.0);
    field.points.push_back({box.cx, box.cy - 6.0, 0.0, -35.0});  // on the axis

    const LossEval ev = edge_loss_grad(box, box, field, {});
    CHECK(std::abs(ev.grad[0]) < 1e-8);
}

TEST_CASE("enlarging the truncation radius barely changes the similarity") {
    SceneSpec spec = testutil::rect_scene(90, 36, 25 * kDeg, 160);
    const OrientedBox gt = spec.objects[0].box;
    const RenderedScene scene = render_scene(spec, 1);
    const EdgeField edge = adaptive_canny(scene.image);

    LossConfig three;
    three.trunc_sigmas = 3.0;
    LossConfig six;
    six.trunc_sigmas = 6.0;
    // Near the optimum the 3-sigma window already holds essentially all
    // of the Gaussian mass; the consistency degrades gracefully with
    // displacement as the core weights shrink.
    for (const double pert : {0.0, 0.25}) {
        OrientedBox pb = gt;
        pb.cx += pert;
        pb.theta += pert * kDeg;
        const double s3 = edge_similarity(gt, pb, edge, three).similarity;
        const double s6 = edge_similarity(gt, pb, edge, six).similarity;
        CHECK(std::abs(s3 - s6) < 1e-3);
    }
}

TEST_CASE("similarity peaks at the true box over a perturbation grid") {
    SceneSpec spec = testutil::rect_scene(60, 24, -35 * kDeg, 128);
    const OrientedBox gt = spec.objects[0].box;
    const RenderedScene scene = render_scene(spec, 2);
    const EdgeField edge = adaptive_canny(scene.image);

    const double s0 = edge_similarity(gt, gt, edge, {}).similarity;
    for (int ic = 0; ic < 5; ++ic) {
        for (int is = 0; is < 5; ++is) {
            for (int ia = 0; ia < 5; ++ia) {
                if (ic == 2 && is == 2 && ia == 2) continue;
                const double dc = (ic - 2) * 1.5;
                const double sc = 1.0 + (is - 2) * 0.025;
                const double da = (ia - 2) * 1.5 * kDeg;
                const OrientedBox pb{gt.cx + dc, gt.cy + dc, gt.w * sc, gt.h * sc, gt.theta + da};
                CHECK(edge_similarity(gt, pb, edge, {}).similarity < s0);
            }
        }
    }
}

TEST_CASE("grad_check samples every parameter and stays accurate") {
    GradCheckConfig cfg;
    cfg.trials = 10;
    cfg.seed = 3;
    const GradCheckReport report = grad_check(cfg);
    CHECK(report.trials == 10);
    for (int k = 0; k < 5; ++k) {
        CHECK(report.samples[k] > 0);
        CHECK(report.max_rel_err[k] < 1e-4);
        CHECK(report.mean_rel_err[k] <= report.max_rel_err[k]);
    }
    CHECK(report.max_overall() < 1e-4);
}

TEST_CASE("normalized similarity is bounded by one in magnitude") {
    std::mt19937 rng(23);
    EdgeField field;
    field.source_width = field.source_height = 64;
    for (int i = 0; i < 40; ++i) {
        field.points.push_back({testutil::uniform(rng, 5, 59), testutil::uniform(rng, 5, 59),
                                testutil::uniform(rng, -50, 50), testutil::uniform(rng, -50, 50)});
    }
    for (int t = 0; t < 50; ++t) {
        const OrientedBox gt = testutil::random_box(rng, 40.0);
        const OrientedBox pb = testutil::random_box(rng, 40.0);
        const LossEval ev = edge_similarity(gt, pb, field, {});
        CHECK(ev.similarity <= 1.0 + 1e-12);
        CHECK(ev.similarity >= -1.0 - 1e-12);
        CHECK(ev.loss >= -1e-12);
        CHECK(ev.loss <= 2.0 + 1e-12);
    }
}
