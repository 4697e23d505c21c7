#include "edgefit/matcher.hpp"

#include "edgefit/error.hpp"
#include "edgefit/scene.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace edgefit;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

GrayImage white_rect_on_black(int canvas, double w, double h, double theta) {
    SceneSpec spec = testutil::rect_scene(w, h, theta, canvas, 255.0, 0.0);
    return render_scene(spec, 0).image;
}

}  // namespace

TEST_CASE("build_template traces the rectangle perimeter with unit gradients") {
    const GrayImage img = white_rect_on_black(32, 16, 8, 0.0);
    CannyDiagnostics diag;
    const EdgeField field = adaptive_canny(img, {}, &diag);
    const TemplateModel tpl = build_template(img);
    CHECK(tpl.size() == field.size());
    REQUIRE(tpl.size() >= 16);

    const OrientedBox box{16.0, 16.0, 16.0, 8.0, 0.0};
    for (const auto& p : tpl.points) {
        CHECK(std::hypot(p.gx, p.gy) == doctest::Approx(1.0).epsilon(1e-9));
        // Points hug the rectangle outline: near one extent, within the other.
        const auto [u, v] = local_coords(box, p.c, p.r);
        const double du = std::abs(std::abs(u) - 8.0);
        const double dv = std::abs(std::abs(v) - 4.0);
        CHECK(std::min(du, dv) <= 1.5);
        CHECK(std::abs(u) <= 9.5);
        CHECK(std::abs(v) <= 5.5);
    }
}

TEST_CASE("build_template on a constant image reports an empty template") {
    CHECK_THROWS_AS(build_template(GrayImage(24, 24, 50.0)), EmptyTemplateError);
}

TEST_CASE("self match scores one at the true pose and zero on flat ground") {
    const GrayImage img = white_rect_on_black(48, 22, 10, 25.0 * kDeg);
    const TemplateModel tpl = build_template(img);
    const VectorField grad = sobel_gradients(img);

    CHECK(similarity_at(tpl, grad, 0.0, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    // Anchor displaced so every offset lands in the flat border region.
    CHECK(std::abs(similarity_at(tpl, grad, 1000.0, 1000.0, 0.0)) < 1e-12);
}

TEST_CASE("negating the source gradients negates the score") {
    const GrayImage img = white_rect_on_black(40, 18, 9, 10.0 * kDeg);
    const TemplateModel tpl = build_template(img);
    VectorField grad = sobel_gradients(img);
    const double pos = similarity_at(tpl, grad, 0.0, 0.0, 0.0);
    for (double& g : grad.gx) g = -g;
    for (double& g : grad.gy) g = -g;
    const double neg = similarity_at(tpl, grad, 0.0, 0.0, 0.0);
    CHECK(neg == doctest::Approx(-pos).epsilon(1e-12));
}

TEST_CASE("match_search recovers a rotated displaced rectangle") {
    const double angle_true = 17.0 * kDeg;
    const GrayImage tpl_img = white_rect_on_black(64, 30, 12, 0.0);
    const TemplateModel tpl = build_template(tpl_img);

    SceneSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.background = 0.0;
    const double scx = 70.25, scy = 58.5;
    spec.objects.push_back({ShapeKind::Rectangle, {scx, scy, 30, 12, angle_true}, 255.0});
    const GrayImage src = render_scene(spec, 0).image;

    // The template object is centered on its 64x64 canvas; the true anchor
    // puts the rotated template center onto the source object center.
    const double tcx = 32.0, tcy = 32.0;
    const double ca = std::cos(angle_true), sa = std::sin(angle_true);
    const double true_c = scx - (ca * tcx - sa * tcy);
    const double true_r = scy - (sa * tcx + ca * tcy);

    MatchParams params;
    params.angle_lo = 9.0 * kDeg;
    params.angle_hi = 25.0 * kDeg;
    params.angle_step = 2.0 * kDeg;
    params.score_min = 0.5;
    const auto results = match_search(tpl, src, params);
    REQUIRE(!results.empty());
    const MatchResult& best = results.front();
    CHECK(std::hypot(best.r - true_r, best.c - true_c) <= 0.5);
    CHECK(std::abs(best.angle - angle_true) <= 0.5 * kDeg);
    CHECK(best.score > 0.8);
}

TEST_CASE("match_search finds both copies of a twice-placed target") {
    const GrayImage tpl_img = white_rect_on_black(40, 18, 8, 0.0);
    const TemplateModel tpl = build_template(tpl_img);

    SceneSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.background = 0.0;
    spec.objects.push_back({ShapeKind::Rectangle, {34, 36, 18, 8, 0.0}, 255.0});
    spec.objects.push_back({ShapeKind::Rectangle, {92, 88, 18, 8, 0.0}, 255.0});
    const GrayImage src = render_scene(spec, 0).image;

    MatchParams params;
    params.angle_lo = 0.0;
    params.angle_hi = 0.0;
    params.angle_step = 2.0 * kDeg;
    params.score_min = 0.8;
    const auto results = match_search(tpl, src, params);
    CHECK(results.size() == 2);
}

TEST_CASE("match_search with an unsatisfiable threshold returns nothing") {
    const GrayImage tpl_img = white_rect_on_black(40, 18, 8, 0.0);
    const TemplateModel tpl = build_template(tpl_img);
    MatchParams params;
    params.angle_lo = 0.0;
    params.angle_hi = 0.0;
    params.score_min = 1.01;
    CHECK(match_search(tpl, tpl_img, params).empty());
}

TEST_CASE("match_search validates its arguments") {
    const GrayImage tpl_img = white_rect_on_black(40, 18, 8, 0.0);
    const TemplateModel tpl = build_template(tpl_img);
    MatchParams params;
    params.angle_lo = 0.2;
    params.angle_hi = 0.1;
    CHECK_THROWS_AS(match_search(tpl, tpl_img, params), ArgumentError);
    params.angle_hi = 0.3;
    params.angle_step = 0.0;
    CHECK_THROWS_AS(match_search(tpl, tpl_img, params), ArgumentError);
    params.angle_step = 0.1;
    params.score_min = 0.0;
    CHECK_THROWS_AS(match_search(tpl, tpl_img, params), ArgumentError);
}

TEST_CASE("match results are sorted and pairwise separated") {
    const GrayImage tpl_img = white_rect_on_black(40, 18, 8, 0.0);
    const TemplateModel tpl = build_template(tpl_img);

    SceneSpec spec;
    spec.width = 160;
    spec.height = 96;
    spec.background = 0.0;
    spec.objects.push_back({ShapeKind::Rectangle, {30, 30, 18, 8, 0.0}, 255.0});
    spec.objects.push_back({ShapeKind::Rectangle, {80, 48, 18, 8, 8.0 * kDeg}, 255.0});
    spec.objects.push_back({ShapeKind::Rectangle, {130, 66, 18, 8, -8.0 * kDeg}, 255.0});
    const GrayImage src = render_scene(spec, 0).image;

    MatchParams params;
    params.angle_lo = -12.0 * kDeg;
    params.angle_hi = 12.0 * kDeg;
    params.angle_step = 2.0 * kDeg;
    params.score_min = 0.6;
    params.nms_radius = 10.0;
    const auto results = match_search(tpl, src, params);
    REQUIRE(results.size() >= 3);
    for (std::size_t i = 1; i < results.size(); ++i) {
        CHECK(results[i - 1].score >= results[i].score);
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (std::size_t j = i + 1; j < results.size(); ++j) {
            const double dist = std::hypot(results[i].r - results[j].r,
                                           results[i].c - results[j].c);
            const double dang = std::abs(results[i].angle - results[j].angle);
            // Refinement may move both poses by up to one grid step.
            CHECK((dist >= params.nms_radius - 2.0 || dang >= 2.0 * params.angle_step - 1e-9));
        }
    }
}
