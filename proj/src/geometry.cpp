#include "edgefit/geometry.hpp"

#include "edgefit/error.hpp"

#include <cmath>
#include <numbers>

namespace edgefit {

namespace {

constexpr double kMinEdgeLen = 1e-6;
constexpr double kEdgePairTol = 0.01;   // relative mismatch allowed between opposite edges
constexpr double kSquareTol = 1e-9;     // relative tolerance for the square tie-break

struct BoundarySigmoid {
    double g;      // 1 deep inside (d << e), 0 far outside, 0.5 at d == e
    double dg_dd;  // derivative with respect to the distance d
};

// G(d, e) = 1 - 1/(1 + exp(-slope (d - e))), evaluated without
// cancellation on either side of the boundary.
BoundarySigmoid boundary_sigmoid(double d, double e, double slope) {
    const double z = slope * (d - e);
    double g, gm;
    if (z >= 0.0) {
        const double t = std::exp(-z);
        g = t / (1.0 + t);
        gm = 1.0 / (1.0 + t);
    } else {
        const double t = std::exp(z);
        g = 1.0 / (1.0 + t);
        gm = t / (1.0 + t);
    }
    return {g, -slope * g * gm};
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::array<double, 2> OrientedBox::axis_long() const {
    return {std::cos(theta), std::sin(theta)};
}

std::array<double, 2> OrientedBox::axis_short() const {
    return {-std::sin(theta), std::cos(theta)};
}

bool OrientedBox::valid() const {
    return std::isfinite(cx) && std::isfinite(cy) && h > 0.0 && w >= h &&
           theta >= -std::numbers::pi / 2 && theta < std::numbers::pi / 2;
}

double fold_angle(double theta, double period) {
    double t = std::fmod(theta + period / 2.0, period);
    if (t < 0.0) t += period;
    return t - period / 2.0;
}

OrientedBox from_corners(const CornerQuad& quad) {
    std::array<std::array<double, 2>, 4> p;
    for (int i = 0; i < 4; ++i) p[i] = quad.corner(i);

    std::array<std::array<double, 2>, 4> e;
    std::array<double, 4> len;
    for (int i = 0; i < 4; ++i) {
        const auto& a = p[i];
        const auto& b = p[(i + 1) % 4];
        e[i] = {b[0] - a[0], b[1] - a[1]};
        len[i] = std::hypot(e[i][0], e[i][1]);
        if (!(len[i] >= kMinEdgeLen)) {
            throw GeometryError("degenerate quad: edge shorter than 1e-6 px");
        }
    }
    auto pair_mismatch = [](double a, double b) {
        return std::abs(a - b) / std::max(a, b);
    };
    if (pair_mismatch(len[0], len[2]) > kEdgePairTol ||
        pair_mismatch(len[1], len[3]) > kEdgePairTol) {
        throw GeometryError("quad is not a rectangle: opposite edges differ by more than 1%");
    }

    OrientedBox box;
    box.cx = (p[0][0] + p[1][0] + p[2][0] + p[3][0]) / 4.0;
    box.cy = (p[0][1] + p[1][1] + p[2][1] + p[3][1]) / 4.0;

    const double m02 = 0.5 * (len[0] + len[2]);
    const double m13 = 0.5 * (len[1] + len[3]);
    const double pi = std::numbers::pi;

    if (std::abs(m02 - m13) <= kSquareTol * std::max(m02, m13)) {
        // Square: the long-edge direction is ambiguous, canonicalize into
        // [-pi/4, pi/4).
        box.w = box.h = 0.5 * (m02 + m13);
        box.theta = fold_angle(std::atan2(e[0][1], e[0][0]), pi / 2.0);
    } else if (m02 > m13) {
        box.w = m02;
        box.h = m13;
        // e[2] runs opposite e[0]; their difference averages out noise.
        box.theta = fold_angle(std::atan2(e[0][1] - e[2][1], e[0][0] - e[2][0]), pi);
    } else {
        box.w = m13;
        box.h = m02;
        box.theta = fold_angle(std::atan2(e[1][1] - e[3][1], e[1][0] - e[3][0]), pi);
    }
    return box;
}

CornerQuad to_corners(const OrientedBox& box) {
    const auto u = box.axis_long();
    const auto v = box.axis_short();
    const double hw = 0.5 * box.w, hh = 0.5 * box.h;
    // Local corners in clockwise order (image coordinates, y down),
    // starting from (-w/2, -h/2).
    const double lu[4] = {-hw, hw, hw, -hw};
    const double lv[4] = {-hh, -hh, hh, hh};
    CornerQuad q;
    for (int i = 0; i < 4; ++i) {
        q.set_corner(i, box.cx + lu[i] * u[0] + lv[i] * v[0],
                     box.cy + lu[i] * u[1] + lv[i] * v[1]);
    }
    return q;
}

std::pair<double, double> local_coords(const OrientedBox& box, double px, double py) {
    const double c = std::cos(box.theta), s = std::sin(box.theta);
    const double dx = px - box.cx, dy = py - box.cy;
    return {c * dx + s * dy, -s * dx + c * dy};
}

SoftContainment soft_containment(const OrientedBox& box, double px, double py,
                                 const ContainmentConfig& cfg) {
    const auto [u, v] = local_coords(box, px, py);
    const double extent_scale = cfg.full_extent ? 1.0 : 0.5;
    const double ew = extent_scale * box.w;
    const double eh = extent_scale * box.h;

    const BoundarySigmoid A = boundary_sigmoid(std::abs(u), ew, cfg.slope);
    const BoundarySigmoid B = boundary_sigmoid(std::abs(v), eh, cfg.slope);
    const double su = sign_of(u), sv = sign_of(v);
    const double c = std::cos(box.theta), s = std::sin(box.theta);

    // du/d(cx, cy, theta) = (-c, -s, v); dv/d(cx, cy, theta) = (s, -c, -u).
    // dG/de = -dG/dd, and the extents scale with w (resp. h) by extent_scale.
    const std::array<double, 5> dA = {
        A.dg_dd * su * -c, A.dg_dd * su * -s, -A.dg_dd * extent_scale, 0.0, A.dg_dd * su * v};
    const std::array<double, 5> dB = {
        B.dg_dd * sv * s, B.dg_dd * sv * -c, 0.0, -B.dg_dd * extent_scale, B.dg_dd * sv * -u};

    SoftContainment out;
    out.value = A.g * B.g;
    for (int k = 0; k < 5; ++k) out.d_params[k] = B.g * dA[k] + A.g * dB[k];
    return out;
}

}  // namespace edgefit
