#include "edgefit/scene.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace edgefit {

namespace {

struct P2 {
    double x, y;
};

double cross(P2 a, P2 b) { return a.x * b.y - a.y * b.x; }
double dot(P2 a, P2 b) { return a.x * b.x + a.y * b.y; }

double polygon_area(const std::vector<P2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        s += cross(poly[i], poly[(i + 1) % poly.size()]);
    }
    return 0.5 * std::abs(s);
}

// One Sutherland-Hodgman pass against the half-plane sign * coord <= limit
// (axis 0 = x, axis 1 = y).
std::vector<P2> clip_halfplane(const std::vector<P2>& poly, int axis, double sign, double limit) {
    std::vector<P2> out;
    const std::size_t n = poly.size();
    auto coord = [&](const P2& p) { return sign * (axis == 0 ? p.x : p.y); };
    for (std::size_t i = 0; i < n; ++i) {
        const P2& a = poly[i];
        const P2& b = poly[(i + 1) % n];
        const bool ain = coord(a) <= limit;
        const bool bin = coord(b) <= limit;
        if (ain) out.push_back(a);
        if (ain != bin) {
            const double t = (limit - coord(a)) / (coord(b) - coord(a));
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

// Signed area of the unit-circle sector swept from ray p to ray q.
double sector_area(P2 p, P2 q) { return 0.5 * std::atan2(cross(p, q), dot(p, q)); }

// Signed contribution of one polygon edge to area(polygon /\ unit disk):
// triangles against the origin inside the disk, circular sectors outside.
double disk_edge_piece(P2 a, P2 b) {
    const bool ain = dot(a, a) <= 1.0;
    const bool bin = dot(b, b) <= 1.0;
    if (ain && bin) return 0.5 * cross(a, b);

    const P2 d{b.x - a.x, b.y - a.y};
    const double A = dot(d, d);
    if (A < 1e-300) return 0.0;
    const double B = 2.0 * dot(a, d);
    const double C = dot(a, a) - 1.0;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) return sector_area(a, b);
    const double sq = std::sqrt(disc);
    const double t1 = (-B - sq) / (2.0 * A);
    const double t2 = (-B + sq) / (2.0 * A);
    auto at = [&](double t) { return P2{a.x + t * d.x, a.y + t * d.y}; };

    if (ain) {  // leaves the disk at t2
        const P2 m = at(std::clamp(t2, 0.0, 1.0));
        return 0.5 * cross(a, m) + sector_area(m, b);
    }
    if (bin) {  // enters the disk at t1
        const P2 m = at(std::clamp(t1, 0.0, 1.0));
        return sector_area(a, m) + 0.5 * cross(m, b);
    }
    if (t1 > 0.0 && t2 < 1.0 && t1 < t2) {  // passes through
        const P2 m1 = at(t1), m2 = at(t2);
        return sector_area(a, m1) + 0.5 * cross(m1, m2) + sector_area(m2, b);
    }
    return sector_area(a, b);
}

double disk_polygon_area(const std::vector<P2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        s += disk_edge_piece(poly[i], poly[(i + 1) % poly.size()]);
    }
    return std::abs(s);
}

// Pixel (px, py) corners mapped into the box-local frame.
std::array<P2, 4> pixel_local_corners(const OrientedBox& box, double px, double py) {
    const double c = std::cos(box.theta), s = std::sin(box.theta);
    std::array<P2, 4> out;
    const double ox[4] = {-0.5, 0.5, 0.5, -0.5};
    const double oy[4] = {-0.5, -0.5, 0.5, 0.5};
    for (int i = 0; i < 4; ++i) {
        const double dx = px + ox[i] - box.cx;
        const double dy = py + oy[i] - box.cy;
        out[i] = {c * dx + s * dy, -s * dx + c * dy};
    }
    return out;
}

// Exact pixel coverage: rotation preserves area, so the rectangle case is
// the pixel square clipped against four half-planes, and the ellipse case
// is the affinely normalized pixel against the unit disk (areas scale by
// the axis product).
double exact_coverage(const SceneObject& obj, double px, double py) {
    const auto corners = pixel_local_corners(obj.box, px, py);
    const double hw = 0.5 * obj.box.w, hh = 0.5 * obj.box.h;
    if (obj.shape == ShapeKind::Rectangle) {
        std::vector<P2> poly(corners.begin(), corners.end());
        poly = clip_halfplane(poly, 0, 1.0, hw);
        if (poly.empty()) return 0.0;
        poly = clip_halfplane(poly, 0, -1.0, hw);
        if (poly.empty()) return 0.0;
        poly = clip_halfplane(poly, 1, 1.0, hh);
        if (poly.empty()) return 0.0;
        poly = clip_halfplane(poly, 1, -1.0, hh);
        if (poly.empty()) return 0.0;
        return std::clamp(polygon_area(poly), 0.0, 1.0);
    }
    std::vector<P2> poly;
    poly.reserve(4);
    for (const P2& p : corners) poly.push_back({p.x / hw, p.y / hh});
    return std::clamp(disk_polygon_area(poly) * hw * hh, 0.0, 1.0);
}

bool point_in_shape(const SceneObject& obj, double x, double y) {
    const auto [u, v] = local_coords(obj.box, x, y);
    if (obj.shape == ShapeKind::Rectangle) {
        return std::abs(u) <= 0.5 * obj.box.w && std::abs(v) <= 0.5 * obj.box.h;
    }
    const double a = u / (0.5 * obj.box.w);
    const double b = v / (0.5 * obj.box.h);
    return a * a + b * b <= 1.0;
}

double sampled_coverage(const SceneObject& obj, double px, double py, int ss) {
    int inside = 0;
    const double inv = 1.0 / double(ss);
    for (int sy = 0; sy < ss; ++sy) {
        const double y = py - 0.5 + (sy + 0.5) * inv;
        for (int sx = 0; sx < ss; ++sx) {
            const double x = px - 0.5 + (sx + 0.5) * inv;
            inside += point_in_shape(obj, x, y) ? 1 : 0;
        }
    }
    return double(inside) / double(ss * ss);
}

void validate_spec(const SceneSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw ArgumentError("scene canvas must be >= 1x1");
    if (spec.noise_sigma < 0.0) throw ArgumentError("noise sigma must be non-negative");
    if (spec.background < 0.0 || spec.background > 255.0) {
        throw ArgumentError("background intensity must lie in [0, 255]");
    }
    for (const auto& obj : spec.objects) {
        if (!obj.box.valid()) throw ArgumentError("scene object box is not a valid oriented box");
        if (obj.intensity < 0.0 || obj.intensity > 255.0) {
            throw ArgumentError("object intensity must lie in [0, 255]");
        }
        if (std::abs(obj.intensity - spec.background) < 20.0) {
            throw ArgumentError("object intensity must differ from the background by >= 20");
        }
        const CornerQuad q = to_corners(obj.box);
        for (int i = 0; i < 4; ++i) {
            const auto [x, y] = q.corner(i);
            if (x < 2.0 || y < 2.0 || x > spec.width - 2.0 || y > spec.height - 2.0) {
                throw ArgumentError("scene object must fit inside the canvas with a 2 px margin");
            }
        }
    }
}

GrayImage box_blur_3x3(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    auto px = [&](int x, int y) {
        return img.at(std::clamp(x, 0, img.width - 1), std::clamp(y, 0, img.height - 1));
    };
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double sum = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) sum += px(x + dx, y + dy);
            out.at(x, y) = sum / 9.0;
        }
    }
    return out;
}

}  // namespace

RenderedScene render_scene(const SceneSpec& spec, unsigned seed) {
    validate_spec(spec);

    RenderedScene scene;
    scene.image = GrayImage(spec.width, spec.height, spec.background);
    for (const auto& obj : spec.objects) scene.boxes.push_back(obj.box);

    for (const auto& obj : spec.objects) {
        // Pixels outside the shape's padded bounding box keep coverage 0.
        const CornerQuad q = to_corners(obj.box);
        double bx0 = q.xy[0], bx1 = q.xy[0], by0 = q.xy[1], by1 = q.xy[1];
        for (int i = 1; i < 4; ++i) {
            bx0 = std::min(bx0, q.xy[2 * i]);
            bx1 = std::max(bx1, q.xy[2 * i]);
            by0 = std::min(by0, q.xy[2 * i + 1]);
            by1 = std::max(by1, q.xy[2 * i + 1]);
        }
        const int x0 = std::max(0, int(std::floor(bx0 - 1.0)));
        const int x1 = std::min(spec.width - 1, int(std::ceil(bx1 + 1.0)));
        const int y0 = std::max(0, int(std::floor(by0 - 1.0)));
        const int y1 = std::min(spec.height - 1, int(std::ceil(by1 + 1.0)));

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double cov = spec.supersample > 1
                                       ? sampled_coverage(obj, x, y, spec.supersample)
                                       : exact_coverage(obj, x, y);
                if (cov <= 0.0) continue;
                double& v = scene.image.at(x, y);
                v = v * (1.0 - cov) + obj.intensity * cov;
            }
        }
    }

    if (spec.box_blur) scene.image = box_blur_3x3(scene.image);

    if (spec.noise_sigma > 0.0) {
        // Hand-rolled Box-Muller over mt19937 keeps the noise stream
        // independent of the standard library's distribution internals.
        std::mt19937 rng(seed);
        auto uniform01 = [&rng]() { return (double(rng()) + 1.0) / 4294967296.0; };
        for (double& v : scene.image.data) {
            const double u1 = uniform01();
            const double u2 = uniform01();
            const double z = std::sqrt(-2.0 * std::log(u1)) *
                             std::cos(2.0 * std::numbers::pi * u2);
            v = std::clamp(v + spec.noise_sigma * z, 0.0, 255.0);
        }
    }
    return scene;
}

}  // namespace edgefit
