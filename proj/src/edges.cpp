#include "edgefit/edges.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace edgefit {

namespace {

// tan(22.5 deg): boundary between the horizontal/vertical and diagonal
// direction bins.
const double kTan225 = std::tan(std::atan(1.0) / 2.0);

void validate_config(const CannyConfig& cfg) {
    if (!(cfg.high_init > cfg.low_init) || !(cfg.low_init > 0.0)) {
        throw ArgumentError("canny thresholds must satisfy high > low > 0");
    }
    if (!(cfg.decay > 0.0 && cfg.decay < 1.0)) {
        throw ArgumentError("canny decay must lie in (0, 1)");
    }
    if (!(cfg.density_target > 0.0 && cfg.density_target < 1.0)) {
        throw ArgumentError("canny density target must lie in (0, 1)");
    }
    if (!(cfg.floor > 0.0)) {
        throw ArgumentError("canny threshold floor must be positive");
    }
}

// Thins gradient magnitude ridges along the quantized gradient direction.
// Threshold-independent, so the adaptive loop reuses one pass.
std::vector<double> non_maximum_suppression(const VectorField& grad,
                                            const std::vector<double>& mag) {
    const int w = grad.width, h = grad.height;
    std::vector<double> nms(mag.size(), 0.0);
    auto mag_at = [&](int x, int y) -> double {
        if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
        return mag[std::size_t(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            const double m = mag[i];
            if (m <= 0.0) continue;
            const double gx = grad.gx[i], gy = grad.gy[i];
            const double ax = std::abs(gx), ay = std::abs(gy);
            int dx, dy;
            if (ay <= ax * kTan225) {
                dx = 1; dy = 0;
            } else if (ax <= ay * kTan225) {
                dx = 0; dy = 1;
            } else if ((gx > 0.0) == (gy > 0.0)) {
                dx = 1; dy = 1;
            } else {
                dx = 1; dy = -1;
            }
            // Asymmetric tie-break keeps exactly one pixel of a two-wide
            // plateau straddling an ideal step.
            if (m > mag_at(x - dx, y - dy) && m >= mag_at(x + dx, y + dy)) {
                nms[i] = m;
            }
        }
    }
    return nms;
}

// Double-threshold hysteresis: 8-connected flood fill from strong pixels
// across everything at or above the low threshold.
std::size_t hysteresis(const std::vector<double>& nms, int w, int h, double high, double low,
                       std::vector<unsigned char>& visited) {
    visited.assign(nms.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < nms.size(); ++i) {
        if (nms[i] >= high && !visited[i]) {
            visited[i] = 1;
            stack.push_back(i);
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                const int cx = int(cur % w), cy = int(cur / w);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const std::size_t ni = std::size_t(ny) * w + nx;
                        if (!visited[ni] && nms[ni] >= low) {
                            visited[ni] = 1;
                            stack.push_back(ni);
                        }
                    }
                }
            }
        }
    }
    std::size_t count = 0;
    for (const unsigned char v : visited) count += v;
    return count;
}

}  // namespace

EdgeField adaptive_canny(const GrayImage& img, const CannyConfig& cfg, CannyDiagnostics* diag) {
    if (img.width < 3 || img.height < 3) {
        throw DimensionError("adaptive_canny needs an image of at least 3x3");
    }
    validate_config(cfg);

    const int w = img.width, h = img.height;
    const VectorField grad = sobel_gradients(img);
    std::vector<double> mag(grad.gx.size());
    for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::sqrt(grad.gx[i] * grad.gx[i] + grad.gy[i] * grad.gy[i]);
    }
    const std::vector<double> nms = non_maximum_suppression(grad, mag);

    const double target = cfg.density_target * double(w) * double(h);
    double high = cfg.high_init, low = cfg.low_init;
    std::vector<unsigned char> visited;
    std::size_t count = 0;
    bool hit_floor = false;
    int passes = 0;
    for (;;) {
        ++passes;
        if (diag) diag->high_thresholds.push_back(high);
        count = hysteresis(nms, w, h, high, low, visited);
        if (double(count) >= target) break;
        high *= cfg.decay;
        low *= cfg.decay;
        if (high < cfg.floor) {
            hit_floor = true;
            break;
        }
    }

    EdgeField field;
    field.source_width = w;
    field.source_height = h;
    field.points.reserve(count);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            if (visited[i]) {
                field.points.push_back({double(x), double(y), grad.gx[i], grad.gy[i]});
            }
        }
    }
    if (diag) {
        diag->passes = passes;
        diag->hit_floor = hit_floor;
        diag->edge_count = field.points.size();
    }
    return field;
}

GrayImage edge_mask(const EdgeField& field, double magnitude_scale) {
    GrayImage out;
    if (field.source_width < 1 || field.source_height < 1) return out;
    out = GrayImage(field.source_width, field.source_height, 0.0);
    if (field.points.empty()) return out;

    double scale = magnitude_scale;
    if (scale <= 0.0) {
        double sum = 0.0;
        for (const auto& p : field.points) sum += std::hypot(p.gx, p.gy);
        scale = sum / double(field.points.size());
    }
    if (scale <= 0.0) return out;

    for (const auto& p : field.points) {
        const double m = std::hypot(p.gx, p.gy);
        const double v = 2.0 * (1.0 / (1.0 + std::exp(-m / scale)) - 0.5);
        out.at(int(std::lround(p.x)), int(std::lround(p.y))) = v;
    }
    return out;
}

EdgePyramid build_edge_pyramid(const GrayImage& mask) {
    constexpr int kLevels = 5;
    int w = mask.width, h = mask.height;
    for (int i = 0; i < kLevels; ++i) {
        if (w < 2 || h < 2) {
            throw DimensionError("edge mask too small to pool 5 times (needs >= 17 px per side)");
        }
        w = (w + 1) / 2;
        h = (h + 1) / 2;
    }
    EdgePyramid pyr;
    pyr.levels.reserve(kLevels);
    const GrayImage* prev = &mask;
    for (int i = 0; i < kLevels; ++i) {
        pyr.levels.push_back(max_pool_2x2(*prev));
        prev = &pyr.levels.back();
    }
    return pyr;
}

}  // namespace edgefit
