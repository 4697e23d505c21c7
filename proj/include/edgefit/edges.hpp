#pragma once

#include "edgefit/image.hpp"

#include <cstddef>
#include <vector>

namespace edgefit {

/// One extracted edge pixel with its intensity gradient.
struct EdgePoint {
    double x = 0.0;
    double y = 0.0;
    double gx = 0.0;
    double gy = 0.0;
};

/// Sparse set of edge points with their gradient vectors, plus the
/// dimensions of the raster they came from. Every stored gradient has
/// positive magnitude and every point lies inside the source raster.
struct EdgeField {
    std::vector<EdgePoint> points;
    int source_width = 0;
    int source_height = 0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct CannyConfig {
    double high_init = 80.0;
    double low_init = 40.0;
    double decay = 0.7;            // multiplies both thresholds each retry
    double density_target = 0.05;  // required edge count as a fraction of the area
    double floor = 1.0;            // stop once the high threshold falls below this
};

/// Per-pass bookkeeping of the adaptive threshold loop.
struct CannyDiagnostics {
    std::vector<double> high_thresholds;  // one entry per executed pass
    int passes = 0;
    bool hit_floor = false;
    std::size_t edge_count = 0;
};

/// Canny edge extraction (Sobel gradients, 4-direction non-maximum
/// suppression, double-threshold hysteresis with 8-connected flood fill)
/// with adaptive thresholds: while the surviving edge count stays below
/// density_target * area, both thresholds decay and hysteresis reruns,
/// until the target is met or the high threshold drops below the floor.
EdgeField adaptive_canny(const GrayImage& img, const CannyConfig& cfg = {},
                         CannyDiagnostics* diag = nullptr);

/// Rasterizes an edge field into a [0, 1] mask: each edge pixel carries
/// its sigmoid-compressed gradient magnitude 2*(sigmoid(|g|/s) - 0.5),
/// non-edge pixels are 0. A non-positive magnitude_scale selects the mean
/// edge magnitude as s.
GrayImage edge_mask(const EdgeField& field, double magnitude_scale = 0.0);

/// Five successively max-pooled copies of an edge mask. Level i+1 has
/// ceil(level i / 2) dimensions.
struct EdgePyramid {
    std::vector<GrayImage> levels;
};

/// Builds the five-level pyramid by repeated 2x2 max pooling. The mask
/// must be at least 17 px per side so that each pooling input stays >= 2.
EdgePyramid build_edge_pyramid(const GrayImage& mask);

}  // namespace edgefit
