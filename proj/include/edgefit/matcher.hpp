#pragma once

#include "edgefit/edges.hpp"
#include "edgefit/image.hpp"

#include <cstddef>
#include <numbers>
#include <vector>

namespace edgefit {

/// One template edge point: offsets are relative to the template anchor
/// (the top-left pixel of the template image), the gradient is stored
/// unit-normalized.
struct TemplatePoint {
    double r = 0.0;  // row offset
    double c = 0.0;  // column offset
    double gx = 0.0;
    double gy = 0.0;
};

/// Edge model of a template image for gradient-direction matching.
struct TemplateModel {
    std::vector<TemplatePoint> points;

    std::size_t size() const { return points.size(); }
};

/// A match pose: anchor position (r = row, c = column) in source pixels,
/// rotation angle in radians, and the mean-cosine score in [-1, 1].
struct MatchResult {
    double r = 0.0;
    double c = 0.0;
    double angle = 0.0;
    double score = 0.0;
};

struct MatchParams {
    double angle_lo = 0.0;  // radians
    double angle_hi = 0.0;  // radians
    double angle_step = 2.0 * std::numbers::pi / 180.0;
    double score_min = 0.7;
    double nms_radius = -1.0;  // <= 0: half the template diagonal
};

/// Extracts an edge model from a template image. Throws EmptyTemplateError
/// when edge extraction yields no points.
TemplateModel build_template(const GrayImage& img, const CannyConfig& cfg = {});

/// Mean normalized inner product between the template gradients, rotated
/// by `angle`, and the source gradients sampled at the correspondingly
/// rotated offsets from anchor (r, c). Samples with magnitude below 1e-9
/// contribute zero. Always in [-1, 1].
double similarity_at(const TemplateModel& tpl, const VectorField& src, double r, double c,
                     double angle);

/// Sweeps all integer anchors and the given angle range, keeps grid-local
/// maxima at or above score_min, applies greedy non-maximum suppression
/// (a candidate is suppressed when it lies within nms_radius of a kept
/// result and within 2 * angle_step of its angle), then refines each
/// survivor by an independent 3-point parabolic fit in r, c and angle.
/// Results are sorted by descending score.
std::vector<MatchResult> match_search(const TemplateModel& tpl, const GrayImage& src,
                                      const MatchParams& params);

}  // namespace edgefit
