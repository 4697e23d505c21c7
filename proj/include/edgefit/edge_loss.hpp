#pragma once

#include "edgefit/edges.hpp"
#include "edgefit/geometry.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace edgefit {

/// Configuration of the edge-gradient similarity loss between a reference
/// (ground-truth) box and a candidate (predicted) box over one edge field.
struct LossConfig {
    /// Gaussian std (px) of the neighborhood weighting. Non-positive
    /// selects the adaptive default max(2, 0.03 * min(pb.w, pb.h)),
    /// resolved once per evaluation and held constant for gradients.
    double sigma_px = 0.0;
    /// Neighborhood cutoff in sigmas. Non-positive disables truncation.
    /// The cutoff makes evaluation O(n * k) but introduces negligible
    /// jump discontinuities at the cutoff radius; gradients cover the
    /// smooth part only.
    double trunc_sigmas = 3.0;
    /// Slope of the soft-containment boundary sigmoids.
    double containment_slope = 10.0;
    /// Plain double-sum form: S = (1/n^2) sum_ij w * c * a_gt * a_pb with
    /// loss = -S. Default is the normalized form: per-point weighted mean
    /// cosine, averaged under reference containment weights, loss = 1 - S.
    bool literal_mode = false;
    /// Compare raw gradient vectors instead of unit-normalized ones.
    bool raw_inner_product = false;
    /// Rotate the reference gradient into the candidate box frame before
    /// the inner product (ablation variant; adds a gradient path through
    /// the candidate angle).
    bool rotate_gradients = false;
    /// Containment compares against full extents instead of half extents.
    bool full_extent_containment = false;

    double resolved_sigma(const OrientedBox& pb) const;
};

/// Where a point of the reference box lands inside the candidate box when
/// carried over by its normalized offsets from the top-left corner.
struct Correspondence {
    std::array<double, 2> source_point{};
    std::array<double, 2> mapped_point{};
    /// (alpha, beta): offsets from the top-left corner normalized by the
    /// reference box extents; in [0, 1]^2 for points inside the box.
    std::array<double, 2> rel{};
    /// Jacobian of mapped_point with respect to the candidate parameters
    /// (cx, cy, w, h, theta); row 0 is x, row 1 is y.
    std::array<std::array<double, 5>, 2> d_mapped{};
};

struct WeightedNeighbor {
    std::size_t index = 0;
    double weight = 0.0;
};

struct LossEval {
    double similarity = 0.0;
    double loss = 0.0;
    /// d(loss)/d(cx, cy, w, h, theta) of the candidate box.
    std::array<double, 5> grad{};
    /// Count of (i, j) terms that entered the sums with nonzero weight.
    std::size_t pairs_used = 0;
};

/// Maps a point through the relative-position correspondence: identical
/// boxes map every point onto itself, and the reference top-left corner
/// maps onto the candidate top-left corner for any candidate.
Correspondence map_point(const OrientedBox& gt, const OrientedBox& pb, double px, double py);

/// Gaussian weights exp(-d^2 / (2 sigma^2)) of all edge points within
/// trunc_sigmas * sigma of the mapped position. Requires cfg.sigma_px > 0.
std::vector<WeightedNeighbor> gaussian_weights(const std::array<double, 2>& mapped,
                                               const EdgeField& edge, const LossConfig& cfg);

/// Similarity and loss value only (gradient left zero).
LossEval edge_similarity(const OrientedBox& gt, const OrientedBox& pb, const EdgeField& edge,
                         const LossConfig& cfg = {});

/// Similarity, loss and the analytic gradient with respect to the five
/// candidate parameters. The gradient flows through the Gaussian weights
/// (via the mapped positions) and through the candidate containment
/// factors; cosines and reference containment are constants.
LossEval edge_loss_grad(const OrientedBox& gt, const OrientedBox& pb, const EdgeField& edge,
                        const LossConfig& cfg = {});

}  // namespace edgefit
