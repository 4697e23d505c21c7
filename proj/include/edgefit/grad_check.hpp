#pragma once

#include "edgefit/edge_loss.hpp"
#include "edgefit/edges.hpp"
#include "edgefit/geometry.hpp"

#include <array>

namespace edgefit {

/// Finite-difference validation of the analytic loss gradient over random
/// rendered scenes and candidate perturbations.
struct GradCheckConfig {
    int trials = 100;
    unsigned seed = 1;
    /// Central-difference steps per parameter (cx, cy, w, h in px; theta
    /// in radians).
    std::array<double, 5> fd_steps{1e-4, 1e-4, 1e-4, 1e-4, 1e-5};
    /// Parameters whose numeric gradient magnitude falls below this are
    /// skipped (finite differences carry no signal there).
    double numeric_floor = 1e-8;
    /// Loss variant under test. Truncation is disabled and sigma resolved
    /// once per trial before differencing, so the compared function is
    /// smooth and identical on both sides.
    LossConfig loss;
};

struct GradCheckReport {
    std::array<double, 5> max_rel_err{};
    std::array<double, 5> mean_rel_err{};
    std::array<int, 5> samples{};  // non-skipped comparisons per parameter
    int trials = 0;

    double max_overall() const;
};

/// Relative errors between the analytic gradient and central finite
/// differences for one configuration; entries are -1 where the comparison
/// was skipped (numeric magnitude below the floor).
std::array<double, 5> relative_grad_errors(const OrientedBox& gt, const OrientedBox& pb,
                                           const EdgeField& edge, const LossConfig& cfg,
                                           const std::array<double, 5>& fd_steps,
                                           double numeric_floor);

GradCheckReport grad_check(const GradCheckConfig& cfg = {});

}  // namespace edgefit
