#pragma once

#include <cstddef>
#include <span>

#include "stmmmf/model.hpp"

namespace stmmmf {

/// Lower clamp applied to the per-user average threshold gap.
inline constexpr double kMinThresholdGap = 1e-6;

/// Smooth hinge: 0 for z >= 1, (1-z)^2/2 on (0,1), 1/2 - z otherwise.
constexpr double smooth_hinge(double z) noexcept {
    if (z >= 1.0) return 0.0;
    if (z > 0.0) return 0.5 * (1.0 - z) * (1.0 - z);
    return 0.5 - z;
}

/// Derivative of smooth_hinge; always in [-1, 0].
constexpr double smooth_hinge_grad(double z) noexcept {
    if (z >= 1.0) return 0.0;
    if (z > 0.0) return z - 1.0;
    return -1.0;
}

/// T^r_{ij}: +1 when threshold level r is at or above the observed rating, -1 below.
/// Requires 1 <= r <= R-1 and 1 <= y <= R (throws contract_error otherwise).
int t_indicator(int r, int y, int max_rating);

/// Unchecked variant used in the inner loops.
constexpr int t_sign(int r, int y) noexcept { return r >= y ? 1 : -1; }

/// x_ij = U_i . V_j
double predict_score(const FactorModel& model, std::size_t user, std::size_t item);

/// Rating r in 1..R with theta_{r-1} < x <= theta_r. For unsorted thresholds the
/// first containing interval wins, which is the first r with x <= theta_r.
int discretize(std::span<const double> thresholds, double x) noexcept;
int discretize(const FactorModel& model, std::size_t user, double x);

/// Mean consecutive difference of a threshold row, without clamping.
/// Throws unsupported_scale_error when the row has fewer than two thresholds (R < 3).
double raw_threshold_gap(std::span<const double> thresholds);

/// Average gap between consecutive thresholds of `user`, clamped below at
/// kMinThresholdGap.
double avg_threshold_gap(const FactorModel& model, std::size_t user);

/// Number of users whose raw average gap falls below kMinThresholdGap.
std::size_t count_gap_clamps(const FactorModel& model);

/// Number of users whose stored thresholds are not non-decreasing.
std::size_t count_unsorted_thresholds(const FactorModel& model);

}  // namespace stmmmf
