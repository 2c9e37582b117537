#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stmmmf/eval.hpp"
#include "stmmmf/model.hpp"
#include "stmmmf/sparse_matrix.hpp"

namespace stmmmf {

/// Settings of the self-training loop. Band fractions are in units of the
/// per-user average threshold gap (0.4999, not 49.99).
struct SelfTrainConfig {
    Hyperparams inner;
    std::size_t dim = 10;
    double tau1 = 0.4999;        // augmentation band shift, 0 < tau2 < tau1 < 0.5
    double tau2 = 0.10;          // refinement band half-width
    double sample_pct = 100.0;   // s in (0, 100]
    std::size_t cap = 5000;      // augmentations per iteration
    std::size_t max_iters = 50;  // t2
    // Stop after this many consecutive iterations of rising test MAE; 0 disables.
    std::size_t patience = 5;

    void validate() const;
};

struct Candidate {
    Index user = 0;
    Index item = 0;
    int rating = 0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
    friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

/// High-confidence predictions for unobserved cells, sorted by (user, item).
using CandidateSet = std::vector<Candidate>;

/// Every unobserved (i, j) whose score lies strictly inside
/// (theta_{i,r-1} + gap_i * tau1, theta_{i,r} - gap_i * tau1) for some r.
/// The first such r is taken; with sorted thresholds it is unique.
CandidateSet high_confidence_candidates(const FactorModel& model, const SparseRatingMatrix& y,
                                        double tau1);

/// Every observed (i, j) whose score lies strictly within gap_i * tau2 of any
/// stored threshold of user i. Sorted by (user, item).
std::vector<Cell> low_confidence_observed(const FactorModel& model, const SparseRatingMatrix& y,
                                          double tau2);

/// Splits `total` across labels in proportion to (1 - share); largest remainders
/// (ties to the lower label) absorb the rounding so the result sums to `total`.
std::vector<std::size_t> skew_allocation(std::span<const double> shares, std::size_t total);

/// Draws min(cap, floor(|cands| * s / 100)) candidates. Per-label quotas come from
/// skew_allocation over `shares`; labels that run short hand their deficit to the
/// others in proportion to remaining supply. Sampling within a label is uniform
/// without replacement. Result is sorted by (user, item).
CandidateSet sample_augment(const CandidateSet& cands, std::span<const double> shares,
                            double sample_pct, std::size_t cap, std::mt19937_64& rng);

/// Inserts the selected triples; throws contract_error if a cell is already observed.
SparseRatingMatrix apply_augment(const SparseRatingMatrix& y, const CandidateSet& selected);

/// Removes the given cells; throws contract_error if a cell is not observed.
SparseRatingMatrix apply_refine(const SparseRatingMatrix& y, std::span<const Cell> removals);

struct OverlapStats {
    std::size_t overlap = 0;
    double retained_fraction = 0.0;
};

/// Exact-triple intersection of two candidate sets; retained = overlap / |prev|.
OverlapStats overlap_stats(const CandidateSet& prev, const CandidateSet& cur);

struct IterationReport {
    std::size_t iteration = 0;  // 1-based
    std::size_t observed = 0;   // |Omega| the model was trained on
    std::size_t unobserved = 0;
    std::size_t candidates = 0;
    std::size_t augmented = 0;
    std::size_t refined = 0;
    std::size_t overlap = 0;
    double retained_fraction = 0.0;
    bool has_previous = false;
    std::size_t gap_clamps = 0;
    std::size_t threshold_violations = 0;
    std::size_t gd_iterations = 0;
    double objective = 0.0;
    MetricsSnapshot test;
};

/// Everything observable at the end of one iteration, before the matrix moves on.
struct IterationView {
    const SparseRatingMatrix& train;  // matrix the model was fitted to
    const FactorModel& model;
    const CandidateSet& candidates;
    const CandidateSet& augmented;
    const std::vector<Cell>& refined;
    const SparseRatingMatrix& next;  // matrix handed to the next iteration
    const IterationReport& report;
};

using IterationObserver = std::function<void(const IterationView&)>;

enum class StopReason { max_iterations, no_candidates, test_degradation, divergence };

std::string to_string(StopReason reason);

struct SelfTrainResult {
    FactorModel model;
    std::vector<IterationReport> reports;
    SparseRatingMatrix final_matrix;
    StopReason stop = StopReason::max_iterations;
    std::string error;  // set when stop == divergence
};

/// Train, collect candidates, collect low-confidence observations, sample
/// against the current label skew, refine, augment, report; repeat. `test` is
/// only used for the per-iteration metrics and the degradation stop.
SelfTrainResult selftrain_loop(const SparseRatingMatrix& initial, const SelfTrainConfig& cfg,
                               const SparseRatingMatrix& test,
                               const IterationObserver& observer = {});

}  // namespace stmmmf
