#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stmmmf/sparse_matrix.hpp"

namespace stmmmf {

struct PredictionPair {
    double actual = 0.0;
    double predicted = 0.0;
};

struct MetricsSnapshot {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

/// Throws contract_error on empty input.
double mae(std::span<const PredictionPair> pairs);
double rmse(std::span<const PredictionPair> pairs);
MetricsSnapshot metrics(std::span<const PredictionPair> pairs);

/// R x R counts indexed (actual, predicted), both 1-based.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int max_rating);

    int max_rating() const noexcept { return max_rating_; }
    std::size_t count(int actual, int predicted) const;
    std::size_t row_total(int actual) const;
    std::size_t total() const noexcept;

    void add(int actual, int predicted);
    /// Overwrite one row, e.g. to replay published tables.
    void set_row(int actual, std::span<const std::size_t> counts);

private:
    std::size_t offset(int actual, int predicted) const;

    int max_rating_;
    std::vector<std::size_t> counts_;
};

/// Pairs must carry integral ratings in 1..R (contract_error otherwise).
ConfusionMatrix confusion(std::span<const PredictionPair> pairs, int max_rating);

/// Fraction of row `actual` predicted exactly `k` levels away (either side).
/// nullopt when no in-scale rating lies at that distance or the row is empty.
std::optional<double> hr_at_k(const ConfusionMatrix& cm, int actual, int k);

/// Uniform random partition of the observed entries; the first part holds
/// round(train_frac * |Omega|) of them. Requires 0 < train_frac < 1.
std::pair<SparseRatingMatrix, SparseRatingMatrix> split(const SparseRatingMatrix& y,
                                                        double train_frac, std::uint64_t seed);

}  // namespace stmmmf
