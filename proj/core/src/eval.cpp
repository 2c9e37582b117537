#include "stmmmf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "stmmmf/errors.hpp"

namespace stmmmf {

double mae(std::span<const PredictionPair> pairs) {
    if (pairs.empty()) throw contract_error("MAE of an empty prediction set");
    double s = 0.0;
    for (const auto& p : pairs) s += std::abs(p.actual - p.predicted);
    return s / static_cast<double>(pairs.size());
}

double rmse(std::span<const PredictionPair> pairs) {
    if (pairs.empty()) throw contract_error("RMSE of an empty prediction set");
    double s = 0.0;
    for (const auto& p : pairs) s += (p.actual - p.predicted) * (p.actual - p.predicted);
    return std::sqrt(s / static_cast<double>(pairs.size()));
}

MetricsSnapshot metrics(std::span<const PredictionPair> pairs) {
    return {mae(pairs), rmse(pairs), pairs.size()};
}

ConfusionMatrix::ConfusionMatrix(int max_rating)
    : max_rating_(max_rating),
      counts_(static_cast<std::size_t>(max_rating) * static_cast<std::size_t>(max_rating), 0) {
    if (max_rating < 2) throw contract_error("confusion matrix needs R >= 2");
}

std::size_t ConfusionMatrix::offset(int actual, int predicted) const {
    if (actual < 1 || actual > max_rating_ || predicted < 1 || predicted > max_rating_) {
        throw contract_error("rating pair (" + std::to_string(actual) + ", " +
                             std::to_string(predicted) + ") outside 1.." +
                             std::to_string(max_rating_));
    }
    return static_cast<std::size_t>(actual - 1) * static_cast<std::size_t>(max_rating_) +
           static_cast<std::size_t>(predicted - 1);
}

std::size_t ConfusionMatrix::count(int actual, int predicted) const {
    return counts_[offset(actual, predicted)];
}

std::size_t ConfusionMatrix::row_total(int actual) const {
    std::size_t begin = offset(actual, 1);
    return std::accumulate(counts_.begin() + static_cast<std::ptrdiff_t>(begin),
                           counts_.begin() + static_cast<std::ptrdiff_t>(begin) + max_rating_,
                           std::size_t{0});
}

std::size_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

void ConfusionMatrix::add(int actual, int predicted) { ++counts_[offset(actual, predicted)]; }

void ConfusionMatrix::set_row(int actual, std::span<const std::size_t> counts) {
    if (counts.size() != static_cast<std::size_t>(max_rating_)) {
        throw shape_error("confusion row needs " + std::to_string(max_rating_) + " counts");
    }
    std::copy(counts.begin(), counts.end(),
              counts_.begin() + static_cast<std::ptrdiff_t>(offset(actual, 1)));
}

ConfusionMatrix confusion(std::span<const PredictionPair> pairs, int max_rating) {
    ConfusionMatrix cm(max_rating);
    for (const auto& p : pairs) {
        if (p.actual != std::round(p.actual) || p.predicted != std::round(p.predicted)) {
            throw contract_error("confusion matrix needs integral ratings");
        }
        cm.add(static_cast<int>(p.actual), static_cast<int>(p.predicted));
    }
    return cm;
}

std::optional<double> hr_at_k(const ConfusionMatrix& cm, int actual, int k) {
    const int r = cm.max_rating();
    if (actual < 1 || actual > r || k < 0) return std::nullopt;
    const bool below = actual - k >= 1;
    const bool above = k > 0 && actual + k <= r;
    if (!below && !above) return std::nullopt;
    const std::size_t total = cm.row_total(actual);
    if (total == 0) return std::nullopt;
    std::size_t hits = 0;
    if (below) hits += cm.count(actual, actual - k);
    if (above) hits += cm.count(actual, actual + k);
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::pair<SparseRatingMatrix, SparseRatingMatrix> split(const SparseRatingMatrix& y,
                                                        double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) {
        throw contract_error("train fraction must lie strictly between 0 and 1");
    }
    auto entries = y.entries();
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto n_train =
        static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(entries.size())));
    std::vector<Rating> train;
    std::vector<Rating> test;
    train.reserve(n_train);
    test.reserve(entries.size() - n_train);
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < n_train ? train : test).push_back(entries[order[k]]);
    }
    return {SparseRatingMatrix(y.n_users(), y.n_items(), y.max_rating(), std::move(train)),
            SparseRatingMatrix(y.n_users(), y.n_items(), y.max_rating(), std::move(test))};
}

}  // namespace stmmmf
