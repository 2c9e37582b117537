#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stmmmf/eval.hpp"
#include "stmmmf/matrix.hpp"
#include "stmmmf/sparse_matrix.hpp"

namespace stmmmf {

/// Squared-loss biased matrix factorization fitted by stochastic passes:
/// y ~ mu + b_u + b_i + P_u . Q_i
struct BaselineModel {
    Matrix user_factors;  // P, N x k
    Matrix item_factors;  // Q, M x k
    std::vector<double> user_bias;
    std::vector<double> item_bias;
    double global_mean = 0.0;
    int max_rating = 5;
    std::vector<bool> user_known;  // had at least one training rating
    std::vector<bool> item_known;
};

struct BaselineConfig {
    std::size_t dim = 20;
    double lambda = 0.05;
    std::size_t epochs = 30;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
};

struct BaselineFit {
    BaselineModel model;
    std::vector<double> epoch_loss;  // regularized loss, entry 0 before any pass
};

/// Epochs visit the entries in a seeded random order. An epoch that raises the
/// loss is rolled back and the step halved, so epoch_loss never increases.
BaselineFit train_baseline(const SparseRatingMatrix& y, const BaselineConfig& cfg);

/// mu + b_u + b_i + P_u . Q_i clamped to [1, R]; terms of cold users or items are dropped.
double predict_baseline(const BaselineModel& model, std::size_t user, std::size_t item);

std::vector<PredictionPair> baseline_pairs(const BaselineModel& model,
                                           const SparseRatingMatrix& target);

/// `y` without any cell that `mask` observes. Self-training may impute cells that
/// are held out for testing; those are stripped before a baseline sees the matrix.
SparseRatingMatrix without_cells(const SparseRatingMatrix& y, const SparseRatingMatrix& mask);

/// Retrains from scratch on each matrix and scores the fixed test set.
std::vector<MetricsSnapshot> rounds_experiment(std::span<const SparseRatingMatrix> matrices,
                                               const SparseRatingMatrix& test,
                                               const BaselineConfig& cfg);

}  // namespace stmmmf
