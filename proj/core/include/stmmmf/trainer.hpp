#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stmmmf/eval.hpp"
#include "stmmmf/model.hpp"
#include "stmmmf/sparse_matrix.hpp"

namespace stmmmf {

struct Gradients {
    Matrix user_factors;  // dJ/dU
    Matrix item_factors;  // dJ/dV
    Matrix thresholds;    // dJ/dTheta

    bool all_finite() const noexcept;
};

struct TrainTrace {
    std::vector<double> objective;  // J before the first step, then after each accepted step
    std::size_t iterations = 0;     // accepted steps
    std::size_t rejected_steps = 0;
    bool converged = false;
    std::size_t threshold_violations = 0;  // users with unsorted thresholds at the end
    double final_learning_rate = 0.0;
};

struct TrainResult {
    FactorModel model;
    TrainTrace trace;
};

/// How the per-user accumulation is split across threads.
struct Reduction {
    std::size_t threads = 1;
    bool deterministic = true;

    std::size_t workers() const noexcept { return deterministic || threads == 0 ? 1 : threads; }
};

/// All-threshold smooth-hinge loss plus (lambda/2)(|U|_F^2 + |V|_F^2).
double objective(const FactorModel& model, const SparseRatingMatrix& y, double lambda);

Gradients compute_gradients(const FactorModel& model, const SparseRatingMatrix& y, double lambda);

/// One pass over Omega producing J and, when `grads` is non-null, its gradient.
double objective_and_gradients(const FactorModel& model, const SparseRatingMatrix& y,
                               double lambda, Gradients* grads, Reduction reduction = {});

/// U, V and Theta each move by -c times their gradient. Throws divergence_error
/// when a gradient entry is not finite.
FactorModel gd_step(const FactorModel& model, const Gradients& grads, double learning_rate);

/// Seeded starting point: factors uniform(-0.5, 0.5)/sqrt(d), theta_{i,r} = r - R/2.
FactorModel initial_model(const SparseRatingMatrix& y, std::size_t dim, std::uint64_t seed);

/// Full-batch gradient descent with step halving on objective increase; the step is
/// doubled back toward its initial value every 10 accepted steps.
TrainResult train(const SparseRatingMatrix& y, const Hyperparams& params, std::size_t dim);

/// Dense N x M grid of ratings.
struct RatingGrid {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::vector<std::uint8_t> values;

    int at(std::size_t user, std::size_t item) const noexcept {
        return values[user * n_items + item];
    }
};

/// Observed cells keep y_ij; every other cell gets the discretized score.
RatingGrid complete_matrix(const FactorModel& model, const SparseRatingMatrix& y);

/// Discretized score for every cell, ignoring any observations.
RatingGrid predict_all(const FactorModel& model);

/// Rating used for users without training data.
constexpr int cold_start_rating(int max_rating) noexcept { return (max_rating + 1) / 2; }

/// (truth, prediction) for every entry of `target`. Users with no entries in `train`
/// receive cold_start_rating; everyone else the discretized score.
std::vector<PredictionPair> predict_pairs(const FactorModel& model,
                                          const SparseRatingMatrix& train,
                                          const SparseRatingMatrix& target);

/// (truth, prediction) for every entry of `target`, discretizing everywhere.
std::vector<PredictionPair> predict_pairs(const FactorModel& model,
                                          const SparseRatingMatrix& target);

}  // namespace stmmmf
