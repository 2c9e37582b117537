#include "stmmmf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "stmmmf/errors.hpp"
#include "stmmmf/kernels.hpp"

namespace stmmmf {

namespace {

void check_shapes(const FactorModel& model, const SparseRatingMatrix& y) {
    if (!model.matches(y)) {
        throw shape_error("model is " + std::to_string(model.n_users()) + "x" +
                          std::to_string(model.n_items()) + " (R=" +
                          std::to_string(model.max_rating) + "), matrix is " +
                          std::to_string(y.n_users()) + "x" + std::to_string(y.n_items()) +
                          " (R=" + std::to_string(y.max_rating()) + ")");
    }
    if (model.item_factors.cols() != model.dim() ||
        model.thresholds.cols() != static_cast<std::size_t>(model.max_rating - 1) ||
        model.thresholds.rows() != model.n_users()) {
        throw shape_error("factor model blocks have inconsistent shapes");
    }
}

// Loss and gradient contributions of users [begin, end). U and Theta gradient rows
// are owned by the block; item gradients go to `item_grad`.
double accumulate_block(const FactorModel& model, const SparseRatingMatrix& y, std::size_t begin,
                        std::size_t end, Gradients* grads, Matrix* item_grad) {
    const int levels = model.max_rating - 1;
    const std::size_t d = model.dim();
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        auto u = model.user_factors.row(i);
        auto theta = model.thresholds.row(i);
        for (const Rating& e : y.row(static_cast<Index>(i))) {
            auto v = model.item_factors.row(e.item);
            const double x = dot(u, v);
            double dx = 0.0;  // dJ/dx_ij
            for (int r = 1; r <= levels; ++r) {
                const double t = t_sign(r, e.value);
                const double z = t * (theta[static_cast<std::size_t>(r - 1)] - x);
                loss += smooth_hinge(z);
                if (grads != nullptr) {
                    const double g = t * smooth_hinge_grad(z);
                    grads->thresholds(i, static_cast<std::size_t>(r - 1)) += g;
                    dx -= g;
                }
            }
            if (grads != nullptr && dx != 0.0) {
                auto gu = grads->user_factors.row(i);
                auto gv = item_grad->row(e.item);
                for (std::size_t p = 0; p < d; ++p) {
                    gu[p] += dx * v[p];
                    gv[p] += dx * u[p];
                }
            }
        }
    }
    return loss;
}

}  // namespace

bool Gradients::all_finite() const noexcept {
    for (const Matrix* m : {&user_factors, &item_factors, &thresholds}) {
        for (double v : m->values()) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

double objective_and_gradients(const FactorModel& model, const SparseRatingMatrix& y,
                               double lambda, Gradients* grads, Reduction reduction) {
    check_shapes(model, y);
    const std::size_t n = model.n_users();
    if (grads != nullptr) {
        grads->user_factors = model.user_factors;
        grads->item_factors = model.item_factors;
        for (double& v : grads->user_factors.values()) v *= lambda;
        for (double& v : grads->item_factors.values()) v *= lambda;
        grads->thresholds = Matrix(model.thresholds.rows(), model.thresholds.cols());
    }

    const std::size_t workers = std::min(reduction.workers(), std::max<std::size_t>(n, 1));
    double loss = 0.0;
    if (workers <= 1) {
        loss = accumulate_block(model, y, 0, n, grads,
                                grads != nullptr ? &grads->item_factors : nullptr);
    } else {
        // Balance blocks by entry count; partial sums are reduced in block order.
        std::vector<std::size_t> bounds{0};
        const std::size_t per_block = (y.size() + workers - 1) / workers;
        std::size_t seen = 0;
        for (std::size_t i = 0; i < n && bounds.size() < workers; ++i) {
            seen += y.row(static_cast<Index>(i)).size();
            if (seen >= per_block * bounds.size()) bounds.push_back(i + 1);
        }
        bounds.push_back(n);
        const std::size_t blocks = bounds.size() - 1;
        std::vector<double> partial(blocks, 0.0);
        std::vector<Matrix> item_partial(
            grads != nullptr ? blocks : 0, Matrix(model.n_items(), model.dim()));
        std::vector<std::thread> pool;
        pool.reserve(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            pool.emplace_back([&, b] {
                partial[b] = accumulate_block(model, y, bounds[b], bounds[b + 1], grads,
                                              grads != nullptr ? &item_partial[b] : nullptr);
            });
        }
        for (auto& t : pool) t.join();
        for (std::size_t b = 0; b < blocks; ++b) {
            loss += partial[b];
            if (grads != nullptr) {
                auto dst = grads->item_factors.values();
                auto src = item_partial[b].values();
                for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
            }
        }
    }
    return loss + 0.5 * lambda *
                      (model.user_factors.squared_norm() + model.item_factors.squared_norm());
}

double objective(const FactorModel& model, const SparseRatingMatrix& y, double lambda) {
    return objective_and_gradients(model, y, lambda, nullptr);
}

Gradients compute_gradients(const FactorModel& model, const SparseRatingMatrix& y,
                            double lambda) {
    Gradients g;
    objective_and_gradients(model, y, lambda, &g);
    return g;
}

FactorModel gd_step(const FactorModel& model, const Gradients& grads, double learning_rate) {
    if (!model.user_factors.same_shape(grads.user_factors) ||
        !model.item_factors.same_shape(grads.item_factors) ||
        !model.thresholds.same_shape(grads.thresholds)) {
        throw shape_error("gradient shapes do not match the model");
    }
    if (!grads.all_finite()) throw divergence_error("non-finite gradient entry");
    FactorModel next = model;
    auto apply = [learning_rate](Matrix& m, const Matrix& g) {
        auto dst = m.values();
        auto src = g.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= learning_rate * src[k];
    };
    apply(next.user_factors, grads.user_factors);
    apply(next.item_factors, grads.item_factors);
    apply(next.thresholds, grads.thresholds);
    return next;
}

FactorModel initial_model(const SparseRatingMatrix& y, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw contract_error("latent dimension must be >= 1");
    FactorModel model(y.n_users(), y.n_items(), dim, y.max_rating());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (double& v : model.user_factors.values()) v = unit(rng) * scale;
    for (double& v : model.item_factors.values()) v = unit(rng) * scale;
    const double centre = 0.5 * static_cast<double>(y.max_rating());
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        auto th = model.thresholds.row(i);
        for (std::size_t r = 0; r < th.size(); ++r) th[r] = static_cast<double>(r + 1) - centre;
    }
    return model;
}

TrainResult train(const SparseRatingMatrix& y, const Hyperparams& params, std::size_t dim) {
    params.validate();
    if (y.empty()) throw contract_error("cannot train on an empty rating matrix");

    const Reduction reduction{params.threads, params.deterministic};
    TrainResult result{initial_model(y, dim, params.seed), {}};
    TrainTrace& trace = result.trace;

    Gradients grads;
    double current = objective_and_gradients(result.model, y, params.lambda, &grads, reduction);
    if (!std::isfinite(current)) throw divergence_error("initial objective is not finite");
    trace.objective.push_back(current);

    const double initial_rate = params.learning_rate;
    const double min_rate = initial_rate * 1e-12;
    double rate = initial_rate;
    std::size_t since_restore = 0;
    Gradients next_grads;

    while (trace.iterations < params.max_iters) {
        FactorModel candidate = gd_step(result.model, grads, rate);
        const double next =
            objective_and_gradients(candidate, y, params.lambda, &next_grads, reduction);
        if (!std::isfinite(next) || next > current) {
            ++trace.rejected_steps;
            rate *= 0.5;
            if (rate < min_rate) {
                // No descent direction left at representable step sizes.
                trace.converged = true;
                break;
            }
            continue;
        }
        const double decrease = (current - next) / std::max(current, 1.0);
        result.model = std::move(candidate);
        std::swap(grads, next_grads);
        current = next;
        trace.objective.push_back(current);
        ++trace.iterations;
        if (decrease < params.tol) {
            trace.converged = true;
            break;
        }
        if (++since_restore == 10) {
            rate = std::min(2.0 * rate, initial_rate);
            since_restore = 0;
        }
    }
    trace.final_learning_rate = rate;
    trace.threshold_violations = count_unsorted_thresholds(result.model);
    return result;
}

RatingGrid predict_all(const FactorModel& model) {
    RatingGrid grid{model.n_users(), model.n_items(),
                    std::vector<std::uint8_t>(model.n_users() * model.n_items())};
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        auto u = model.user_factors.row(i);
        auto th = model.user_thresholds(i);
        for (std::size_t j = 0; j < model.n_items(); ++j) {
            grid.values[i * model.n_items() + j] =
                static_cast<std::uint8_t>(discretize(th, dot(u, model.item_factors.row(j))));
        }
    }
    return grid;
}

RatingGrid complete_matrix(const FactorModel& model, const SparseRatingMatrix& y) {
    check_shapes(model, y);
    RatingGrid grid = predict_all(model);
    for (const Rating& e : y.entries()) {
        grid.values[e.user * grid.n_items + e.item] = static_cast<std::uint8_t>(e.value);
    }
    return grid;
}

std::vector<PredictionPair> predict_pairs(const FactorModel& model,
                                          const SparseRatingMatrix& train,
                                          const SparseRatingMatrix& target) {
    check_shapes(model, train);
    check_shapes(model, target);
    std::vector<PredictionPair> pairs;
    pairs.reserve(target.size());
    const int cold = cold_start_rating(model.max_rating);
    for (const Rating& e : target.entries()) {
        const int predicted = train.row(e.user).empty()
                                  ? cold
                                  : discretize(model.user_thresholds(e.user),
                                               predict_score(model, e.user, e.item));
        pairs.push_back({static_cast<double>(e.value), static_cast<double>(predicted)});
    }
    return pairs;
}

std::vector<PredictionPair> predict_pairs(const FactorModel& model,
                                          const SparseRatingMatrix& target) {
    check_shapes(model, target);
    std::vector<PredictionPair> pairs;
    pairs.reserve(target.size());
    for (const Rating& e : target.entries()) {
        pairs.push_back({static_cast<double>(e.value),
                         static_cast<double>(discretize(model.user_thresholds(e.user),
                                                        predict_score(model, e.user, e.item)))});
    }
    return pairs;
}

}  // namespace stmmmf
