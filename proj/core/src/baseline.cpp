#include "stmmmf/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stmmmf/errors.hpp"

namespace stmmmf {

namespace {

double raw_score(const BaselineModel& m, std::size_t u, std::size_t i) {
    double s = m.global_mean;
    if (m.user_known[u]) s += m.user_bias[u];
    if (m.item_known[i]) s += m.item_bias[i];
    if (m.user_known[u] && m.item_known[i]) {
        s += dot(m.user_factors.row(u), m.item_factors.row(i));
    }
    return s;
}

double regularized_loss(const BaselineModel& m, const SparseRatingMatrix& y, double lambda) {
    double loss = 0.0;
    for (const Rating& e : y.entries()) {
        const double err = static_cast<double>(e.value) - raw_score(m, e.user, e.item);
        loss += err * err;
    }
    double norms = m.user_factors.squared_norm() + m.item_factors.squared_norm();
    for (double b : m.user_bias) norms += b * b;
    for (double b : m.item_bias) norms += b * b;
    return loss + lambda * norms;
}

}  // namespace

BaselineFit train_baseline(const SparseRatingMatrix& y, const BaselineConfig& cfg) {
    if (y.empty()) throw contract_error("cannot train the baseline on an empty matrix");
    if (cfg.dim == 0) throw contract_error("baseline dimension must be >= 1");

    BaselineModel m;
    m.max_rating = y.max_rating();
    m.user_factors = Matrix(y.n_users(), cfg.dim);
    m.item_factors = Matrix(y.n_items(), cfg.dim);  // zero, so epoch 0 predicts the mean
    m.user_bias.assign(y.n_users(), 0.0);
    m.item_bias.assign(y.n_items(), 0.0);
    m.user_known.assign(y.n_users(), false);
    m.item_known.assign(y.n_items(), false);

    double sum = 0.0;
    for (const Rating& e : y.entries()) {
        sum += e.value;
        m.user_known[e.user] = true;
        m.item_known[e.item] = true;
    }
    m.global_mean = sum / static_cast<double>(y.size());

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> init(0.0, 0.1);
    for (double& v : m.user_factors.values()) v = init(rng);

    BaselineFit fit{m, {}};
    double current = regularized_loss(fit.model, y, cfg.lambda);
    fit.epoch_loss.push_back(current);

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double lr = cfg.learning_rate;
    const auto entries = y.entries();
    const std::size_t k = cfg.dim;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        BaselineModel next = fit.model;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const Rating& e = entries[idx];
            auto p = next.user_factors.row(e.user);
            auto q = next.item_factors.row(e.item);
            const double err = static_cast<double>(e.value) - raw_score(next, e.user, e.item);
            double& bu = next.user_bias[e.user];
            double& bi = next.item_bias[e.item];
            bu += lr * (err - cfg.lambda * bu);
            bi += lr * (err - cfg.lambda * bi);
            for (std::size_t f = 0; f < k; ++f) {
                const double pf = p[f];
                p[f] += lr * (err * q[f] - cfg.lambda * pf);
                q[f] += lr * (err * pf - cfg.lambda * q[f]);
            }
        }
        const double loss = regularized_loss(next, y, cfg.lambda);
        if (!std::isfinite(loss)) {
            if (lr < cfg.learning_rate * 1e-6) throw divergence_error("baseline loss is not finite");
            lr *= 0.5;
            fit.epoch_loss.push_back(current);
            continue;
        }
        if (loss > current) {
            lr *= 0.5;
            fit.epoch_loss.push_back(current);
            continue;
        }
        fit.model = std::move(next);
        current = loss;
        fit.epoch_loss.push_back(current);
    }
    return fit;
}

double predict_baseline(const BaselineModel& model, std::size_t user, std::size_t item) {
    if (user >= model.user_bias.size() || item >= model.item_bias.size()) {
        throw contract_error("baseline index out of range");
    }
    return std::clamp(raw_score(model, user, item), 1.0, static_cast<double>(model.max_rating));
}

std::vector<PredictionPair> baseline_pairs(const BaselineModel& model,
                                           const SparseRatingMatrix& target) {
    std::vector<PredictionPair> pairs;
    pairs.reserve(target.size());
    for (const Rating& e : target.entries()) {
        pairs.push_back({static_cast<double>(e.value), predict_baseline(model, e.user, e.item)});
    }
    return pairs;
}

SparseRatingMatrix without_cells(const SparseRatingMatrix& y, const SparseRatingMatrix& mask) {
    if (!y.same_shape(mask)) throw shape_error("matrix and mask differ in shape");
    std::vector<Rating> kept;
    kept.reserve(y.size());
    for (const Rating& e : y.entries()) {
        if (!mask.contains(e.user, e.item)) kept.push_back(e);
    }
    return SparseRatingMatrix(y.n_users(), y.n_items(), y.max_rating(), std::move(kept));
}

std::vector<MetricsSnapshot> rounds_experiment(std::span<const SparseRatingMatrix> matrices,
                                               const SparseRatingMatrix& test,
                                               const BaselineConfig& cfg) {
    std::vector<MetricsSnapshot> out;
    out.reserve(matrices.size());
    for (const auto& y : matrices) {
        if (!y.same_shape(test)) throw shape_error("round matrix and test set differ in shape");
        for (const Rating& e : test.entries()) {
            if (y.contains(e.user, e.item)) {
                throw contract_error("round matrix overlaps the test set");
            }
        }
        auto fit = train_baseline(y, cfg);
        out.push_back(metrics(baseline_pairs(fit.model, test)));
    }
    return out;
}

}  // namespace stmmmf
