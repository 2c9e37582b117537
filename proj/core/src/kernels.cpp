#include "stmmmf/kernels.hpp"

#include <cmath>
#include <string>

#include "stmmmf/errors.hpp"

namespace stmmmf {

bool FactorModel::all_finite() const noexcept {
    auto finite = [](const Matrix& m) {
        for (double v : m.values()) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    };
    return finite(user_factors) && finite(item_factors) && finite(thresholds);
}

void Hyperparams::validate() const {
    if (!(lambda > 0.0)) throw contract_error("lambda must be > 0");
    if (!(learning_rate > 0.0)) throw contract_error("learning rate must be > 0");
    if (!(tol >= 0.0)) throw contract_error("tolerance must be >= 0");
}

int t_indicator(int r, int y, int max_rating) {
    if (r < 1 || r > max_rating - 1) {
        throw contract_error("threshold level " + std::to_string(r) + " outside 1.." +
                             std::to_string(max_rating - 1));
    }
    if (y < 1 || y > max_rating) {
        throw contract_error("rating " + std::to_string(y) + " outside 1.." +
                             std::to_string(max_rating));
    }
    return t_sign(r, y);
}

double predict_score(const FactorModel& model, std::size_t user, std::size_t item) {
    if (user >= model.n_users() || item >= model.n_items()) {
        throw contract_error("score index (" + std::to_string(user) + ", " +
                             std::to_string(item) + ") out of range");
    }
    return dot(model.user_factors.row(user), model.item_factors.row(item));
}

int discretize(std::span<const double> thresholds, double x) noexcept {
    for (std::size_t r = 0; r < thresholds.size(); ++r) {
        if (x <= thresholds[r]) return static_cast<int>(r) + 1;
    }
    return static_cast<int>(thresholds.size()) + 1;
}

int discretize(const FactorModel& model, std::size_t user, double x) {
    if (user >= model.n_users()) throw contract_error("user index out of range");
    return discretize(model.user_thresholds(user), x);
}

double raw_threshold_gap(std::span<const double> thresholds) {
    if (thresholds.size() < 2) {
        throw unsupported_scale_error("average threshold gap needs R >= 3");
    }
    double sum = 0.0;
    for (std::size_t r = 1; r < thresholds.size(); ++r) sum += thresholds[r] - thresholds[r - 1];
    return sum / static_cast<double>(thresholds.size() - 1);
}

double avg_threshold_gap(const FactorModel& model, std::size_t user) {
    if (user >= model.n_users()) throw contract_error("user index out of range");
    double gap = raw_threshold_gap(model.user_thresholds(user));
    return gap < kMinThresholdGap ? kMinThresholdGap : gap;
}

std::size_t count_gap_clamps(const FactorModel& model) {
    std::size_t clamps = 0;
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        if (raw_threshold_gap(model.user_thresholds(i)) < kMinThresholdGap) ++clamps;
    }
    return clamps;
}

std::size_t count_unsorted_thresholds(const FactorModel& model) {
    std::size_t users = 0;
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        auto th = model.user_thresholds(i);
        for (std::size_t r = 1; r < th.size(); ++r) {
            if (th[r] < th[r - 1]) {
                ++users;
                break;
            }
        }
    }
    return users;
}

}  // namespace stmmmf
