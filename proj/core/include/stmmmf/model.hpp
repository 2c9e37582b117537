#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "stmmmf/matrix.hpp"
#include "stmmmf/sparse_matrix.hpp"

namespace stmmmf {

/// Latent factors and per-user ordinal thresholds of an MMMF model.
///
/// `thresholds` is N x (R-1); column r-1 holds theta_{i,r}. The sentinels
/// theta_{i,0} = -inf and theta_{i,R} = +inf are implied by threshold().
struct FactorModel {
    Matrix user_factors;  // N x d
    Matrix item_factors;  // M x d
    Matrix thresholds;    // N x (R-1)
    int max_rating = 2;

    FactorModel() = default;
    FactorModel(std::size_t n_users, std::size_t n_items, std::size_t dim, int max_rating)
        : user_factors(n_users, dim),
          item_factors(n_items, dim),
          thresholds(n_users, static_cast<std::size_t>(max_rating - 1)),
          max_rating(max_rating) {}

    std::size_t n_users() const noexcept { return user_factors.rows(); }
    std::size_t n_items() const noexcept { return item_factors.rows(); }
    std::size_t dim() const noexcept { return user_factors.cols(); }

    /// theta_{i,r} for r in 0..R, with infinite sentinels at both ends.
    double threshold(std::size_t user, int r) const noexcept {
        if (r <= 0) return -std::numeric_limits<double>::infinity();
        if (r >= max_rating) return std::numeric_limits<double>::infinity();
        return thresholds(user, static_cast<std::size_t>(r - 1));
    }

    std::span<const double> user_thresholds(std::size_t user) const noexcept {
        return thresholds.row(user);
    }

    bool matches(const SparseRatingMatrix& y) const noexcept {
        return n_users() == y.n_users() && n_items() == y.n_items() &&
               max_rating == y.max_rating();
    }

    bool all_finite() const noexcept;

    friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

/// Inner MMMF solver settings.
struct Hyperparams {
    double lambda = 11.547819846894582;  // 10^(17/16), regularization weight > 0
    double learning_rate = 0.003;        // initial step size c, > 0
    std::size_t max_iters = 300;         // t1, accepted descent steps
    double tol = 1e-6;                   // relative objective decrease that counts as converged
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    // Forces the fixed-order sequential reduction regardless of `threads`.
    bool deterministic = true;

    /// Throws contract_error when an invariant does not hold.
    void validate() const;
};

}  // namespace stmmmf
