#include "stmmmf/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stmmmf/errors.hpp"
#include "stmmmf/kernels.hpp"
#include "stmmmf/trainer.hpp"

namespace stmmmf {

void SelfTrainConfig::validate() const {
    inner.validate();
    if (dim == 0) throw contract_error("latent dimension must be >= 1");
    if (!(tau2 > 0.0 && tau2 < tau1 && tau1 < 0.5)) {
        throw contract_error("band fractions must satisfy 0 < tau2 < tau1 < 0.5");
    }
    if (!(sample_pct > 0.0 && sample_pct <= 100.0)) {
        throw contract_error("sampling percentage must lie in (0, 100]");
    }
    if (cap == 0) throw contract_error("augmentation cap must be >= 1");
    if (max_iters == 0) throw contract_error("self-training needs at least one iteration");
}

CandidateSet high_confidence_candidates(const FactorModel& model, const SparseRatingMatrix& y,
                                        double tau1) {
    if (!model.matches(y)) throw shape_error("model and matrix shapes differ");
    const int levels = model.max_rating;
    std::vector<double> lo(static_cast<std::size_t>(levels));
    std::vector<double> hi(static_cast<std::size_t>(levels));
    CandidateSet out;
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        const double shift = avg_threshold_gap(model, i) * tau1;
        for (int r = 1; r <= levels; ++r) {
            // -inf + shift stays -inf, +inf - shift stays +inf.
            lo[static_cast<std::size_t>(r - 1)] = model.threshold(i, r - 1) + shift;
            hi[static_cast<std::size_t>(r - 1)] = model.threshold(i, r) - shift;
        }
        auto u = model.user_factors.row(i);
        auto observed = y.row(static_cast<Index>(i));
        auto next_obs = observed.begin();
        for (std::size_t j = 0; j < model.n_items(); ++j) {
            if (next_obs != observed.end() && next_obs->item == j) {
                ++next_obs;
                continue;
            }
            const double x = dot(u, model.item_factors.row(j));
            for (std::size_t r = 0; r < lo.size(); ++r) {
                if (lo[r] < x && x < hi[r]) {
                    out.push_back({static_cast<Index>(i), static_cast<Index>(j),
                                   static_cast<int>(r) + 1});
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<Cell> low_confidence_observed(const FactorModel& model, const SparseRatingMatrix& y,
                                          double tau2) {
    if (!model.matches(y)) throw shape_error("model and matrix shapes differ");
    std::vector<Cell> out;
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        auto entries = y.row(static_cast<Index>(i));
        if (entries.empty()) continue;
        const double half_width = avg_threshold_gap(model, i) * tau2;
        auto theta = model.user_thresholds(i);
        auto u = model.user_factors.row(i);
        for (const Rating& e : entries) {
            const double x = dot(u, model.item_factors.row(e.item));
            for (double t : theta) {
                if (t - half_width < x && x < t + half_width) {
                    out.push_back({e.user, e.item});
                    break;
                }
            }
        }
    }
    return out;
}

namespace {

// Largest-remainder apportionment of `total` proportional to `weights`.
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> out(weights.size(), 0);
    if (total == 0 || sum <= 0.0) return out;
    std::vector<double> frac(weights.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double exact = static_cast<double>(total) * weights[k] / sum;
        // Absorb representation error such as 224.99999999999997 for 225.
        const double base = std::floor(exact + 1e-9);
        out[k] = static_cast<std::size_t>(base);
        frac[k] = std::max(0.0, exact - base);
        assigned += out[k];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
        if (weights[order[k]] > 0.0) {
            ++out[order[k]];
            ++assigned;
        }
    }
    return out;
}

}  // namespace

std::vector<std::size_t> skew_allocation(std::span<const double> shares, std::size_t total) {
    double sum = 0.0;
    for (double z : shares) {
        if (!(z >= 0.0)) throw contract_error("label shares must be non-negative");
        sum += z;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw contract_error("label shares must sum to 1");
    std::vector<double> weights(shares.size());
    double denom = 0.0;
    for (std::size_t k = 0; k < shares.size(); ++k) {
        weights[k] = std::max(0.0, 1.0 - shares[k]);
        denom += weights[k];
    }
    if (!(denom > 0.0)) {
        throw degenerate_distribution_error("no label has a share below 1");
    }
    return apportion(weights, total);
}

CandidateSet sample_augment(const CandidateSet& cands, std::span<const double> shares,
                            double sample_pct, std::size_t cap, std::mt19937_64& rng) {
    if (!(sample_pct > 0.0 && sample_pct <= 100.0)) {
        throw contract_error("sampling percentage must lie in (0, 100]");
    }
    const std::size_t labels = shares.size();
    const auto by_pct = static_cast<std::size_t>(
        std::floor(static_cast<double>(cands.size()) * sample_pct / 100.0 + 1e-9));
    const std::size_t target = std::min({cap, by_pct, cands.size()});

    std::vector<std::vector<std::size_t>> pools(labels);
    for (std::size_t k = 0; k < cands.size(); ++k) {
        const int r = cands[k].rating;
        if (r < 1 || static_cast<std::size_t>(r) > labels) {
            throw contract_error("candidate rating outside the label range");
        }
        pools[static_cast<std::size_t>(r - 1)].push_back(k);
    }

    std::vector<std::size_t> take = skew_allocation(shares, target);
    std::size_t taken = 0;
    for (std::size_t r = 0; r < labels; ++r) {
        take[r] = std::min(take[r], pools[r].size());
        taken += take[r];
    }
    // Hand any shortfall to labels with supply left, proportional to that supply.
    while (taken < target) {
        std::vector<double> remaining(labels);
        for (std::size_t r = 0; r < labels; ++r) {
            remaining[r] = static_cast<double>(pools[r].size() - take[r]);
        }
        auto extra = apportion(remaining, target - taken);
        for (std::size_t r = 0; r < labels; ++r) {
            const std::size_t add = std::min(extra[r], pools[r].size() - take[r]);
            take[r] += add;
            taken += add;
        }
    }

    CandidateSet out;
    out.reserve(target);
    for (std::size_t r = 0; r < labels; ++r) {
        auto& pool = pools[r];
        // Partial Fisher-Yates: the first take[r] slots become a uniform sample.
        for (std::size_t k = 0; k < take[r]; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
            std::swap(pool[k], pool[pick(rng)]);
            out.push_back(cands[pool[k]]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

SparseRatingMatrix apply_augment(const SparseRatingMatrix& y, const CandidateSet& selected) {
    if (selected.empty()) return y;
    std::vector<Rating> entries(y.entries().begin(), y.entries().end());
    entries.reserve(entries.size() + selected.size());
    for (const auto& c : selected) {
        if (y.contains(c.user, c.item)) {
            throw contract_error("augmenting already observed cell (" + std::to_string(c.user) +
                                 ", " + std::to_string(c.item) + ")");
        }
        entries.push_back({c.user, c.item, c.rating});
    }
    return SparseRatingMatrix(y.n_users(), y.n_items(), y.max_rating(), std::move(entries));
}

SparseRatingMatrix apply_refine(const SparseRatingMatrix& y, std::span<const Cell> removals) {
    if (removals.empty()) return y;
    std::vector<Cell> drop(removals.begin(), removals.end());
    std::sort(drop.begin(), drop.end());
    drop.erase(std::unique(drop.begin(), drop.end()), drop.end());
    std::vector<Rating> kept;
    kept.reserve(y.size());
    auto next = drop.begin();
    for (const Rating& e : y.entries()) {
        const Cell cell{e.user, e.item};
        while (next != drop.end() && *next < cell) {
            throw contract_error("refining unobserved cell (" + std::to_string(next->user) +
                                 ", " + std::to_string(next->item) + ")");
        }
        if (next != drop.end() && *next == cell) {
            ++next;
            continue;
        }
        kept.push_back(e);
    }
    if (next != drop.end()) {
        throw contract_error("refining unobserved cell (" + std::to_string(next->user) + ", " +
                             std::to_string(next->item) + ")");
    }
    return SparseRatingMatrix(y.n_users(), y.n_items(), y.max_rating(), std::move(kept));
}

OverlapStats overlap_stats(const CandidateSet& prev, const CandidateSet& cur) {
    OverlapStats out;
    auto a = prev.begin();
    auto b = cur.begin();
    // Both sets are sorted by (user, item); a cell holds at most one rating.
    while (a != prev.end() && b != cur.end()) {
        const Cell ca{a->user, a->item};
        const Cell cb{b->user, b->item};
        if (ca < cb) {
            ++a;
        } else if (cb < ca) {
            ++b;
        } else {
            if (a->rating == b->rating) ++out.overlap;
            ++a;
            ++b;
        }
    }
    if (!prev.empty()) {
        out.retained_fraction = static_cast<double>(out.overlap) / static_cast<double>(prev.size());
    }
    return out;
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::no_candidates: return "no_candidates";
        case StopReason::test_degradation: return "test_degradation";
        case StopReason::divergence: return "divergence";
    }
    return "unknown";
}

SelfTrainResult selftrain_loop(const SparseRatingMatrix& initial, const SelfTrainConfig& cfg,
                               const SparseRatingMatrix& test, const IterationObserver& observer) {
    cfg.validate();
    if (!initial.same_shape(test)) throw shape_error("training and test matrices differ in shape");
    for (const Rating& e : test.entries()) {
        if (initial.contains(e.user, e.item)) {
            throw contract_error("training and test sets overlap at (" + std::to_string(e.user) +
                                 ", " + std::to_string(e.item) + ")");
        }
    }

    SelfTrainResult result;
    result.final_matrix = initial;
    std::mt19937_64 rng(cfg.inner.seed ^ 0x9e3779b97f4a7c15ULL);
    CandidateSet previous;
    std::size_t worse_streak = 0;

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const SparseRatingMatrix& current = result.final_matrix;
        TrainResult fit;
        try {
            fit = train(current, cfg.inner, cfg.dim);
        } catch (const divergence_error& e) {
            result.stop = StopReason::divergence;
            result.error = e.what();
            return result;
        }

        IterationReport report;
        report.iteration = iter;
        report.observed = current.size();
        report.unobserved = current.unobserved_count();
        report.gd_iterations = fit.trace.iterations;
        report.objective = fit.trace.objective.back();
        report.threshold_violations = fit.trace.threshold_violations;
        report.gap_clamps = count_gap_clamps(fit.model);

        CandidateSet candidates = high_confidence_candidates(fit.model, current, cfg.tau1);
        std::vector<Cell> refined = low_confidence_observed(fit.model, current, cfg.tau2);
        const auto shares = current.rating_shares();
        CandidateSet augmented =
            sample_augment(candidates, shares, cfg.sample_pct, cfg.cap, rng);

        report.candidates = candidates.size();
        report.augmented = augmented.size();
        report.refined = refined.size();
        if (iter > 1) {
            const auto ov = overlap_stats(previous, candidates);
            report.overlap = ov.overlap;
            report.retained_fraction = ov.retained_fraction;
            report.has_previous = true;
        }
        if (!test.empty()) {
            report.test = metrics(predict_pairs(fit.model, current, test));
        }

        SparseRatingMatrix next = apply_augment(apply_refine(current, refined), augmented);
        result.reports.push_back(report);
        if (observer) {
            observer(IterationView{current, fit.model, candidates, augmented, refined, next,
                                   result.reports.back()});
        }

        if (result.reports.size() > 1 && !test.empty()) {
            const double before = result.reports[result.reports.size() - 2].test.mae;
            worse_streak = report.test.mae > before ? worse_streak + 1 : 0;
        }
        result.model = std::move(fit.model);
        result.final_matrix = std::move(next);
        previous = std::move(candidates);

        if (previous.empty()) {
            result.stop = StopReason::no_candidates;
            return result;
        }
        if (cfg.patience > 0 && worse_streak >= cfg.patience) {
            result.stop = StopReason::test_degradation;
            return result;
        }
    }
    result.stop = StopReason::max_iterations;
    return result;
}

}  // namespace stmmmf
