#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "stmmmf/kernels.hpp"
#include "stmmmf/selftrain.hpp"
#include "stmmmf/trainer.hpp"

using namespace stmmmf;

namespace {

SparseRatingMatrix random_ratings(std::size_t n, std::size_t m, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(density);
    std::uniform_int_distribution<int> label(1, 5);
    std::vector<Rating> es;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j)
            if (keep(rng)) es.push_back({i, j, label(rng)});
    return {n, m, 5, std::move(es)};
}

void bm_gradient_pass(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto y = random_ratings(n, n, 0.06, 1);
    const auto model = initial_model(y, 10, 1);
    Gradients g;
    for (auto _ : state) {
        benchmark::DoNotOptimize(objective_and_gradients(model, y, 1.0, &g));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(y.size()));
}
BENCHMARK(bm_gradient_pass)->Arg(200)->Arg(800);

void bm_candidate_scan(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto y = random_ratings(n, n, 0.06, 2);
    const auto model = initial_model(y, 10, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(high_confidence_candidates(model, y, 0.4999));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(bm_candidate_scan)->Arg(200)->Arg(800);

void bm_discretize(benchmark::State& state) {
    const std::vector<double> theta{-1.5, -0.5, 0.5, 1.5};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> x(0.0, 1.5);
    std::vector<double> xs(4096);
    for (auto& v : xs) v = x(rng);
    for (auto _ : state) {
        int acc = 0;
        for (double v : xs) acc += discretize(theta, v);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(bm_discretize);

}  // namespace
BENCHMARK_MAIN();
