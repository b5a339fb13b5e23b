#include <benchmark/benchmark.h>

#include "panelmed/regress.hpp"
#include "panelmed/synth.hpp"

namespace {

const panelmed::PanelDataset& panel() {
    static const auto p = panelmed::generate_panel(panelmed::DgpParams{}).dataset;
    return p;
}

const auto kModel =
    panelmed::parse_model("INV ~ HOLD + AC1 + AGE + SIZE + TQ + NCPS + GROWTH + LOSS + P + DUAL | year + industry");

void BM_FitDummies(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(panelmed::fit_model(panel(), kModel));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(panel().size()));
}
BENCHMARK(BM_FitDummies)->Unit(benchmark::kMillisecond);

void BM_FitWithin(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(panelmed::fit_within(panel(), kModel));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(panel().size()));
}
BENCHMARK(BM_FitWithin)->Unit(benchmark::kMillisecond);

void BM_SolveDense(benchmark::State& state) {
    const auto n = state.range(0), k = state.range(1);
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, k);
    const Eigen::VectorXd y = Eigen::VectorXd::Random(n);
    for (auto _ : state) benchmark::DoNotOptimize(panelmed::solve_least_squares(y, X));
}
BENCHMARK(BM_SolveDense)->Args({500, 10})->Args({5000, 10})->Args({25000, 40})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
