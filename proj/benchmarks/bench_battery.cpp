#include <benchmark/benchmark.h>

#include "panelmed/mediation.hpp"
#include "panelmed/prep.hpp"
#include "panelmed/synth.hpp"

namespace {

const panelmed::PanelDataset& panel() {
    static const auto p = panelmed::generate_panel(panelmed::DgpParams{}).dataset;
    return p;
}

void BM_Generate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(panelmed::generate_panel(panelmed::DgpParams{}));
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_Winsorize(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(panelmed::winsorize(panel()));
}
BENCHMARK(BM_Winsorize)->Unit(benchmark::kMillisecond);

void BM_Battery(benchmark::State& state) {
    panelmed::BatteryOptions opts;
    opts.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(panelmed::run_battery(panel(), {}, opts));
}
BENCHMARK(BM_Battery)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
