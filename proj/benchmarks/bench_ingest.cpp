#include <benchmark/benchmark.h>

#include <sstream>

#include "panelmed/ingest.hpp"
#include "panelmed/synth.hpp"

namespace {

// 2,126 firms x 12 raw years = 25,512 rows.
const std::string& csv_text() {
    static const std::string text = [] {
        panelmed::DgpParams p;
        p.n_firms = 2126;
        p.year_min = 2011;
        std::ostringstream out;
        panelmed::write_csv(out, panelmed::generate_panel(p).raw);
        return out.str();
    }();
    return text;
}

void BM_ReadCsv(benchmark::State& state) {
    for (auto _ : state) {
        std::istringstream in(csv_text());
        benchmark::DoNotOptimize(panelmed::read_csv(in));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(csv_text().size()));
}
BENCHMARK(BM_ReadCsv)->Unit(benchmark::kMillisecond);

void BM_IngestPipeline(benchmark::State& state) {
    for (auto _ : state) {
        std::istringstream in(csv_text());
        auto filtered = panelmed::filter_sample(panelmed::read_csv(in));
        benchmark::DoNotOptimize(panelmed::construct_variables(std::move(filtered.records)));
    }
}
BENCHMARK(BM_IngestPipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
