#include "panelmed/robustness.hpp"

#include <future>

#include "panelmed/error.hpp"

namespace panelmed {

std::string lead_name(const std::string& variable) { return "L" + variable; }

PanelDataset lead_outcome(const PanelDataset& dataset, const std::string& variable) {
    const auto values = dataset.column(variable);
    const auto& records = dataset.records();
    const std::string name = lead_name(variable);

    if (dataset.has_variable(name)) throw InvalidArgument("dataset already has a column named " + name);

    std::vector<Observation> kept;
    PanelDataset::ExtraColumns extra;
    for (const auto& [col, _] : dataset.extra_columns()) extra[col];
    auto& lead = extra[name];

    // records are sorted by (firm_id, year), so a successor is always the next row
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const auto& cur = records[i].raw;
        const auto& next = records[i + 1].raw;
        if (next.firm_id != cur.firm_id || next.year != cur.year + 1) continue;
        kept.push_back(records[i]);
        lead.push_back(values[i + 1]);
        for (const auto& [col, src] : dataset.extra_columns()) extra[col].push_back(src[i]);
    }
    return PanelDataset(std::move(kept), std::move(extra));
}

RobustnessReport run_robustness(const PanelDataset& dataset, const BatterySpec& spec,
                                const BatteryOptions& options) {
    spec.check();
    const PanelDataset led = lead_outcome(dataset, spec.outcome);
    if (led.empty()) throw EmptyDataset();

    BatterySpec lead_spec = spec;
    lead_spec.outcome = lead_name(spec.outcome);
    const auto models = lead_spec.models();
    const std::array<ModelSpec, 3> chosen = {models[0], models[3], models[4]};

    RobustnessReport report;
    report.source_obs = dataset.size();
    if (options.threads > 1) {
        std::array<std::future<FitResult>, 3> pending;
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            pending[i] = std::async(std::launch::async,
                                    [&, i] { return fit_model(led, chosen[i], options.ols); });
        }
        for (std::size_t i = 0; i < chosen.size(); ++i) report.fits[i] = pending[i].get();
    } else {
        for (std::size_t i = 0; i < chosen.size(); ++i) report.fits[i] = fit_model(led, chosen[i], options.ols);
    }
    return report;
}

}  // namespace panelmed
