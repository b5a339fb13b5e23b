#pragma once

#include <array>
#include <string>

#include "panelmed/mediation.hpp"
#include "panelmed/panel.hpp"
#include "panelmed/regress.hpp"

namespace panelmed {

/// Name of the lead column produced for `variable` ("INV" -> "LINV").
std::string lead_name(const std::string& variable);

/// Adds column L<variable> holding the same firm's value at exactly year + 1.
/// Rows without such a successor are dropped; every other field is copied.
PanelDataset lead_outcome(const PanelDataset& dataset, const std::string& variable);

struct RobustnessReport {
    std::size_t source_obs = 0;
    std::array<FitResult, 3> fits;  // lead ~ treatment; + mediator 1; + mediator 2
};

/// Reruns models (1), (4) and (5) with the outcome replaced by its one-period lead.
RobustnessReport run_robustness(const PanelDataset& dataset, const BatterySpec& spec = {},
                                const BatteryOptions& options = {});

}  // namespace panelmed
