#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "panelmed/ingest.hpp"
#include "panelmed/mediation.hpp"
#include "panelmed/prep.hpp"
#include "panelmed/regress.hpp"
#include "panelmed/robustness.hpp"

namespace panelmed::report {

// Plain-text tables.
std::string describe_text(const std::vector<DescriptiveRow>& rows);
std::string correlation_text(const CorrelationMatrix& m, const StarThresholds& stars = {});
/// Regression columns side by side: coefficient with stars, then the
/// t-statistic in parentheses, then Year/Ind, Observations and R-squared rows.
/// Fixed-effect dummies are not listed.
std::string regression_table(const std::vector<FitResult>& columns);
std::string mediation_text(const MediationReport& report);
std::string robustness_text(const RobustnessReport& report);

// CSV.
std::string describe_csv(const std::vector<DescriptiveRow>& rows);
std::string correlation_csv(const CorrelationMatrix& m);
/// `term,coef,se,t,p,stars`
std::string fit_csv(const FitResult& fit);
/// fit_csv rows prefixed with a model column.
std::string fits_csv(const std::vector<FitResult>& fits);
std::string mediation_csv(const MediationReport& report);

// JSON.
nlohmann::json to_json(const DescriptiveRow& row);
nlohmann::json to_json(const CorrelationMatrix& m);
nlohmann::json to_json(const ModelSpec& spec);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const MediationReport& report);
nlohmann::json to_json(const RobustnessReport& report);
nlohmann::json to_json(const FilterLog& log);
nlohmann::json to_json(const ConstructLog& log);

/// "25,512"
std::string thousands(std::size_t n);
/// One decimal, e.g. 0.2364 -> "23.6%".
std::string percent(double fraction);

}  // namespace panelmed::report
