#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "panelmed/panel.hpp"
#include "panelmed/regress.hpp"

namespace panelmed {

/// A coefficient paired with its two-sided p-value.
struct Estimate {
    double value = 0.0;
    double p = 1.0;

    bool operator==(const Estimate&) const = default;
};

/// Significance level used at each stepwise test.
struct StepThresholds {
    double total = 0.01;     // treatment -> outcome, model (1)
    double path_ac1 = 0.01;  // treatment -> first mediator
    double path_ac2 = 0.1;   // treatment -> second mediator
    double direct = 0.01;    // treatment coefficient with the mediator included
    double mediator = 0.01;  // mediator coefficient in the outcome model
    bool require_mediator_significance = true;
};

struct BatterySpec {
    std::string outcome = "INV";
    std::string treatment = "HOLD";
    std::array<std::string, 2> mediators{"AC1", "AC2"};
    std::vector<std::string> controls{"AGE", "SIZE", "TQ", "NCPS", "GROWTH", "LOSS", "P", "DUAL"};
    std::vector<FixedEffect> fixed_effects{FixedEffect::Year, FixedEffect::Industry};
    StepThresholds thresholds;

    /// Throws InvalidArgument unless outcome, treatment, mediators and
    /// controls are pairwise disjoint.
    void check() const;

    /// The five models in table order: outcome ~ treatment, mediator 1 ~
    /// treatment, mediator 2 ~ treatment, outcome ~ treatment + mediator 1,
    /// outcome ~ treatment + mediator 2. Controls and fixed effects throughout.
    std::array<ModelSpec, 5> models() const;
};

enum class VerdictKind { PartialMediation, FullMediation, NoMediation, StepFailed };

/// Step numbers for StepFailed: 1 total effect, 2 treatment -> mediator path,
/// 3 mediator coefficient, 4 direct coefficient.
struct Verdict {
    VerdictKind kind = VerdictKind::StepFailed;
    int failed_step = 0;
    bool suppression = false;  // indirect effect opposes the total effect

    bool mediated() const noexcept {
        return kind == VerdictKind::PartialMediation || kind == VerdictKind::FullMediation;
    }
    std::string to_string() const;

    bool operator==(const Verdict&) const = default;
};

/// Sign pattern for one channel. The first channel expects a negative path and
/// a direct coefficient below the total effect; the second (suppression)
/// channel expects a positive path and a direct coefficient above it.
struct ChannelRule {
    int path_sign = -1;
    bool suppression = false;
    double path_threshold = 0.01;

    static ChannelRule first_channel(const StepThresholds& t) { return {-1, false, t.path_ac1}; }
    static ChannelRule second_channel(const StepThresholds& t) { return {+1, true, t.path_ac2}; }
};

Verdict classify_mediation(Estimate total, Estimate path, Estimate direct, Estimate mediator,
                           const ChannelRule& rule, const StepThresholds& thresholds = {});

/// (path_a * path_b) / total_effect. Throws ZeroTotalEffect.
double mediation_ratio(double path_a, double path_b, double total_effect);

/// Coefficients extracted from the five fits, named as in the model equations:
/// alpha1 (model 1), beta1 (model 2), gamma1 (model 3), lambda1/lambda2
/// (model 4) and mu1/mu2 (model 5).
struct BatteryCoefficients {
    Estimate alpha1, beta1, gamma1, lambda1, lambda2, mu1, mu2;
};

inline constexpr std::array<std::string_view, 5> kHypotheses = {"H1", "H2a", "H2b", "H2c", "H2d"};

std::map<std::string, bool> hypothesis_verdicts(const BatteryCoefficients& c, const Verdict& ac1,
                                                const Verdict& ac2,
                                                const StepThresholds& thresholds = {});

struct MediationReport {
    BatterySpec spec;
    std::array<FitResult, 5> fits;
    BatteryCoefficients coefficients;
    Verdict verdict_ac1;
    Verdict verdict_ac2;
    double ratio_ac1 = 0.0;
    double ratio_ac2 = 0.0;
    std::map<std::string, bool> hypotheses;
};

struct BatteryOptions {
    OlsOptions ols;
    unsigned threads = 1;
};

/// Fits the five models on the same sample and applies the stepwise rules.
MediationReport run_battery(const PanelDataset& dataset, const BatterySpec& spec = {},
                            const BatteryOptions& options = {});

}  // namespace panelmed
