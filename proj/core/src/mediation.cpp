#include "panelmed/mediation.hpp"

#include <future>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "panelmed/error.hpp"

namespace panelmed {

void BatterySpec::check() const {
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
        if (name.empty()) throw InvalidArgument("battery variable name is empty");
        if (!seen.insert(name).second) {
            throw InvalidArgument("battery variable " + name + " appears in more than one role");
        }
    };
    add(outcome);
    add(treatment);
    for (const auto& m : mediators) add(m);
    for (const auto& c : controls) add(c);
}

std::array<ModelSpec, 5> BatterySpec::models() const {
    auto make = [&](const std::string& dep, std::vector<std::string> head) {
        ModelSpec m;
        m.dependent = dep;
        m.regressors = std::move(head);
        m.regressors.insert(m.regressors.end(), controls.begin(), controls.end());
        m.fixed_effects = fixed_effects;
        return m;
    };
    return {make(outcome, {treatment}), make(mediators[0], {treatment}),
            make(mediators[1], {treatment}), make(outcome, {treatment, mediators[0]}),
            make(outcome, {treatment, mediators[1]})};
}

std::string Verdict::to_string() const {
    switch (kind) {
        case VerdictKind::PartialMediation:
            return suppression ? "PartialMediation (suppression)" : "PartialMediation";
        case VerdictKind::FullMediation:
            return suppression ? "FullMediation (suppression)" : "FullMediation";
        case VerdictKind::NoMediation: return "NoMediation";
        case VerdictKind::StepFailed: return fmt::format("StepFailed({})", failed_step);
    }
    return "unknown";
}

Verdict classify_mediation(Estimate total, Estimate path, Estimate direct, Estimate mediator,
                           const ChannelRule& rule, const StepThresholds& t) {
    auto failed = [](int step) { return Verdict{VerdictKind::StepFailed, step, false}; };
    if (!(total.value > 0.0 && total.p < t.total)) return failed(1);
    if (!(path.value * rule.path_sign > 0.0 && path.p < rule.path_threshold)) return failed(2);
    if (t.require_mediator_significance && !(mediator.p < t.mediator)) return failed(3);

    const bool direct_significant = direct.p < t.direct;
    if (!rule.suppression) {
        if (!direct_significant) return {VerdictKind::FullMediation, 0, false};
        if (direct.value <= 0.0) return failed(4);
        return direct.value < total.value ? Verdict{VerdictKind::PartialMediation, 0, false}
                                          : Verdict{VerdictKind::NoMediation, 0, false};
    }
    if (!(direct_significant && direct.value > 0.0)) return failed(4);
    return direct.value > total.value ? Verdict{VerdictKind::PartialMediation, 0, true}
                                      : Verdict{VerdictKind::NoMediation, 0, false};
}

double mediation_ratio(double path_a, double path_b, double total_effect) {
    if (total_effect == 0.0) throw ZeroTotalEffect();
    return path_a * path_b / total_effect;
}

std::map<std::string, bool> hypothesis_verdicts(const BatteryCoefficients& c, const Verdict& ac1,
                                                const Verdict& ac2, const StepThresholds& t) {
    std::map<std::string, bool> h;
    h["H1"] = c.alpha1.value > 0.0 && c.alpha1.p < t.total;
    h["H2a"] = c.beta1.value < 0.0 && c.beta1.p < t.path_ac1;
    h["H2b"] = ac1.mediated() && !ac1.suppression && c.lambda2.value < 0.0;
    h["H2c"] = c.gamma1.value > 0.0 && c.gamma1.p < t.path_ac2;
    h["H2d"] = ac2.mediated() && ac2.suppression && c.mu2.value < 0.0;
    return h;
}

MediationReport run_battery(const PanelDataset& dataset, const BatterySpec& spec,
                            const BatteryOptions& options) {
    spec.check();
    if (dataset.empty()) throw EmptyDataset();
    MediationReport report;
    report.spec = spec;
    const auto models = spec.models();

    if (options.threads > 1) {
        std::array<std::future<FitResult>, 5> pending;
        for (std::size_t i = 0; i < models.size(); ++i) {
            pending[i] = std::async(std::launch::async, [&, i] {
                return fit_model(dataset, models[i], options.ols);
            });
        }
        for (std::size_t i = 0; i < models.size(); ++i) report.fits[i] = pending[i].get();
    } else {
        for (std::size_t i = 0; i < models.size(); ++i) {
            report.fits[i] = fit_model(dataset, models[i], options.ols);
        }
    }

    auto extract = [&](std::size_t model, const std::string& term) {
        const auto& est = report.fits[model].term(term);
        return Estimate{est.coef, est.p_value};
    };
    auto& c = report.coefficients;
    c.alpha1 = extract(0, spec.treatment);
    c.beta1 = extract(1, spec.treatment);
    c.gamma1 = extract(2, spec.treatment);
    c.lambda1 = extract(3, spec.treatment);
    c.lambda2 = extract(3, spec.mediators[0]);
    c.mu1 = extract(4, spec.treatment);
    c.mu2 = extract(4, spec.mediators[1]);

    const auto& t = spec.thresholds;
    report.verdict_ac1 =
        classify_mediation(c.alpha1, c.beta1, c.lambda1, c.lambda2, ChannelRule::first_channel(t), t);
    report.verdict_ac2 =
        classify_mediation(c.alpha1, c.gamma1, c.mu1, c.mu2, ChannelRule::second_channel(t), t);
    if (c.alpha1.value != 0.0) {
        report.ratio_ac1 = mediation_ratio(c.beta1.value, c.lambda2.value, c.alpha1.value);
        report.ratio_ac2 = mediation_ratio(c.gamma1.value, c.mu2.value, c.alpha1.value);
    } else {
        report.ratio_ac1 = report.ratio_ac2 = std::numeric_limits<double>::quiet_NaN();
    }
    report.hypotheses = hypothesis_verdicts(c, report.verdict_ac1, report.verdict_ac2, t);
    return report;
}

}  // namespace panelmed
