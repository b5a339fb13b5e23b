#include "panelmed/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace panelmed::report {

namespace {

using nlohmann::json;

constexpr int kLabelWidth = 14;
constexpr int kCellWidth = 15;

bool is_dummy_term(std::string_view term) {
    return term.rfind("year=", 0) == 0 || term.rfind("industry=", 0) == 0;
}

// Union of displayed terms; a term new to a column goes in front of its
// successor in that column, and the constant is always last.
std::vector<std::string> merged_terms(const std::vector<FitResult>& columns) {
    std::vector<std::string> order;
    bool has_constant = false;
    for (const auto& fit : columns) {
        std::vector<std::string> terms;
        for (const auto& t : fit.terms) {
            if (is_dummy_term(t.term)) continue;
            if (t.term == kInterceptTerm) {
                has_constant = true;
                continue;
            }
            terms.push_back(t.term);
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (std::find(order.begin(), order.end(), terms[i]) != order.end()) continue;
            auto pos = order.end();
            for (std::size_t j = i + 1; j < terms.size(); ++j) {
                auto it = std::find(order.begin(), order.end(), terms[j]);
                if (it != order.end()) {
                    pos = it;
                    break;
                }
            }
            order.insert(pos, terms[i]);
        }
    }
    if (has_constant) order.emplace_back(kInterceptTerm);
    return order;
}

std::string format_coef(double x) { return fmt::format("{:#.3g}", x); }
std::string format_t(double t) { return std::isfinite(t) ? fmt::format("({:#.4g})", t) : std::string("(inf)"); }

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string fe_label(const FitResult& fit) {
    if (fit.spec.fixed_effects.empty()) return "no";
    return fit.spec.fixed_effects.size() == 2 ? "yes" : "partial";
}

}  // namespace

std::string thousands(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

std::string percent(double fraction) {
    if (!std::isfinite(fraction)) return "n/a";
    return fmt::format("{:.1f}%", 100.0 * fraction);
}

std::string describe_text(const std::vector<DescriptiveRow>& rows) {
    std::string out = fmt::format("{:<{}}{:>{}}{:>{}}{:>{}}{:>{}}{:>{}}\n", "Variable Name", kLabelWidth,
                                  "Observation", kCellWidth, "Mean", kCellWidth, "Std Dev.", kCellWidth,
                                  "Min", kCellWidth, "Max", kCellWidth);
    for (const auto& r : rows) {
        out += fmt::format("{:<{}}{:>{}}{:>{}.4g}{:>{}.4g}{:>{}.4g}{:>{}.4g}\n", r.variable, kLabelWidth,
                           thousands(r.n), kCellWidth, r.mean, kCellWidth, r.std_dev, kCellWidth, r.min,
                           kCellWidth, r.max, kCellWidth);
    }
    return out;
}

std::string describe_csv(const std::vector<DescriptiveRow>& rows) {
    std::string out = "variable,n,mean,std_dev,min,max\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", csv_field(r.variable), r.n, r.mean, r.std_dev, r.min, r.max);
    }
    return out;
}

std::string correlation_text(const CorrelationMatrix& m, const StarThresholds& stars) {
    std::string out = fmt::format("{:<{}}", "", kLabelWidth);
    for (const auto& v : m.variables) out += fmt::format("{:>{}}", v, kCellWidth);
    out += '\n';
    for (std::size_t a = 0; a < m.variables.size(); ++a) {
        out += fmt::format("{:<{}}", m.variables[a], kLabelWidth);
        for (std::size_t b = 0; b <= a; ++b) {
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            const std::string cell = a == b ? std::string("1")
                                            : fmt::format("{:.3f}{}", m.r(ia, ib), format_stars(m.p(ia, ib), stars));
            out += fmt::format("{:>{}}", cell, kCellWidth);
        }
        out += '\n';
    }
    out += fmt::format("N = {}\n", thousands(m.n));
    return out;
}

std::string correlation_csv(const CorrelationMatrix& m) {
    std::string out = "var_a,var_b,r,p\n";
    for (std::size_t a = 0; a < m.variables.size(); ++a) {
        for (std::size_t b = 0; b < m.variables.size(); ++b) {
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            out += fmt::format("{},{},{},{}\n", csv_field(m.variables[a]), csv_field(m.variables[b]), m.r(ia, ib),
                               m.p(ia, ib));
        }
    }
    return out;
}

std::string regression_table(const std::vector<FitResult>& columns) {
    const auto terms = merged_terms(columns);
    std::string out = fmt::format("{:<{}}", "VARIABLES", kLabelWidth);
    for (std::size_t c = 0; c < columns.size(); ++c) out += fmt::format("{:>{}}", fmt::format("({})", c + 1), kCellWidth);
    out += fmt::format("\n{:<{}}", "", kLabelWidth);
    for (const auto& fit : columns) out += fmt::format("{:>{}}", fit.spec.dependent, kCellWidth);
    out += '\n';
    out += std::string(static_cast<std::size_t>(kLabelWidth + kCellWidth * static_cast<int>(columns.size())), '-') + '\n';

    for (const auto& term : terms) {
        std::string coef_line = fmt::format("{:<{}}", term, kLabelWidth);
        std::string t_line = fmt::format("{:<{}}", "", kLabelWidth);
        for (const auto& fit : columns) {
            const auto* est = fit.find(term);
            coef_line += fmt::format("{:>{}}", est ? format_coef(est->coef) + est->stars : "", kCellWidth);
            t_line += fmt::format("{:>{}}", est ? format_t(est->t_stat) : "", kCellWidth);
        }
        out += coef_line + '\n' + t_line + '\n';
    }

    std::string fe = fmt::format("{:<{}}", "Year/Ind", kLabelWidth);
    std::string obs = fmt::format("{:<{}}", "Observations", kLabelWidth);
    std::string r2 = fmt::format("{:<{}}", "R-squared", kLabelWidth);
    for (const auto& fit : columns) {
        fe += fmt::format("{:>{}}", fe_label(fit), kCellWidth);
        obs += fmt::format("{:>{}}", thousands(fit.n_obs), kCellWidth);
        r2 += fmt::format("{:>{}.3f}", fit.r_squared, kCellWidth);
    }
    out += fe + '\n' + obs + '\n' + r2 + '\n';
    return out;
}

std::string mediation_text(const MediationReport& r) {
    std::string out = regression_table({r.fits.begin(), r.fits.end()});
    out += "\nHypotheses\n";
    for (auto h : kHypotheses) {
        const auto it = r.hypotheses.find(std::string(h));
        const bool ok = it != r.hypotheses.end() && it->second;
        out += fmt::format("  {}: {}\n", h, ok ? "supported" : "unsupported");
    }
    const auto& c = r.coefficients;
    const auto& m = r.spec.mediators;
    out += "\nMediation\n";
    out += fmt::format("  {} channel: {}\n", m[0], r.verdict_ac1.to_string());
    out += fmt::format("    effect = ({}) x ({}) / {} = {}\n", format_coef(c.beta1.value),
                       format_coef(c.lambda2.value), format_coef(c.alpha1.value), percent(r.ratio_ac1));
    out += fmt::format("  {} channel: {}\n", m[1], r.verdict_ac2.to_string());
    out += fmt::format("    effect = ({}) x ({}) / {} = {}\n", format_coef(c.gamma1.value),
                       format_coef(c.mu2.value), format_coef(c.alpha1.value), percent(r.ratio_ac2));
    return out;
}

std::string robustness_text(const RobustnessReport& r) {
    std::string out = regression_table({r.fits.begin(), r.fits.end()});
    out += fmt::format("\nLead sample: {} of {} firm-years\n", thousands(r.fits[0].n_obs), thousands(r.source_obs));
    return out;
}

std::string fit_csv(const FitResult& fit) {
    std::string out = "term,coef,se,t,p,stars\n";
    for (const auto& t : fit.terms) {
        out += fmt::format("{},{},{},{},{},{}\n", csv_field(t.term), t.coef, t.std_err, t.t_stat, t.p_value, t.stars);
    }
    return out;
}

std::string fits_csv(const std::vector<FitResult>& fits) {
    std::string out = "model,dependent,term,coef,se,t,p,stars\n";
    for (std::size_t m = 0; m < fits.size(); ++m) {
        for (const auto& t : fits[m].terms) {
            out += fmt::format("{},{},{},{},{},{},{},{}\n", m + 1, csv_field(fits[m].spec.dependent), csv_field(t.term),
                               t.coef, t.std_err, t.t_stat, t.p_value, t.stars);
        }
    }
    return out;
}

std::string mediation_csv(const MediationReport& r) {
    std::string out = fits_csv({r.fits.begin(), r.fits.end()});
    out += "\nkey,value\n";
    out += fmt::format("verdict_{},{}\n", r.spec.mediators[0], r.verdict_ac1.to_string());
    out += fmt::format("verdict_{},{}\n", r.spec.mediators[1], r.verdict_ac2.to_string());
    out += fmt::format("ratio_{},{}\n", r.spec.mediators[0], r.ratio_ac1);
    out += fmt::format("ratio_{},{}\n", r.spec.mediators[1], r.ratio_ac2);
    for (const auto& [h, ok] : r.hypotheses) out += fmt::format("{},{}\n", h, ok ? "supported" : "unsupported");
    return out;
}

json to_json(const DescriptiveRow& r) {
    return {{"variable", r.variable}, {"n", r.n},     {"mean", number(r.mean)}, {"std_dev", number(r.std_dev)},
            {"min", number(r.min)},   {"max", number(r.max)}};
}

json to_json(const CorrelationMatrix& m) {
    json r = json::array(), p = json::array();
    for (Eigen::Index a = 0; a < m.r.rows(); ++a) {
        json rr = json::array(), pr = json::array();
        for (Eigen::Index b = 0; b < m.r.cols(); ++b) {
            rr.push_back(number(m.r(a, b)));
            pr.push_back(number(m.p(a, b)));
        }
        r.push_back(rr);
        p.push_back(pr);
    }
    return {{"variables", m.variables}, {"n", m.n}, {"r", r}, {"p", p}};
}

json to_json(const ModelSpec& spec) {
    std::vector<std::string> fes;
    for (auto fe : spec.fixed_effects) fes.emplace_back(fixed_effect_name(fe));
    return {{"formula", spec.to_string()},
            {"dependent", spec.dependent},
            {"regressors", spec.regressors},
            {"fixed_effects", fes},
            {"include_intercept", spec.include_intercept}};
}

json to_json(const FitResult& fit) {
    json terms = json::array();
    for (const auto& t : fit.terms) {
        terms.push_back({{"term", t.term},
                         {"coef", number(t.coef)},
                         {"std_err", number(t.std_err)},
                         {"t_stat", number(t.t_stat)},
                         {"p_value", number(t.p_value)},
                         {"stars", t.stars}});
    }
    return {{"spec", to_json(fit.spec)},
            {"terms", terms},
            {"dropped_terms", fit.dropped_terms},
            {"n_obs", fit.n_obs},
            {"n_params", fit.n_params},
            {"df_resid", number(fit.df_resid)},
            {"rss", number(fit.rss)},
            {"tss", number(fit.tss)},
            {"r_squared", number(fit.r_squared)},
            {"sigma2", number(fit.sigma2)},
            {"covariance", fit.covariance == CovarianceType::Classical ? "classical" : "cluster_firm"},
            {"n_clusters", fit.n_clusters}};
}

namespace {

json to_json(const Estimate& e) { return {{"value", number(e.value)}, {"p", number(e.p)}}; }

json to_json(const Verdict& v) {
    std::string kind;
    switch (v.kind) {
        case VerdictKind::PartialMediation: kind = "PartialMediation"; break;
        case VerdictKind::FullMediation: kind = "FullMediation"; break;
        case VerdictKind::NoMediation: kind = "NoMediation"; break;
        case VerdictKind::StepFailed: kind = "StepFailed"; break;
    }
    json j = {{"kind", kind}, {"suppression", v.suppression}, {"label", v.to_string()}};
    if (v.kind == VerdictKind::StepFailed) j["failed_step"] = v.failed_step;
    return j;
}

}  // namespace

json to_json(const MediationReport& r) {
    json fits = json::array();
    for (const auto& f : r.fits) fits.push_back(to_json(f));
    const auto& c = r.coefficients;
    const auto& t = r.spec.thresholds;
    json spec = {{"outcome", r.spec.outcome},
                 {"treatment", r.spec.treatment},
                 {"mediators", r.spec.mediators},
                 {"controls", r.spec.controls},
                 {"thresholds",
                  {{"total", t.total},
                   {"path_ac1", t.path_ac1},
                   {"path_ac2", t.path_ac2},
                   {"direct", t.direct},
                   {"mediator", t.mediator},
                   {"require_mediator_significance", t.require_mediator_significance}}}};
    return {{"spec", spec},
            {"fits", fits},
            {"coefficients",
             {{"alpha1", to_json(c.alpha1)},
              {"beta1", to_json(c.beta1)},
              {"gamma1", to_json(c.gamma1)},
              {"lambda1", to_json(c.lambda1)},
              {"lambda2", to_json(c.lambda2)},
              {"mu1", to_json(c.mu1)},
              {"mu2", to_json(c.mu2)}}},
            {"verdict_ac1", to_json(r.verdict_ac1)},
            {"verdict_ac2", to_json(r.verdict_ac2)},
            {"ratio_ac1", number(r.ratio_ac1)},
            {"ratio_ac2", number(r.ratio_ac2)},
            {"hypotheses", r.hypotheses}};
}

json to_json(const RobustnessReport& r) {
    json fits = json::array();
    for (const auto& f : r.fits) fits.push_back(to_json(f));
    return {{"source_obs", r.source_obs}, {"fits", fits}};
}

json to_json(const FilterLog& log) {
    json removed = json::object();
    for (const auto& [reason, n] : log.removed) removed[std::string(reason_name(reason))] = n;
    return {{"input", log.input}, {"retained", log.retained}, {"removed", removed}};
}

json to_json(const ConstructLog& log) {
    json dropped = json::array();
    for (const auto& d : log.dropped) {
        dropped.push_back({{"firm_id", d.firm_id},
                           {"year", d.year},
                           {"reason", std::string(drop_reason_name(d.reason))},
                           {"field", d.field}});
    }
    return {{"dropped", dropped}};
}

}  // namespace panelmed::report
