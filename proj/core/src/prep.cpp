#include "panelmed/prep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "panelmed/distributions.hpp"
#include "panelmed/error.hpp"

namespace panelmed {

void WinsorSpec::check() const {
    if (!(lower_q >= 0.0 && lower_q < upper_q && upper_q <= 1.0)) {
        throw InvalidArgument("winsorization quantiles must satisfy 0 <= lower < upper <= 1");
    }
    for (const auto& v : variables) {
        if (!parse_var(v)) throw UnknownVariable(v);
    }
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * q;  // zero-based position
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size() || frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

WinsorResult winsorize_with_bounds(const PanelDataset& dataset, const WinsorSpec& spec) {
    spec.check();
    std::vector<Observation> records = dataset.records();

    // group key -> row indices; year 0 stands for the pooled sample
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        groups[spec.by_year ? records[i].raw.year : 0].push_back(i);
    }

    WinsorResult result;
    for (const auto& name : spec.variables) {
        const Var var = *parse_var(name);
        for (const auto& [year, rows] : groups) {
            if (rows.size() < 2) throw GroupTooSmall(year, name);
            std::vector<double> values;
            values.reserve(rows.size());
            for (std::size_t i : rows) values.push_back(records[i].vars[var]);
            std::sort(values.begin(), values.end());
            const double lower = quantile_sorted(values, spec.lower_q);
            const double upper = quantile_sorted(values, spec.upper_q);
            for (std::size_t i : rows) {
                double& x = records[i].vars[var];
                x = std::clamp(x, lower, upper);
            }
            result.bounds.push_back({year, name, lower, upper});
        }
    }
    result.dataset = PanelDataset(std::move(records), dataset.extra_columns());
    return result;
}

PanelDataset winsorize(const PanelDataset& dataset, const WinsorSpec& spec) {
    return winsorize_with_bounds(dataset, spec).dataset;
}

std::vector<DescriptiveRow> describe(const PanelDataset& dataset,
                                     const std::vector<std::string>& variables) {
    std::vector<DescriptiveRow> rows;
    for (const auto& name : variables) {
        const auto col = dataset.column(name);
        DescriptiveRow row;
        row.variable = name;
        row.n = col.size();
        if (!col.empty()) {
            const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
            row.min = *lo;
            row.max = *hi;
            double sum = 0.0;
            for (double x : col) sum += x;
            row.mean = std::clamp(sum / static_cast<double>(col.size()), row.min, row.max);
            if (col.size() > 1) {
                double ss = 0.0;
                for (double x : col) ss += (x - row.mean) * (x - row.mean);
                row.std_dev = std::sqrt(ss / static_cast<double>(col.size() - 1));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CorrelationMatrix correlate(const PanelDataset& dataset, const std::vector<std::string>& variables) {
    const auto n = static_cast<Eigen::Index>(dataset.size());
    const auto k = static_cast<Eigen::Index>(variables.size());
    if (n < 3) throw InsufficientObservations("correlation needs at least 3 observations");

    Eigen::MatrixXd centered = to_matrix(dataset, variables).values;
    Eigen::VectorXd norms(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        centered.col(j).array() -= centered.col(j).mean();
        norms(j) = centered.col(j).norm();
        if (norms(j) == 0.0) throw ZeroVariance(variables[static_cast<std::size_t>(j)]);
    }

    CorrelationMatrix out;
    out.variables = variables;
    out.n = static_cast<std::size_t>(n);
    out.r.resize(k, k);
    out.p.resize(k, k);
    const double df = static_cast<double>(n - 2);
    for (Eigen::Index a = 0; a < k; ++a) {
        out.r(a, a) = 1.0;
        out.p(a, a) = 0.0;
        for (Eigen::Index b = a + 1; b < k; ++b) {
            double r = centered.col(a).dot(centered.col(b)) / (norms(a) * norms(b));
            r = std::clamp(r, -1.0, 1.0);
            const double one_minus = 1.0 - r * r;
            const double p = one_minus <= 0.0
                                 ? 0.0
                                 : t_two_sided_p(r * std::sqrt(df / one_minus), df);
            out.r(a, b) = out.r(b, a) = r;
            out.p(a, b) = out.p(b, a) = p;
        }
    }
    return out;
}

}  // namespace panelmed
