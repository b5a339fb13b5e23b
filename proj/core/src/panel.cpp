#include "panelmed/panel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "panelmed/error.hpp"

namespace panelmed {

namespace {

constexpr std::array<std::string_view, kVarCount> kVarNames = {
    "INV", "HOLD", "AC1", "AC2", "AGE", "SIZE", "TQ", "NCPS", "GROWTH", "LOSS", "P", "DUAL"};

std::string describe_keys(const std::vector<std::pair<std::string, int>>& keys) {
    std::string msg = "duplicate (firm_id, year) keys:";
    for (const auto& [firm, year] : keys) {
        msg += " (" + firm + ", " + std::to_string(year) + ")";
    }
    return msg;
}

template <class T, class KeyFn>
std::vector<std::pair<std::string, int>> find_collisions(const std::vector<T>& sorted, KeyFn key) {
    std::vector<std::pair<std::string, int>> collisions;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const auto& [firm, year] = key(sorted[i]);
        const auto& [prev_firm, prev_year] = key(sorted[i - 1]);
        if (firm == prev_firm && year == prev_year &&
            (collisions.empty() || collisions.back() != std::pair<std::string, int>{firm, year})) {
            collisions.emplace_back(firm, year);
        }
    }
    return collisions;
}

}  // namespace

DuplicateKey::DuplicateKey(std::vector<std::pair<std::string, int>> keys)
    : DataError(describe_keys(keys)), keys_(std::move(keys)) {}

std::string_view var_name(Var v) noexcept { return kVarNames[static_cast<std::size_t>(v)]; }

std::optional<Var> parse_var(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kVarCount; ++i) {
        if (kVarNames[i] == name) return kAllVars[i];
    }
    return std::nullopt;
}

bool is_indicator(Var v) noexcept { return v == Var::LOSS || v == Var::DUAL; }

PanelDataset::PanelDataset(std::vector<Observation> observations, ExtraColumns extra) {
    const std::size_t n = observations.size();
    for (const auto& [name, col] : extra) {
        if (col.size() != n) {
            throw InvalidArgument("extra column " + name + " has " + std::to_string(col.size()) +
                                  " rows, expected " + std::to_string(n));
        }
        if (parse_var(name)) throw InvalidArgument("extra column shadows variable " + name);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(observations[a].raw.firm_id, observations[a].raw.year) <
               std::tie(observations[b].raw.firm_id, observations[b].raw.year);
    });

    records_.reserve(n);
    for (std::size_t i : order) records_.push_back(std::move(observations[i]));
    for (auto& [name, col] : extra) {
        std::vector<double> sorted(n);
        for (std::size_t i = 0; i < n; ++i) sorted[i] = col[order[i]];
        extra_.emplace(name, std::move(sorted));
    }

    auto collisions = find_collisions(records_, [](const Observation& o) {
        return std::pair<const std::string&, int>{o.raw.firm_id, o.raw.year};
    });
    if (!collisions.empty()) throw DuplicateKey(std::move(collisions));

    for (const auto& obs : records_) {
        for (Var v : kAllVars) {
            if (!std::isfinite(obs.vars[v])) {
                throw InvalidArgument("non-finite " + std::string(var_name(v)) + " for (" +
                                      obs.raw.firm_id + ", " + std::to_string(obs.raw.year) + ")");
            }
        }
    }
    for (const auto& [name, col] : extra_) {
        if (!std::all_of(col.begin(), col.end(), [](double x) { return std::isfinite(x); })) {
            throw InvalidArgument("non-finite value in column " + name);
        }
    }

    std::set<int> years;
    std::set<std::string> industries;
    for (const auto& obs : records_) {
        years.insert(obs.raw.year);
        industries.insert(obs.raw.industry);
    }
    year_levels_.assign(years.begin(), years.end());
    industry_levels_.assign(industries.begin(), industries.end());
}

bool PanelDataset::has_variable(std::string_view name) const {
    return parse_var(name).has_value() || extra_.find(name) != extra_.end();
}

std::vector<std::string> PanelDataset::variable_names() const {
    std::vector<std::string> names;
    for (Var v : kAllVars) names.emplace_back(var_name(v));
    for (const auto& [name, col] : extra_) names.push_back(name);
    return names;
}

std::vector<double> PanelDataset::column(std::string_view name) const {
    if (auto v = parse_var(name)) {
        std::vector<double> out;
        out.reserve(records_.size());
        for (const auto& obs : records_) out.push_back(obs.vars[*v]);
        return out;
    }
    if (auto it = extra_.find(name); it != extra_.end()) return it->second;
    throw UnknownVariable(std::string(name));
}

std::optional<Eigen::Index> VariableMatrix::index_of(std::string_view name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - column_names.begin());
}

std::vector<FirmYearRecord> validate(std::vector<FirmYearRecord> records) {
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.firm_id, a.year) < std::tie(b.firm_id, b.year);
    });
    auto collisions = find_collisions(records, [](const FirmYearRecord& r) {
        return std::pair<const std::string&, int>{r.firm_id, r.year};
    });
    if (!collisions.empty()) throw DuplicateKey(std::move(collisions));
    return records;
}

VariableMatrix to_matrix(const PanelDataset& dataset, const std::vector<std::string>& columns) {
    VariableMatrix m;
    m.column_names = columns;
    m.values.resize(static_cast<Eigen::Index>(dataset.size()),
                    static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto col = dataset.column(columns[j]);
        for (std::size_t i = 0; i < col.size(); ++i) {
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
        }
    }
    return m;
}

}  // namespace panelmed
