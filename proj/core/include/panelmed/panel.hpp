#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace panelmed {

/// One raw firm-year observation. Blank CSV cells load as std::nullopt.
struct FirmYearRecord {
    std::string firm_id;
    int year = 0;
    std::string industry;
    std::string status;
    std::optional<double> rd_invest;
    std::optional<double> total_assets;
    std::optional<double> exec_shares;
    std::optional<double> total_shares;
    std::optional<double> mgmt_expense;
    std::optional<double> main_revenue;
    std::optional<double> other_receivables;
    std::optional<int> establish_year;
    std::optional<double> tobin_q;
    std::optional<double> ncps;
    std::optional<double> net_income;
    std::optional<double> top3_comp_avg;
    std::optional<int> dual_flag;

    bool operator==(const FirmYearRecord&) const = default;
};

/// Analysis variables, in the canonical column order used for reports.
enum class Var { INV, HOLD, AC1, AC2, AGE, SIZE, TQ, NCPS, GROWTH, LOSS, P, DUAL };

inline constexpr std::size_t kVarCount = 12;
inline constexpr std::array<Var, kVarCount> kAllVars = {
    Var::INV, Var::HOLD, Var::AC1,    Var::AC2,  Var::AGE, Var::SIZE,
    Var::TQ,  Var::NCPS, Var::GROWTH, Var::LOSS, Var::P,   Var::DUAL};

std::string_view var_name(Var v) noexcept;
std::optional<Var> parse_var(std::string_view name) noexcept;
bool is_indicator(Var v) noexcept;

struct DerivedVars {
    std::array<double, kVarCount> values{};

    double operator[](Var v) const noexcept { return values[static_cast<std::size_t>(v)]; }
    double& operator[](Var v) noexcept { return values[static_cast<std::size_t>(v)]; }

    bool operator==(const DerivedVars&) const = default;
};

struct Observation {
    FirmYearRecord raw;
    DerivedVars vars;

    bool operator==(const Observation&) const = default;
};

/// Immutable panel of firm-years sorted by (firm_id, year). Besides the twelve
/// derived variables it may carry extra named columns (e.g. a lead outcome).
class PanelDataset {
public:
    using ExtraColumns = std::map<std::string, std::vector<double>, std::less<>>;

    PanelDataset() = default;

    /// Sorts by key and rejects duplicate keys (DuplicateKey) or non-finite
    /// values (InvalidArgument). Extra columns are row-aligned with `observations`.
    explicit PanelDataset(std::vector<Observation> observations, ExtraColumns extra = {});

    const std::vector<Observation>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    const std::vector<int>& year_levels() const noexcept { return year_levels_; }
    const std::vector<std::string>& industry_levels() const noexcept { return industry_levels_; }
    const ExtraColumns& extra_columns() const noexcept { return extra_; }

    bool has_variable(std::string_view name) const;
    /// Derived variables first, then extra columns in name order.
    std::vector<std::string> variable_names() const;
    /// Throws UnknownVariable.
    std::vector<double> column(std::string_view name) const;

    bool operator==(const PanelDataset&) const = default;

private:
    std::vector<Observation> records_;
    ExtraColumns extra_;
    std::vector<int> year_levels_;
    std::vector<std::string> industry_levels_;
};

struct VariableMatrix {
    std::vector<std::string> column_names;
    Eigen::MatrixXd values;

    Eigen::Index n_rows() const noexcept { return values.rows(); }
    Eigen::Index n_cols() const noexcept { return values.cols(); }
    std::optional<Eigen::Index> index_of(std::string_view name) const;
};

/// Sorts by (firm_id, year); throws DuplicateKey listing every collision.
std::vector<FirmYearRecord> validate(std::vector<FirmYearRecord> records);

/// Row i is record i; column order follows `columns`. Throws UnknownVariable.
VariableMatrix to_matrix(const PanelDataset& dataset, const std::vector<std::string>& columns);

}  // namespace panelmed
