#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "panelmed/panel.hpp"

namespace panelmed {

/// Required input columns, in the order emitted by write_csv.
inline constexpr std::array<std::string_view, 17> kCsvColumns = {
    "firm_id",      "year",        "industry",          "status",         "rd_invest",
    "total_assets", "exec_shares", "total_shares",      "mgmt_expense",   "main_revenue",
    "other_receivables", "establish_year", "tobin_q",   "ncps",           "net_income",
    "top3_comp_avg", "dual_flag"};

struct IngestConfig {
    std::set<std::string> excluded_statuses{"ST", "*ST"};
    std::set<std::string> excluded_industry_prefixes{"J"};
    int year_min = 2010;
    int year_max = 2021;

    /// Throws InvalidArgument when year_min > year_max.
    void check() const;
};

enum class FilterReason { Status, Industry, YearRange, Missing };

std::string_view reason_name(FilterReason r) noexcept;

/// Per-reason removal counts. Each removed record is counted once, under the
/// first reason that applies (status, industry, year range, missing).
struct FilterLog {
    std::size_t input = 0;
    std::size_t retained = 0;
    std::map<FilterReason, std::size_t> removed{{FilterReason::Status, 0},
                                                {FilterReason::Industry, 0},
                                                {FilterReason::YearRange, 0},
                                                {FilterReason::Missing, 0}};

    std::size_t total_removed() const noexcept;
    std::string to_text() const;
    /// `reason,count` rows.
    std::string to_csv() const;
};

struct FilterResult {
    std::vector<FirmYearRecord> records;
    FilterLog log;
};

// CSV I/O. Blank cells are missing values; firm_id and year are mandatory.
std::vector<FirmYearRecord> read_csv(std::istream& in);
std::vector<FirmYearRecord> load_csv(const std::filesystem::path& path);
/// Shortest round-trip number formatting, so read_csv(write_csv(r)) == r.
void write_csv(std::ostream& out, const std::vector<FirmYearRecord>& records);

FilterResult filter_sample(std::vector<FirmYearRecord> records, const IngestConfig& config = {});

enum class DropReason { Missing, DenominatorZero, InvalidValue, LogUndefined, GrowthUndefined, NonFinite };

std::string_view drop_reason_name(DropReason r) noexcept;

struct DroppedRecord {
    std::string firm_id;
    int year = 0;
    DropReason reason = DropReason::Missing;
    std::string field;

    bool operator==(const DroppedRecord&) const = default;
};

struct ConstructLog {
    std::vector<DroppedRecord> dropped;

    std::size_t count(DropReason r) const noexcept;
    std::string to_text() const;
};

struct ConstructResult {
    PanelDataset dataset;
    ConstructLog log;
};

/// Variable definitions for one record. `prior` is the same firm's record for
/// year - 1, or nullptr when there is none (GROWTH is then undefined).
std::variant<DerivedVars, DroppedRecord> derive_variables(const FirmYearRecord& record,
                                                          const FirmYearRecord* prior);

/// Builds the analysis panel. Records that cannot produce finite variables are
/// dropped and logged rather than raised. Throws DuplicateKey.
ConstructResult construct_variables(std::vector<FirmYearRecord> records);

}  // namespace panelmed
