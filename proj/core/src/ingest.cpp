#include "panelmed/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "panelmed/error.hpp"

namespace panelmed {

namespace {

using StringField = std::string FirmYearRecord::*;
using IntField = int FirmYearRecord::*;
using OptDoubleField = std::optional<double> FirmYearRecord::*;
using OptIntField = std::optional<int> FirmYearRecord::*;
using FieldRef = std::variant<StringField, IntField, OptDoubleField, OptIntField>;

const std::array<FieldRef, kCsvColumns.size()> kFieldRefs = {
    &FirmYearRecord::firm_id,      &FirmYearRecord::year,
    &FirmYearRecord::industry,     &FirmYearRecord::status,
    &FirmYearRecord::rd_invest,    &FirmYearRecord::total_assets,
    &FirmYearRecord::exec_shares,  &FirmYearRecord::total_shares,
    &FirmYearRecord::mgmt_expense, &FirmYearRecord::main_revenue,
    &FirmYearRecord::other_receivables, &FirmYearRecord::establish_year,
    &FirmYearRecord::tobin_q,      &FirmYearRecord::ncps,
    &FirmYearRecord::net_income,   &FirmYearRecord::top3_comp_avg,
    &FirmYearRecord::dual_flag};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// RFC 4180 fields without embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) return std::nullopt;
    }
    return value;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

bool starts_with_any(const std::string& s, const std::set<std::string>& prefixes) {
    return std::any_of(prefixes.begin(), prefixes.end(),
                       [&](const std::string& p) { return s.rfind(p, 0) == 0; });
}

bool has_missing(const FirmYearRecord& r) {
    return r.industry.empty() || !r.rd_invest || !r.total_assets || !r.exec_shares ||
           !r.total_shares || !r.mgmt_expense || !r.main_revenue || !r.other_receivables ||
           !r.establish_year || !r.tobin_q || !r.ncps || !r.net_income || !r.top3_comp_avg ||
           !r.dual_flag || *r.top3_comp_avg <= 0.0;
}

}  // namespace

void IngestConfig::check() const {
    if (year_min > year_max) {
        throw InvalidArgument(fmt::format("year range [{}, {}] is empty", year_min, year_max));
    }
}

std::string_view reason_name(FilterReason r) noexcept {
    switch (r) {
        case FilterReason::Status: return "status";
        case FilterReason::Industry: return "industry";
        case FilterReason::YearRange: return "year_range";
        case FilterReason::Missing: return "missing";
    }
    return "unknown";
}

std::size_t FilterLog::total_removed() const noexcept {
    std::size_t total = 0;
    for (const auto& [reason, n] : removed) total += n;
    return total;
}

std::string FilterLog::to_text() const {
    std::string out = fmt::format("input records: {}\n", input);
    for (const auto& [reason, n] : removed) {
        out += fmt::format("removed ({}): {}\n", reason_name(reason), n);
    }
    out += fmt::format("retained: {}\n", retained);
    return out;
}

std::string FilterLog::to_csv() const {
    std::string out = "reason,count\n";
    for (const auto& [reason, n] : removed) out += fmt::format("{},{}\n", reason_name(reason), n);
    return out;
}

std::vector<FirmYearRecord> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch("input is empty; header row expected");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

    const auto header = split_csv_line(line);
    std::vector<std::string> missing_cols, unknown_cols;
    std::array<std::size_t, kCsvColumns.size()> position{};
    for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return trim(h) == kCsvColumns[c]; });
        if (it == header.end()) {
            missing_cols.emplace_back(kCsvColumns[c]);
        } else {
            position[c] = static_cast<std::size_t>(it - header.begin());
        }
    }
    for (const auto& h : header) {
        if (std::find(kCsvColumns.begin(), kCsvColumns.end(), trim(h)) == kCsvColumns.end()) {
            unknown_cols.emplace_back(trim(h));
        }
    }
    if (!missing_cols.empty() || !unknown_cols.empty() || header.size() != kCsvColumns.size()) {
        throw SchemaMismatch(fmt::format("header mismatch; missing [{}], unknown [{}]",
                                         fmt::join(missing_cols, ", "),
                                         fmt::join(unknown_cols, ", ")));
    }

    std::vector<FirmYearRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError(row, "*", fmt::format("expected {} cells, found {}", header.size(),
                                                   cells.size()));
        }
        FirmYearRecord rec;
        for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
            const std::string_view cell = trim(cells[position[c]]);
            const std::string column(kCsvColumns[c]);
            std::visit(
                [&](auto field) {
                    using F = decltype(field);
                    if constexpr (std::is_same_v<F, StringField>) {
                        rec.*field = std::string(cell);
                    } else if constexpr (std::is_same_v<F, IntField>) {
                        auto v = parse_number<int>(cell);
                        if (!v) throw ParseError(row, column, fmt::format("'{}' is not an integer", cell));
                        rec.*field = *v;
                    } else if constexpr (std::is_same_v<F, OptDoubleField>) {
                        if (cell.empty()) return;
                        auto v = parse_number<double>(cell);
                        if (!v) throw ParseError(row, column, fmt::format("'{}' is not a number", cell));
                        rec.*field = *v;
                    } else {
                        if (cell.empty()) return;
                        auto v = parse_number<int>(cell);
                        if (!v) throw ParseError(row, column, fmt::format("'{}' is not an integer", cell));
                        rec.*field = *v;
                    }
                },
                kFieldRefs[c]);
        }
        if (rec.firm_id.empty()) throw ParseError(row, "firm_id", "firm_id is blank");
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<FirmYearRecord> load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_csv(in);
}

void write_csv(std::ostream& out, const std::vector<FirmYearRecord>& records) {
    out << fmt::format("{}\n", fmt::join(kCsvColumns, ","));
    std::string line;
    for (const auto& rec : records) {
        line.clear();
        for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
            if (c > 0) line += ',';
            std::visit(
                [&](auto field) {
                    using F = decltype(field);
                    if constexpr (std::is_same_v<F, StringField>) {
                        line += quote_if_needed(rec.*field);
                    } else if constexpr (std::is_same_v<F, IntField>) {
                        line += fmt::format("{}", rec.*field);
                    } else {
                        if (const auto& v = rec.*field) line += fmt::format("{}", *v);
                    }
                },
                kFieldRefs[c]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw Error("write failed");
}

FilterResult filter_sample(std::vector<FirmYearRecord> records, const IngestConfig& config) {
    config.check();
    FilterResult result;
    result.log.input = records.size();
    for (auto& rec : records) {
        std::optional<FilterReason> reason;
        if (config.excluded_statuses.count(rec.status)) {
            reason = FilterReason::Status;
        } else if (starts_with_any(rec.industry, config.excluded_industry_prefixes)) {
            reason = FilterReason::Industry;
        } else if (rec.year < config.year_min || rec.year > config.year_max) {
            reason = FilterReason::YearRange;
        } else if (has_missing(rec)) {
            reason = FilterReason::Missing;
        }
        if (reason) {
            ++result.log.removed[*reason];
        } else {
            result.records.push_back(std::move(rec));
        }
    }
    result.log.retained = result.records.size();
    return result;
}

std::string_view drop_reason_name(DropReason r) noexcept {
    switch (r) {
        case DropReason::Missing: return "missing";
        case DropReason::DenominatorZero: return "denominator_zero";
        case DropReason::InvalidValue: return "invalid_value";
        case DropReason::LogUndefined: return "log_undefined";
        case DropReason::GrowthUndefined: return "growth_undefined";
        case DropReason::NonFinite: return "non_finite";
    }
    return "unknown";
}

std::size_t ConstructLog::count(DropReason r) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        dropped.begin(), dropped.end(), [r](const DroppedRecord& d) { return d.reason == r; }));
}

std::string ConstructLog::to_text() const {
    std::string out;
    for (DropReason r : {DropReason::Missing, DropReason::DenominatorZero, DropReason::InvalidValue,
                         DropReason::LogUndefined, DropReason::GrowthUndefined,
                         DropReason::NonFinite}) {
        out += fmt::format("dropped ({}): {}\n", drop_reason_name(r), count(r));
    }
    return out;
}

std::variant<DerivedVars, DroppedRecord> derive_variables(const FirmYearRecord& r,
                                                          const FirmYearRecord* prior) {
    auto drop = [&](DropReason reason, std::string field) {
        return DroppedRecord{r.firm_id, r.year, reason, std::move(field)};
    };
    if (has_missing(r)) {
        return drop(r.top3_comp_avg && *r.top3_comp_avg <= 0.0 ? DropReason::LogUndefined
                                                                : DropReason::Missing,
                    "");
    }
    if (*r.total_assets == 0.0) return drop(DropReason::DenominatorZero, "total_assets");
    if (*r.total_shares == 0.0) return drop(DropReason::DenominatorZero, "total_shares");
    if (*r.main_revenue == 0.0) return drop(DropReason::DenominatorZero, "main_revenue");
    if (*r.total_assets < 0.0) return drop(DropReason::LogUndefined, "total_assets");
    if (*r.exec_shares < 0.0 || *r.exec_shares > *r.total_shares) {
        return drop(DropReason::InvalidValue, "exec_shares");
    }
    if (*r.rd_invest < 0.0) return drop(DropReason::InvalidValue, "rd_invest");
    if (*r.other_receivables < 0.0) return drop(DropReason::InvalidValue, "other_receivables");
    if (*r.establish_year > r.year) return drop(DropReason::InvalidValue, "establish_year");
    if (*r.dual_flag != 0 && *r.dual_flag != 1) return drop(DropReason::InvalidValue, "dual_flag");

    if (prior == nullptr || prior->firm_id != r.firm_id || prior->year != r.year - 1 ||
        !prior->main_revenue || *prior->main_revenue == 0.0) {
        return drop(DropReason::GrowthUndefined, "main_revenue");
    }
    const double prev_revenue = *prior->main_revenue;

    DerivedVars d;
    d[Var::INV] = *r.rd_invest / *r.total_assets;
    d[Var::HOLD] = *r.exec_shares / *r.total_shares;
    d[Var::AC1] = *r.mgmt_expense / *r.main_revenue;
    d[Var::AC2] = *r.other_receivables / *r.total_assets;
    d[Var::AGE] = static_cast<double>(r.year - *r.establish_year);
    d[Var::SIZE] = std::log(*r.total_assets);
    d[Var::TQ] = *r.tobin_q;
    d[Var::NCPS] = *r.ncps;
    d[Var::GROWTH] = (*r.main_revenue - prev_revenue) / prev_revenue;
    d[Var::LOSS] = *r.net_income < 0.0 ? 1.0 : 0.0;
    d[Var::P] = std::log(*r.top3_comp_avg);
    d[Var::DUAL] = static_cast<double>(*r.dual_flag);

    for (Var v : kAllVars) {
        if (!std::isfinite(d[v])) return drop(DropReason::NonFinite, std::string(var_name(v)));
    }
    return d;
}

ConstructResult construct_variables(std::vector<FirmYearRecord> records) {
    records = validate(std::move(records));
    ConstructResult result;
    std::vector<Observation> observations;
    observations.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const FirmYearRecord* prior = i > 0 ? &records[i - 1] : nullptr;
        auto derived = derive_variables(records[i], prior);
        if (auto* vars = std::get_if<DerivedVars>(&derived)) {
            observations.push_back(Observation{records[i], *vars});
        } else {
            result.log.dropped.push_back(std::get<DroppedRecord>(std::move(derived)));
        }
    }
    result.dataset = PanelDataset(std::move(observations));
    return result;
}

}  // namespace panelmed
