#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "panelmed/error.hpp"
#include "panelmed/ingest.hpp"

using namespace panelmed;

namespace {

const std::string kHeader =
    "firm_id,year,industry,status,rd_invest,total_assets,exec_shares,total_shares,mgmt_expense,main_revenue,"
    "other_receivables,establish_year,tobin_q,ncps,net_income,top3_comp_avg,dual_flag\n";

std::vector<FirmYearRecord> parse(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

}  // namespace

TEST(LoadCsv, WellFormedThreeRows) {
    const auto records = parse(kHeader +
                               "F1,2014,C27,normal,50,1000,10,100,20,400,30,2000,1.8,0.4,12,800000,0\n"
                               "F1,2015,C27,normal,60,1100,12,100,22,480,31,2000,1.9,0.5,-3,810000,1\n"
                               "F2,2015,J66,ST,,900,0,90,10,200,5,1999,1.1,0.1,1,500000,0\n");
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[0].firm_id, "F1");
    EXPECT_EQ(records[1].net_income, -3.0);
    EXPECT_EQ(records[1].dual_flag, 1);
    EXPECT_FALSE(records[2].rd_invest.has_value());
    EXPECT_EQ(records[2].status, "ST");
}

TEST(LoadCsv, ColumnOrderIsFree) {
    const auto records = parse(
        "year,firm_id,industry,status,rd_invest,total_assets,exec_shares,total_shares,mgmt_expense,main_revenue,"
        "other_receivables,establish_year,tobin_q,ncps,net_income,top3_comp_avg,dual_flag\n"
        "2014,F1,C27,normal,50,1000,10,100,20,400,30,2000,1.8,0.4,12,800000,0\n");
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].firm_id, "F1");
    EXPECT_EQ(records[0].year, 2014);
}

TEST(LoadCsv, MissingColumnIsSchemaMismatch) {
    std::string header = kHeader;
    header.replace(header.find("total_assets,"), 13, "");
    EXPECT_THROW(parse(header), SchemaMismatch);
}

TEST(LoadCsv, UnknownColumnIsSchemaMismatch) {
    std::string header = kHeader;
    header.insert(header.size() - 1, ",extra");
    EXPECT_THROW(parse(header), SchemaMismatch);
}

TEST(LoadCsv, BadNumberIsParseError) {
    try {
        parse(kHeader + "F1,2014,C27,normal,50,abc,10,100,20,400,30,2000,1.8,0.4,12,800000,0\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 1u);
        EXPECT_EQ(e.column(), "total_assets");
    }
}

TEST(LoadCsv, MissingFileIsDataError) { EXPECT_THROW(load_csv("/nonexistent/panel.csv"), DataError); }

TEST(LoadCsv, QuotedFieldsRoundTrip) {
    auto r = fixtures::raw_record("F,1", 2015);
    r.status = "say \"hi\"";
    std::ostringstream out;
    write_csv(out, {r});
    EXPECT_EQ(parse(out.str()), std::vector<FirmYearRecord>{r});
}

TEST(FilterSample, StarStRemovedByStatus) {
    auto r = fixtures::raw_record("F1", 2015);
    r.status = "*ST";
    const auto res = filter_sample({r});
    EXPECT_TRUE(res.records.empty());
    EXPECT_EQ(res.log.removed.at(FilterReason::Status), 1u);
}

TEST(FilterSample, FinancialIndustryRemoved) {
    const auto res = filter_sample({fixtures::raw_record("F1", 2015, "J66")});
    EXPECT_TRUE(res.records.empty());
    EXPECT_EQ(res.log.removed.at(FilterReason::Industry), 1u);
}

TEST(FilterSample, CompleteNormalRecordRetained) {
    const auto res = filter_sample({fixtures::raw_record("F1", 2015, "C27")});
    EXPECT_EQ(res.records.size(), 1u);
    EXPECT_EQ(res.log.total_removed(), 0u);
}

TEST(FilterSample, YearRangeAndMissing) {
    auto missing = fixtures::raw_record("F2", 2015);
    missing.ncps.reset();
    auto nonpositive_pay = fixtures::raw_record("F3", 2015);
    nonpositive_pay.top3_comp_avg = 0.0;
    const auto res = filter_sample({fixtures::raw_record("F1", 2009), missing, nonpositive_pay});
    EXPECT_TRUE(res.records.empty());
    EXPECT_EQ(res.log.removed.at(FilterReason::YearRange), 1u);
    EXPECT_EQ(res.log.removed.at(FilterReason::Missing), 2u);
}

TEST(FilterSample, InvalidConfig) {
    IngestConfig cfg;
    cfg.year_min = 2020;
    cfg.year_max = 2010;
    EXPECT_THROW(filter_sample({}, cfg), InvalidArgument);
}

TEST(FilterSample, IdempotentAndConservesCounts) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> pick(0, 9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<FirmYearRecord> records;
        for (int i = 0; i < 40; ++i) {
            auto r = fixtures::raw_record("F" + std::to_string(i), 2005 + pick(rng) * 2);
            switch (pick(rng)) {
                case 0: r.status = "ST"; break;
                case 1: r.industry = "J67"; break;
                case 2: r.rd_invest.reset(); break;
                case 3: r.industry.clear(); break;
                default: break;
            }
            records.push_back(r);
        }
        const auto once = filter_sample(records);
        EXPECT_EQ(records.size(), once.records.size() + once.log.total_removed());
        const auto twice = filter_sample(once.records);
        EXPECT_EQ(twice.records, once.records);
        EXPECT_EQ(twice.log.total_removed(), 0u);
    }
}

TEST(FilterLog, CsvLayout) {
    FilterLog log;
    log.removed[FilterReason::Status] = 4;
    EXPECT_EQ(log.to_csv(), "reason,count\nstatus,4\nindustry,0\nyear_range,0\nmissing,0\n");
}

TEST(ConstructVariables, DirectRatios) {
    auto prior = fixtures::raw_record("F1", 2014);
    auto r = fixtures::raw_record("F1", 2015);
    r.exec_shares = 0.0;
    const auto res = construct_variables({prior, r});
    ASSERT_EQ(res.dataset.size(), 1u);
    const auto& d = res.dataset.records()[0].vars;
    EXPECT_DOUBLE_EQ(d[Var::INV], 0.05);
    EXPECT_EQ(d[Var::HOLD], 0.0);
    EXPECT_DOUBLE_EQ(d[Var::AC1], 20.0 / 400.0);
    EXPECT_DOUBLE_EQ(d[Var::AC2], 0.03);
    EXPECT_EQ(d[Var::AGE], 15.0);
    EXPECT_EQ(d[Var::SIZE], std::log(1000.0));
    EXPECT_EQ(d[Var::LOSS], 0.0);
    EXPECT_EQ(d[Var::P], std::log(800000.0));
}

TEST(ConstructVariables, GrowthFromPriorYear) {
    auto y2014 = fixtures::raw_record("F1", 2014);
    y2014.main_revenue = 100.0;
    auto y2015 = fixtures::raw_record("F1", 2015);
    y2015.main_revenue = 120.0;
    const auto res = construct_variables({y2015, y2014});
    ASSERT_EQ(res.dataset.size(), 1u);
    EXPECT_EQ(res.dataset.records()[0].raw.year, 2015);
    EXPECT_NEAR(res.dataset.records()[0].vars[Var::GROWTH], 0.20, 1e-15);
    ASSERT_EQ(res.log.dropped.size(), 1u);
    EXPECT_EQ(res.log.dropped[0], (DroppedRecord{"F1", 2014, DropReason::GrowthUndefined, "main_revenue"}));
}

TEST(ConstructVariables, GapYearLeavesGrowthUndefined) {
    const auto res = construct_variables({fixtures::raw_record("F1", 2014), fixtures::raw_record("F1", 2016)});
    EXPECT_TRUE(res.dataset.empty());
    EXPECT_EQ(res.log.count(DropReason::GrowthUndefined), 2u);
}

TEST(ConstructVariables, ZeroDenominatorLoggedNotFatal) {
    auto bad = fixtures::raw_record("F1", 2015);
    bad.total_shares = 0.0;
    const auto res = construct_variables({fixtures::raw_record("F1", 2014), bad, fixtures::raw_record("F1", 2016)});
    ASSERT_EQ(res.dataset.size(), 1u);
    EXPECT_EQ(res.dataset.records()[0].raw.year, 2016);  // prior revenue still usable
    ASSERT_EQ(res.log.count(DropReason::DenominatorZero), 1u);
    const auto it = std::find_if(res.log.dropped.begin(), res.log.dropped.end(),
                                 [](const auto& d) { return d.reason == DropReason::DenominatorZero; });
    EXPECT_EQ(it->field, "total_shares");
    EXPECT_EQ(it->year, 2015);
}

TEST(ConstructVariables, LossAndInvalidValues) {
    auto loss = fixtures::raw_record("F1", 2015);
    loss.net_income = -1.0;
    auto too_many = fixtures::raw_record("F2", 2015);
    too_many.exec_shares = 101.0;
    auto future = fixtures::raw_record("F3", 2015);
    future.establish_year = 2016;
    const auto res = construct_variables({fixtures::raw_record("F1", 2014), loss, fixtures::raw_record("F2", 2014),
                                          too_many, fixtures::raw_record("F3", 2014), future});
    ASSERT_EQ(res.dataset.size(), 1u);
    EXPECT_EQ(res.dataset.records()[0].vars[Var::LOSS], 1.0);
    EXPECT_EQ(res.log.count(DropReason::InvalidValue), 2u);
}

TEST(ConstructVariables, NeverEmitsNonFinite) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<FirmYearRecord> records;
    for (int f = 0; f < 30; ++f) {
        for (int y = 2010; y < 2016; ++y) {
            auto r = fixtures::raw_record("F" + std::to_string(f), y);
            r.total_assets = u(rng) > -0.8 ? 1000.0 * (1.0 + u(rng)) : 0.0;
            r.main_revenue = 300.0 * u(rng);
            r.mgmt_expense = 1e300 * u(rng);
            r.top3_comp_avg = 1e5 * u(rng);
            records.push_back(r);
        }
    }
    const auto res = construct_variables(records);
    for (const auto& obs : res.dataset.records()) {
        for (auto v : kAllVars) EXPECT_TRUE(std::isfinite(obs.vars[v]));
    }
    EXPECT_EQ(res.dataset.size() + res.log.dropped.size(), records.size());
}
