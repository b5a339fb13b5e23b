#pragma once

#include <random>
#include <string>
#include <vector>

#include "panelmed/ingest.hpp"
#include "panelmed/panel.hpp"
#include "panelmed/synth.hpp"

namespace fixtures {

// A raw record with every field present and valid.
inline panelmed::FirmYearRecord raw_record(std::string firm, int year, std::string industry = "C27") {
    panelmed::FirmYearRecord r;
    r.firm_id = std::move(firm);
    r.year = year;
    r.industry = std::move(industry);
    r.status = "normal";
    r.rd_invest = 50.0;
    r.total_assets = 1000.0;
    r.exec_shares = 10.0;
    r.total_shares = 100.0;
    r.mgmt_expense = 20.0;
    r.main_revenue = 400.0;
    r.other_receivables = 30.0;
    r.establish_year = 2000;
    r.tobin_q = 1.8;
    r.ncps = 0.4;
    r.net_income = 12.0;
    r.top3_comp_avg = 800000.0;
    r.dual_flag = 0;
    return r;
}

// An observation whose derived variables are set directly; raw fields carry
// only the key, industry and year.
inline panelmed::Observation observation(std::string firm, int year, std::string industry,
                                         const panelmed::DerivedVars& vars = {}) {
    panelmed::Observation o;
    o.raw.firm_id = std::move(firm);
    o.raw.year = year;
    o.raw.industry = std::move(industry);
    o.vars = vars;
    return o;
}

// Random panel with independent standard-normal variables.
inline panelmed::PanelDataset random_panel(std::uint64_t seed, std::size_t firms, int years,
                                           std::size_t industries) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<panelmed::Observation> obs;
    for (std::size_t f = 0; f < firms; ++f) {
        const std::string industry = "I" + std::to_string(f % industries);
        for (int y = 0; y < years; ++y) {
            panelmed::DerivedVars d;
            for (auto v : panelmed::kAllVars) d[v] = n01(rng);
            obs.push_back(observation("F" + std::to_string(1000 + f), 2010 + y, industry, d));
        }
    }
    return panelmed::PanelDataset(std::move(obs));
}

inline panelmed::DgpParams small_dgp(std::uint64_t seed, std::size_t firms = 300) {
    panelmed::DgpParams p;
    p.n_firms = firms;
    p.seed = seed;
    return p;
}

}  // namespace fixtures
