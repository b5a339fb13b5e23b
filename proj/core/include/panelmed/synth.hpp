#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "panelmed/ingest.hpp"
#include "panelmed/panel.hpp"

namespace panelmed {

/// Control effects in the order AGE, SIZE, TQ, NCPS, GROWTH, LOSS, P, DUAL.
struct EquationEffects {
    double intercept = 0.0;
    std::array<double, 8> controls{};
};

inline constexpr std::array<Var, 8> kControlVars = {Var::AGE,    Var::SIZE, Var::TQ, Var::NCPS,
                                                    Var::GROWTH, Var::LOSS, Var::P,  Var::DUAL};

/// Parameters of the synthetic data-generating process:
///   AC1 = ac1.intercept + a1 HOLD + ac1.controls . C + FE + e1
///   AC2 = ac2.intercept + a2 HOLD + ac2.controls . C + FE + e2   (floored at 0)
///   INV = inv.intercept + direct HOLD + b1 AC1 + b2 AC2 + inv.controls . C + FE + e0
///         (floored at 0)
/// Year and industry effects are N(0, fe_scale) per equation.
struct DgpParams {
    std::size_t n_firms = 2000;
    int year_min = 2012;
    int year_max = 2021;
    std::size_t n_industries = 20;

    double direct_effect = 0.004;
    double a1 = -0.04;
    double b1 = -0.025;
    double a2 = 0.0015;
    double b2 = -0.035;

    EquationEffects inv{-0.01,
                        {-0.000185, -0.00136, 0.00236, -0.000362, 0.000582, 0.00110, 0.00581, 0.000215}};
    EquationEffects ac1{0.399,
                        {0.000567, -0.0216, 0.0105, -0.00165, -0.0306, -0.0595, 0.0183, 0.00634}};
    EquationEffects ac2{0.0508,
                        {0.000280, 0.000831, 0.000332, -0.000483, -0.000422, -0.00832, -0.00196, -0.000300}};

    double fe_scale = 0.003;
    double noise_inv = 0.006;
    double noise_ac1 = 0.04;
    double noise_ac2 = 0.006;

    double hold_persistence = 0.8;  // AR(1) coefficient of the latent HOLD driver
    double zero_hold_share = 0.15;  // firms whose executives hold no shares
    std::uint64_t seed = 1;

    /// Throws InvalidArgument.
    void check() const;

    /// `key = value` lines; parse_config(to_config()) reproduces the params.
    std::string to_config() const;
    static DgpParams parse_config(std::istream& in);
    static DgpParams load_config(const std::filesystem::path& path);
};

inline constexpr double kHoldMax = 0.891;

struct SynthPanel {
    /// Every generated firm-year, including the pre-sample year per firm that
    /// only serves as the GROWTH base. Sorted by (firm_id, year).
    std::vector<FirmYearRecord> raw;
    /// construct_variables(raw).dataset
    PanelDataset dataset;
    /// Drawn variables, row-aligned with dataset.records().
    std::vector<DerivedVars> drawn;
    DgpParams truth;
    std::size_t floored_inv = 0;
    std::size_t floored_ac2 = 0;
};

/// Deterministic in `params` (seed included). Firm i draws only from its own
/// substream seeded by (seed, i), so output is independent of `threads`.
SynthPanel generate_panel(const DgpParams& params, unsigned threads = 1);

/// Writes the ingest schema. Throws Error on I/O failure.
void emit_csv(const std::filesystem::path& path, const std::vector<FirmYearRecord>& records);
void emit_csv(const std::filesystem::path& path, const PanelDataset& dataset);

}  // namespace panelmed
