#include "panelmed/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "panelmed/error.hpp"

namespace panelmed {

namespace {

constexpr std::array<std::string_view, 30> kIndustryCodes = {
    "C13", "C14", "C15", "C17", "C18", "C22", "C26", "C27", "C29", "C30",
    "C31", "C33", "C34", "C35", "C36", "C38", "C39", "C40", "A01", "B06",
    "D44", "E48", "F51", "G54", "I63", "I65", "K70", "L72", "M73", "R86"};

constexpr std::uint32_t kFixedEffectStream = 0xFFFFFFFFu;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      stream, 0x9E3779B9u};
    return std::mt19937_64(seq);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct FixedEffects {
    // [equation][level]; equations are INV, AC1, AC2
    std::array<std::vector<double>, 3> year;
    std::array<std::vector<double>, 3> industry;
};

FixedEffects draw_fixed_effects(const DgpParams& p) {
    auto rng = make_stream(p.seed, kFixedEffectStream);
    std::normal_distribution<double> n01(0.0, 1.0);
    FixedEffects fe;
    const auto n_years = static_cast<std::size_t>(p.year_max - p.year_min + 2);
    for (std::size_t eq = 0; eq < 3; ++eq) {
        for (std::size_t y = 0; y < n_years; ++y) fe.year[eq].push_back(p.fe_scale * n01(rng));
        for (std::size_t k = 0; k < p.n_industries; ++k) fe.industry[eq].push_back(p.fe_scale * n01(rng));
    }
    return fe;
}

struct FirmOutput {
    std::vector<FirmYearRecord> raw;
    std::vector<DerivedVars> drawn;  // excludes the pre-sample year
    std::size_t floored_inv = 0;
    std::size_t floored_ac2 = 0;
};

double linear(const EquationEffects& eq, const DerivedVars& d) {
    double sum = eq.intercept;
    for (std::size_t c = 0; c < kControlVars.size(); ++c) sum += eq.controls[c] * d[kControlVars[c]];
    return sum;
}

FirmOutput generate_firm(const DgpParams& p, const FixedEffects& fe, std::size_t firm) {
    auto rng = make_stream(p.seed, static_cast<std::uint32_t>(firm));
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto normal = [&](double mean, double sd) { return mean + sd * n01(rng); };
    auto bernoulli = [&](double prob) { return u01(rng) < prob; };

    FirmOutput out;
    const std::string firm_id = fmt::format("F{:06d}", firm + 1);
    const auto industry = static_cast<std::size_t>(u01(rng) * static_cast<double>(p.n_industries));
    const int first_year = p.year_min - 1;
    const int establish_year = first_year - static_cast<int>(u01(rng) * 26.0);
    const double size_mean = normal(22.0, 1.0);
    const double total_shares = std::round(std::exp(normal(19.5, 0.8)));
    const int dual = bernoulli(0.25) ? 1 : 0;
    const bool no_holding = bernoulli(p.zero_hold_share);
    const double pay_mean = normal(14.0, 0.6);
    const double revenue_ratio = 0.3 + 0.9 * u01(rng);
    double z = n01(rng);
    double revenue = 0.0;
    const double rho = p.hold_persistence;

    for (int year = first_year; year <= p.year_max; ++year) {
        if (year > first_year) z = rho * z + std::sqrt(1.0 - rho * rho) * n01(rng);
        DerivedVars d;
        d[Var::HOLD] = no_holding ? 0.0 : kHoldMax * std::pow(normal_cdf(z), 5.0);
        d[Var::SIZE] = size_mean + 0.1 * n01(rng);
        d[Var::TQ] = std::exp(normal(0.6, 0.4));
        d[Var::NCPS] = normal(0.3, 1.0);
        d[Var::GROWTH] = std::clamp(normal(0.15, 0.25), -0.5, 2.0);
        d[Var::LOSS] = bernoulli(0.1) ? 1.0 : 0.0;
        d[Var::P] = pay_mean + 0.2 * n01(rng);
        d[Var::DUAL] = dual;
        d[Var::AGE] = year - establish_year;
        const double profit_margin = 0.01 + 0.09 * u01(rng);
        const double e_inv = n01(rng), e_ac1 = n01(rng), e_ac2 = n01(rng);

        const auto yi = static_cast<std::size_t>(year - first_year);
        d[Var::AC1] = linear(p.ac1, d) + p.a1 * d[Var::HOLD] + fe.year[1][yi] + fe.industry[1][industry] +
                      p.noise_ac1 * e_ac1;
        double ac2 = linear(p.ac2, d) + p.a2 * d[Var::HOLD] + fe.year[2][yi] + fe.industry[2][industry] +
                     p.noise_ac2 * e_ac2;
        double inv = linear(p.inv, d) + p.direct_effect * d[Var::HOLD] + p.b1 * d[Var::AC1] +
                     p.b2 * ac2 + fe.year[0][yi] + fe.industry[0][industry] + p.noise_inv * e_inv;
        const bool in_sample = year > first_year;
        if (ac2 < 0.0) {
            ac2 = 0.0;
            out.floored_ac2 += in_sample;
        }
        if (inv < 0.0) {
            inv = 0.0;
            out.floored_inv += in_sample;
        }
        d[Var::AC2] = ac2;
        d[Var::INV] = inv;

        const double total_assets = std::exp(d[Var::SIZE]);
        revenue = year == first_year ? total_assets * revenue_ratio : revenue * (1.0 + d[Var::GROWTH]);

        FirmYearRecord r;
        r.firm_id = firm_id;
        r.year = year;
        r.industry = std::string(kIndustryCodes[industry]);
        r.status = "normal";
        r.rd_invest = d[Var::INV] * total_assets;
        r.total_assets = total_assets;
        r.exec_shares = d[Var::HOLD] * total_shares;
        r.total_shares = total_shares;
        r.mgmt_expense = d[Var::AC1] * revenue;
        r.main_revenue = revenue;
        r.other_receivables = d[Var::AC2] * total_assets;
        r.establish_year = establish_year;
        r.tobin_q = d[Var::TQ];
        r.ncps = d[Var::NCPS];
        r.net_income = (d[Var::LOSS] > 0.0 ? -1.0 : 1.0) * profit_margin * revenue;
        r.top3_comp_avg = std::exp(d[Var::P]);
        r.dual_flag = dual;
        out.raw.push_back(std::move(r));
        if (in_sample) out.drawn.push_back(d);
    }
    return out;
}

double parse_double(const std::string& key, std::string_view text) {
    double v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidArgument(fmt::format("config key {}: '{}' is not a number", key, text));
    }
    return v;
}

template <class Int>
Int parse_integer(const std::string& key, std::string_view text) {
    Int v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidArgument(fmt::format("config key {}: '{}' is not an integer", key, text));
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

void DgpParams::check() const {
    if (n_firms < 2) throw InvalidArgument("n_firms must be at least 2");
    if (year_max - year_min < 1) throw InvalidArgument("years must span at least 2");
    if (n_industries < 1 || n_industries > kIndustryCodes.size()) {
        throw InvalidArgument(fmt::format("n_industries must be in [1, {}]", kIndustryCodes.size()));
    }
    if (fe_scale < 0.0 || noise_inv < 0.0 || noise_ac1 < 0.0 || noise_ac2 < 0.0) {
        throw InvalidArgument("dispersions must be non-negative");
    }
    if (!(hold_persistence >= 0.0 && hold_persistence < 1.0)) {
        throw InvalidArgument("hold_persistence must be in [0, 1)");
    }
    if (!(zero_hold_share >= 0.0 && zero_hold_share <= 1.0)) {
        throw InvalidArgument("zero_hold_share must be in [0, 1]");
    }
}

namespace {

struct ConfigBinding {
    std::function<std::string(const DgpParams&)> dump;
    std::function<void(DgpParams&, const std::string&, std::string_view)> load;
};

std::vector<std::pair<std::string, ConfigBinding>> config_bindings() {
    std::vector<std::pair<std::string, ConfigBinding>> b;
    auto real = [&](std::string key, double DgpParams::*field) {
        b.emplace_back(key, ConfigBinding{[field](const DgpParams& p) { return fmt::format("{}", p.*field); },
                                          [field](DgpParams& p, const std::string& k, std::string_view v) {
                                              p.*field = parse_double(k, v);
                                          }});
    };
    b.emplace_back("n_firms", ConfigBinding{[](const DgpParams& p) { return fmt::format("{}", p.n_firms); },
                                            [](DgpParams& p, const std::string& k, std::string_view v) {
                                                p.n_firms = parse_integer<std::size_t>(k, v);
                                            }});
    b.emplace_back("year_min", ConfigBinding{[](const DgpParams& p) { return fmt::format("{}", p.year_min); },
                                             [](DgpParams& p, const std::string& k, std::string_view v) {
                                                 p.year_min = parse_integer<int>(k, v);
                                             }});
    b.emplace_back("year_max", ConfigBinding{[](const DgpParams& p) { return fmt::format("{}", p.year_max); },
                                             [](DgpParams& p, const std::string& k, std::string_view v) {
                                                 p.year_max = parse_integer<int>(k, v);
                                             }});
    b.emplace_back("n_industries",
                   ConfigBinding{[](const DgpParams& p) { return fmt::format("{}", p.n_industries); },
                                 [](DgpParams& p, const std::string& k, std::string_view v) {
                                     p.n_industries = parse_integer<std::size_t>(k, v);
                                 }});
    real("direct_effect", &DgpParams::direct_effect);
    real("a1", &DgpParams::a1);
    real("b1", &DgpParams::b1);
    real("a2", &DgpParams::a2);
    real("b2", &DgpParams::b2);
    real("fe_scale", &DgpParams::fe_scale);
    real("noise_inv", &DgpParams::noise_inv);
    real("noise_ac1", &DgpParams::noise_ac1);
    real("noise_ac2", &DgpParams::noise_ac2);
    real("hold_persistence", &DgpParams::hold_persistence);
    real("zero_hold_share", &DgpParams::zero_hold_share);
    b.emplace_back("seed", ConfigBinding{[](const DgpParams& p) { return fmt::format("{}", p.seed); },
                                         [](DgpParams& p, const std::string& k, std::string_view v) {
                                             p.seed = parse_integer<std::uint64_t>(k, v);
                                         }});
    const std::array<std::pair<const char*, EquationEffects DgpParams::*>, 3> equations = {
        {{"inv", &DgpParams::inv}, {"ac1", &DgpParams::ac1}, {"ac2", &DgpParams::ac2}}};
    for (const auto& [prefix, eq] : equations) {
        b.emplace_back(fmt::format("{}.intercept", prefix),
                       ConfigBinding{[eq = eq](const DgpParams& p) { return fmt::format("{}", (p.*eq).intercept); },
                                     [eq = eq](DgpParams& p, const std::string& k, std::string_view v) {
                                         (p.*eq).intercept = parse_double(k, v);
                                     }});
        for (std::size_t c = 0; c < kControlVars.size(); ++c) {
            b.emplace_back(fmt::format("{}.{}", prefix, var_name(kControlVars[c])),
                           ConfigBinding{[eq = eq, c](const DgpParams& p) { return fmt::format("{}", (p.*eq).controls[c]); },
                                         [eq = eq, c](DgpParams& p, const std::string& k, std::string_view v) {
                                             (p.*eq).controls[c] = parse_double(k, v);
                                         }});
        }
    }
    return b;
}

}  // namespace

std::string DgpParams::to_config() const {
    std::string out;
    for (const auto& [key, binding] : config_bindings()) out += fmt::format("{} = {}\n", key, binding.dump(*this));
    return out;
}

DgpParams DgpParams::parse_config(std::istream& in) {
    const auto bindings = config_bindings();
    DgpParams p;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidArgument(fmt::format("config line {}: expected key = value", line_no));
        }
        const std::string key(trim(view.substr(0, eq)));
        const auto value = trim(view.substr(eq + 1));
        auto it = std::find_if(bindings.begin(), bindings.end(), [&](const auto& b) { return b.first == key; });
        if (it == bindings.end()) throw InvalidArgument(fmt::format("config line {}: unknown key {}", line_no, key));
        it->second.load(p, key, value);
    }
    p.check();
    return p;
}

DgpParams DgpParams::load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_config(in);
}

SynthPanel generate_panel(const DgpParams& params, unsigned threads) {
    params.check();
    const FixedEffects fe = draw_fixed_effects(params);
    std::vector<FirmOutput> firms(params.n_firms);

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(params.n_firms)));
    auto work = [&](unsigned w) {
        for (std::size_t f = w; f < params.n_firms; f += workers) firms[f] = generate_firm(params, fe, f);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    SynthPanel panel;
    panel.truth = params;
    for (auto& f : firms) {
        panel.raw.insert(panel.raw.end(), std::make_move_iterator(f.raw.begin()),
                         std::make_move_iterator(f.raw.end()));
        panel.drawn.insert(panel.drawn.end(), f.drawn.begin(), f.drawn.end());
        panel.floored_inv += f.floored_inv;
        panel.floored_ac2 += f.floored_ac2;
    }
    auto built = construct_variables(panel.raw);
    if (built.dataset.size() != panel.drawn.size()) {
        throw NumericalError(fmt::format("synthetic panel lost {} records in construction",
                                         panel.drawn.size() - built.dataset.size()));
    }
    panel.dataset = std::move(built.dataset);
    return panel;
}

void emit_csv(const std::filesystem::path& path, const std::vector<FirmYearRecord>& records) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_csv(out, records);
    out.close();
    if (!out) throw Error("write failed for " + path.string());
}

void emit_csv(const std::filesystem::path& path, const PanelDataset& dataset) {
    std::vector<FirmYearRecord> records;
    records.reserve(dataset.size());
    for (const auto& obs : dataset.records()) records.push_back(obs.raw);
    emit_csv(path, records);
}

}  // namespace panelmed
