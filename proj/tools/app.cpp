#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "panelmed/error.hpp"
#include "panelmed/ingest.hpp"
#include "panelmed/mediation.hpp"
#include "panelmed/prep.hpp"
#include "panelmed/regress.hpp"
#include "panelmed/report.hpp"
#include "panelmed/robustness.hpp"
#include "panelmed/synth.hpp"

namespace panelmed::cli {

namespace {

namespace fs = std::filesystem;

enum class Format { Text, Csv, Json };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Settings {
    std::string input;
    std::string output;
    std::string config;
    std::string model;
    std::vector<std::string> vars;
    double winsor_lower = 0.01;
    double winsor_upper = 0.99;
    bool no_winsor = false;
    std::string format = "text";
    std::string stars = "0.01,0.05,0.1";
    std::optional<std::uint64_t> seed;
    std::string cluster;
    bool filter_log = false;
    unsigned threads = 1;
};

const std::vector<std::string> kDefaultVars = {"INV", "HOLD", "AC1", "AC2", "AGE", "SIZE",
                                               "TQ",  "NCPS", "GROWTH", "LOSS", "P", "DUAL"};

Format parse_format(const std::string& s) {
    if (s == "text") return Format::Text;
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw UsageError("--format must be text, csv or json");
}

std::string extension(Format f) {
    switch (f) {
        case Format::Text: return ".txt";
        case Format::Csv: return ".csv";
        case Format::Json: return ".json";
    }
    return ".txt";
}

StarThresholds parse_stars(const std::string& text) {
    std::vector<double> levels;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            levels.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--stars expects three comma-separated probabilities");
        }
    }
    if (levels.size() != 3 || !(0.0 < levels[0] && levels[0] < levels[1] && levels[1] < levels[2] && levels[2] <= 1.0)) {
        throw UsageError("--stars expects three increasing probabilities in (0, 1]");
    }
    return {levels[0], levels[1], levels[2]};
}

struct Context {
    Settings s;
    Format format = Format::Text;
    StarThresholds stars;
    BatteryOptions battery;
};

Context make_context(const Settings& s) {
    Context ctx;
    ctx.s = s;
    ctx.format = parse_format(s.format);
    ctx.stars = parse_stars(s.stars);
    ctx.battery.ols.stars = ctx.stars;
    ctx.battery.threads = std::max(1u, s.threads);
    if (s.cluster == "firm") {
        ctx.battery.ols.covariance = CovarianceType::ClusteredFirm;
    } else if (!s.cluster.empty()) {
        throw UsageError("--cluster accepts only 'firm'");
    }
    if (!s.no_winsor && !(0.0 <= s.winsor_lower && s.winsor_lower < s.winsor_upper && s.winsor_upper <= 1.0)) {
        throw UsageError("--winsor-lower/--winsor-upper must satisfy 0 <= lower < upper <= 1");
    }
    return ctx;
}

struct Loaded {
    PanelDataset dataset;
    FilterLog filter_log;
    ConstructLog construct_log;
};

Loaded load(const Context& ctx, std::ostream& err) {
    if (ctx.s.input.empty()) throw UsageError("--input is required");
    Loaded l;
    auto filtered = filter_sample(load_csv(ctx.s.input));
    l.filter_log = filtered.log;
    auto built = construct_variables(std::move(filtered.records));
    l.construct_log = std::move(built.log);
    l.dataset = std::move(built.dataset);
    if (!ctx.s.no_winsor) {
        WinsorSpec spec;
        spec.lower_q = ctx.s.winsor_lower;
        spec.upper_q = ctx.s.winsor_upper;
        l.dataset = winsorize(l.dataset, spec);
    }
    if (ctx.s.filter_log) err << l.filter_log.to_text() << l.construct_log.to_text();
    return l;
}

std::string render_describe(const Context& ctx, const std::vector<DescriptiveRow>& rows) {
    switch (ctx.format) {
        case Format::Text: return report::describe_text(rows);
        case Format::Csv: return report::describe_csv(rows);
        case Format::Json: {
            nlohmann::json j = nlohmann::json::array();
            for (const auto& r : rows) j.push_back(report::to_json(r));
            return j.dump(2) + "\n";
        }
    }
    return {};
}

std::string render_correlation(const Context& ctx, const CorrelationMatrix& m) {
    switch (ctx.format) {
        case Format::Text: return report::correlation_text(m, ctx.stars);
        case Format::Csv: return report::correlation_csv(m);
        case Format::Json: return report::to_json(m).dump(2) + "\n";
    }
    return {};
}

std::string render_fit(const Context& ctx, const FitResult& fit) {
    switch (ctx.format) {
        case Format::Text: return report::regression_table({fit});
        case Format::Csv: return report::fit_csv(fit);
        case Format::Json: return report::to_json(fit).dump(2) + "\n";
    }
    return {};
}

std::string render_mediation(const Context& ctx, const MediationReport& r) {
    switch (ctx.format) {
        case Format::Text: return report::mediation_text(r);
        case Format::Csv: return report::mediation_csv(r);
        case Format::Json: return report::to_json(r).dump(2) + "\n";
    }
    return {};
}

std::string render_robustness(const Context& ctx, const RobustnessReport& r) {
    switch (ctx.format) {
        case Format::Text: return report::robustness_text(r);
        case Format::Csv: return report::fits_csv({r.fits.begin(), r.fits.end()});
        case Format::Json: return report::to_json(r).dump(2) + "\n";
    }
    return {};
}

std::string render_filter_log(const Context& ctx, const Loaded& l) {
    switch (ctx.format) {
        case Format::Text: return l.filter_log.to_text() + l.construct_log.to_text();
        case Format::Csv: return l.filter_log.to_csv();
        case Format::Json:
            return nlohmann::json{{"filter", report::to_json(l.filter_log)},
                                  {"construct", report::to_json(l.construct_log)}}
                       .dump(2) +
                   "\n";
    }
    return {};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
    f.close();
    if (!f) throw Error("cannot write " + path.string());
}

int cmd_describe(const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto l = load(ctx, err);
    out << render_describe(ctx, describe(l.dataset, ctx.s.vars.empty() ? kDefaultVars : ctx.s.vars));
    return kOk;
}

int cmd_correlate(const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto l = load(ctx, err);
    out << render_correlation(ctx, correlate(l.dataset, ctx.s.vars.empty() ? kDefaultVars : ctx.s.vars));
    return kOk;
}

int cmd_fit(const Context& ctx, std::ostream& out, std::ostream& err) {
    if (ctx.s.model.empty()) throw UsageError("--model is required");
    ModelSpec spec;
    try {
        spec = parse_model(ctx.s.model);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const auto l = load(ctx, err);
    out << render_fit(ctx, fit_model(l.dataset, spec, ctx.battery.ols));
    return kOk;
}

int cmd_mediate(const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto l = load(ctx, err);
    out << render_mediation(ctx, run_battery(l.dataset, {}, ctx.battery));
    return kOk;
}

int cmd_robust(const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto l = load(ctx, err);
    out << render_robustness(ctx, run_robustness(l.dataset, {}, ctx.battery));
    return kOk;
}

int cmd_synth(const Context& ctx, std::ostream& out) {
    if (ctx.s.output.empty()) throw UsageError("--out is required");
    DgpParams params = ctx.s.config.empty() ? DgpParams{} : DgpParams::load_config(ctx.s.config);
    if (ctx.s.seed) params.seed = *ctx.s.seed;
    const auto panel = generate_panel(params, ctx.battery.threads);
    emit_csv(ctx.s.output, panel.raw);
    write_file(ctx.s.output + ".params", params.to_config());
    out << fmt::format("wrote {} firm-years ({} analysis rows) to {}\n", panel.raw.size(), panel.dataset.size(),
                       ctx.s.output);
    return kOk;
}

int cmd_run(const Context& ctx, std::ostream& out, std::ostream& err) {
    if (ctx.s.output.empty()) throw UsageError("--out is required");
    const fs::path dir(ctx.s.output);
    fs::create_directories(dir);
    const auto ext = extension(ctx.format);
    const auto l = load(ctx, err);
    write_file(dir / ("filter_log" + ext), render_filter_log(ctx, l));
    const auto& vars = ctx.s.vars.empty() ? kDefaultVars : ctx.s.vars;
    write_file(dir / ("describe" + ext), render_describe(ctx, describe(l.dataset, vars)));
    write_file(dir / ("correlate" + ext), render_correlation(ctx, correlate(l.dataset, vars)));
    const auto mediation = run_battery(l.dataset, {}, ctx.battery);
    write_file(dir / ("mediate" + ext), render_mediation(ctx, mediation));
    write_file(dir / ("robust" + ext), render_robustness(ctx, run_robustness(l.dataset, {}, ctx.battery)));
    out << fmt::format("analysed {} firm-years; reports in {}\n", l.dataset.size(), dir.string());
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Panel regression and mediation analysis of executive shareholding and R&D investment",
                 "panelmed"};
    app.require_subcommand(1);
    app.fallthrough();

    Settings s;
    std::uint64_t seed = 0;
    app.add_option("--winsor-lower", s.winsor_lower, "Lower winsorization quantile")->capture_default_str();
    app.add_option("--winsor-upper", s.winsor_upper, "Upper winsorization quantile")->capture_default_str();
    app.add_flag("--no-winsor", s.no_winsor, "Skip winsorization");
    app.add_option("--format", s.format, "Output format: text, csv or json")->capture_default_str();
    app.add_option("--stars", s.stars, "Significance levels for ***, **, *")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (synth)");
    app.add_option("--cluster", s.cluster, "Clustered standard errors: firm");
    app.add_flag("--filter-log", s.filter_log, "Print sample-screening counts to stderr");
    app.add_option("--threads", s.threads, "Worker threads")->capture_default_str();

    auto* describe_cmd = app.add_subcommand("describe", "Descriptive statistics");
    auto* correlate_cmd = app.add_subcommand("correlate", "Pearson correlation matrix");
    auto* fit_cmd = app.add_subcommand("fit", "Fit one model");
    auto* mediate_cmd = app.add_subcommand("mediate", "Five-model mediation battery");
    auto* robust_cmd = app.add_subcommand("robust", "One-period-lead robustness rerun");
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic panel");
    auto* run_cmd = app.add_subcommand("run", "Full pipeline with every report");

    for (auto* cmd : {describe_cmd, correlate_cmd, fit_cmd, mediate_cmd, robust_cmd, run_cmd}) {
        cmd->add_option("--input", s.input, "Firm-year CSV")->required();
    }
    for (auto* cmd : {describe_cmd, correlate_cmd, run_cmd}) {
        cmd->add_option("--vars", s.vars, "Variables to report, comma-separated")->delimiter(',');
    }
    fit_cmd->add_option("--model", s.model, "Model, e.g. \"INV ~ HOLD + AGE | year + industry\"")->required();
    synth_cmd->add_option("--config", s.config, "key = value parameter file");
    synth_cmd->add_option("--out", s.output, "Output CSV")->required();
    run_cmd->add_option("--out", s.output, "Report directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }
    if (seed_opt->count() > 0) s.seed = seed;

    try {
        const Context ctx = make_context(s);
        if (*describe_cmd) return cmd_describe(ctx, out, err);
        if (*correlate_cmd) return cmd_correlate(ctx, out, err);
        if (*fit_cmd) return cmd_fit(ctx, out, err);
        if (*mediate_cmd) return cmd_mediate(ctx, out, err);
        if (*robust_cmd) return cmd_robust(ctx, out, err);
        if (*synth_cmd) return cmd_synth(ctx, out);
        if (*run_cmd) return cmd_run(ctx, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const UnknownVariable& e) {
        err << "UnknownVariable: " << e.name() << "\n";
        return kDataError;
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    }
    err << "usage error: no subcommand\n";
    return kUsage;
}

}  // namespace panelmed::cli
