#include "panelmed/regress.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "panelmed/distributions.hpp"
#include "panelmed/error.hpp"

namespace panelmed {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_terms(std::string_view s, std::string_view what) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find('+', start);
        const auto term = trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (term.empty()) throw InvalidArgument(fmt::format("empty {} term in model formula", what));
        out.emplace_back(term);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool is_constant_column(const Eigen::MatrixXd& X, Eigen::Index j) {
    if (X.rows() == 0) return false;
    const double first = X(0, j);
    return first != 0.0 && (X.col(j).array() == first).all();
}

}  // namespace

std::string_view fixed_effect_name(FixedEffect fe) noexcept {
    return fe == FixedEffect::Year ? "year" : "industry";
}

void ModelSpec::check() const {
    if (dependent.empty()) throw InvalidArgument("model has no dependent variable");
    std::set<std::string> seen;
    for (const auto& r : regressors) {
        if (r == dependent) throw InvalidArgument("dependent variable " + r + " used as regressor");
        if (!seen.insert(r).second) throw InvalidArgument("regressor " + r + " listed twice");
    }
    std::set<FixedEffect> fes(fixed_effects.begin(), fixed_effects.end());
    if (fes.size() != fixed_effects.size()) throw InvalidArgument("fixed effect listed twice");
}

std::string ModelSpec::to_string() const {
    std::vector<std::string> rhs = regressors;
    if (!include_intercept) rhs.emplace_back("0");
    std::string out = fmt::format("{} ~ {}", dependent, rhs.empty() ? "1" : fmt::format("{}", fmt::join(rhs, " + ")));
    if (!fixed_effects.empty()) {
        std::vector<std::string_view> names;
        for (auto fe : fixed_effects) names.push_back(fixed_effect_name(fe));
        out += fmt::format(" | {}", fmt::join(names, " + "));
    }
    return out;
}

ModelSpec parse_model(std::string_view text) {
    const auto tilde = text.find('~');
    if (tilde == std::string_view::npos) throw InvalidArgument("model formula needs '~'");
    ModelSpec spec;
    spec.dependent = std::string(trim(text.substr(0, tilde)));
    if (spec.dependent.empty()) throw InvalidArgument("model formula has no dependent variable");

    std::string_view rhs = text.substr(tilde + 1);
    std::string_view fe_part;
    if (const auto bar = rhs.find('|'); bar != std::string_view::npos) {
        fe_part = rhs.substr(bar + 1);
        rhs = rhs.substr(0, bar);
    }
    // "- 1" is the only subtraction accepted
    std::string rhs_text(rhs);
    if (const auto minus = rhs_text.find('-'); minus != std::string::npos) {
        if (trim(std::string_view(rhs_text).substr(minus + 1)) != "1") {
            throw InvalidArgument("only '- 1' may be subtracted in a model formula");
        }
        spec.include_intercept = false;
        rhs_text.erase(minus);
    }
    for (auto& term : split_terms(rhs_text, "regressor")) {
        if (term == "0") {
            spec.include_intercept = false;
        } else if (term != "1") {
            spec.regressors.push_back(std::move(term));
        }
    }
    for (const auto& fe : split_terms(fe_part, "fixed-effect")) {
        if (fe == "year") {
            spec.fixed_effects.push_back(FixedEffect::Year);
        } else if (fe == "industry") {
            spec.fixed_effects.push_back(FixedEffect::Industry);
        } else {
            throw InvalidArgument("unknown fixed effect '" + fe + "' (expected year or industry)");
        }
    }
    spec.check();
    return spec;
}

Design build_design(const PanelDataset& dataset, const ModelSpec& spec) {
    spec.check();
    if (!dataset.has_variable(spec.dependent)) throw UnknownVariable(spec.dependent);
    for (const auto& r : spec.regressors) {
        if (!dataset.has_variable(r)) throw UnknownVariable(r);
    }
    if (dataset.empty()) throw EmptyDataset();

    const auto n = static_cast<Eigen::Index>(dataset.size());
    const auto& records = dataset.records();

    std::vector<std::string> names;
    if (spec.include_intercept) names.emplace_back(kInterceptTerm);
    names.insert(names.end(), spec.regressors.begin(), spec.regressors.end());

    // Non-baseline levels per fixed effect, with each row's level index.
    struct DummyBlock {
        std::vector<int> row_level;  // -1 = baseline
        std::size_t n_levels = 0;
    };
    std::vector<DummyBlock> blocks;
    for (FixedEffect fe : spec.fixed_effects) {
        DummyBlock block;
        block.row_level.resize(records.size());
        if (fe == FixedEffect::Year) {
            const auto& levels = dataset.year_levels();
            for (std::size_t l = 1; l < levels.size(); ++l) names.push_back(fmt::format("year={}", levels[l]));
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto it = std::lower_bound(levels.begin(), levels.end(), records[i].raw.year);
                block.row_level[i] = static_cast<int>(it - levels.begin()) - 1;
            }
            block.n_levels = levels.size() - 1;
        } else {
            const auto& levels = dataset.industry_levels();
            for (std::size_t l = 1; l < levels.size(); ++l) names.push_back("industry=" + levels[l]);
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto it = std::lower_bound(levels.begin(), levels.end(), records[i].raw.industry);
                block.row_level[i] = static_cast<int>(it - levels.begin()) - 1;
            }
            block.n_levels = levels.size() - 1;
        }
        blocks.push_back(std::move(block));
    }

    Design d;
    d.X.column_names = names;
    d.X.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(names.size()));
    Eigen::Index col = 0;
    if (spec.include_intercept) d.X.values.col(col++).setOnes();
    for (const auto& r : spec.regressors) {
        const auto values = dataset.column(r);
        d.X.values.col(col++) = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
    }
    for (const auto& block : blocks) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const int level = block.row_level[static_cast<std::size_t>(i)];
            if (level >= 0) d.X.values(i, col + level) = 1.0;
        }
        col += static_cast<Eigen::Index>(block.n_levels);
    }
    const auto y = dataset.column(spec.dependent);
    d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    d.firm_ids.reserve(records.size());
    for (const auto& obs : records) d.firm_ids.push_back(obs.raw.firm_id);
    return d;
}

OrthogonalFactorization::OrthogonalFactorization(const Eigen::MatrixXd& X, double rank_tol)
    : n_(X.rows()) {
    const Eigen::Index k = X.cols();
    Eigen::MatrixXd work = X;
    reflectors_ = Eigen::MatrixXd::Zero(n_, std::min(n_, k));
    betas_ = Eigen::VectorXd::Zero(std::min(n_, k));
    std::vector<Eigen::VectorXd> r_cols;
    double max_diag = 0.0;

    for (Eigen::Index j = 0; j < k; ++j) {
        const auto rank = static_cast<Eigen::Index>(retained_.size());
        const double tail_norm = rank < n_ ? work.col(j).tail(n_ - rank).norm() : 0.0;
        if (rank >= n_ || tail_norm <= rank_tol * max_diag || tail_norm == 0.0) {
            dropped_.push_back(j);
            continue;
        }
        // v = x + sign(x0) |x| e0, H = I - beta v v'
        Eigen::VectorXd v = work.col(j).tail(n_ - rank);
        const double alpha = v(0) >= 0.0 ? -tail_norm : tail_norm;
        v(0) -= alpha;
        const double beta = 2.0 / v.squaredNorm();
        if (j + 1 < k) {
            auto rest = work.block(rank, j + 1, n_ - rank, k - j - 1);
            const Eigen::RowVectorXd w = beta * (v.transpose() * rest);
            rest.noalias() -= v * w;
        }
        reflectors_.col(rank).tail(n_ - rank) = v;
        betas_(rank) = beta;

        Eigen::VectorXd rc = Eigen::VectorXd::Zero(rank + 1);
        rc.head(rank) = work.col(j).head(rank);
        rc(rank) = alpha;
        r_cols.push_back(std::move(rc));
        max_diag = std::max(max_diag, std::fabs(alpha));
        retained_.push_back(j);
    }

    const auto rank = static_cast<Eigen::Index>(retained_.size());
    r_ = Eigen::MatrixXd::Zero(rank, rank);
    for (Eigen::Index c = 0; c < rank; ++c) r_.col(c).head(c + 1) = r_cols[static_cast<std::size_t>(c)];
}

Eigen::VectorXd OrthogonalFactorization::apply_qt(Eigen::VectorXd y) const {
    for (Eigen::Index l = 0; l < rank(); ++l) {
        auto tail = y.tail(n_ - l);
        const auto v = reflectors_.col(l).tail(n_ - l);
        tail -= (betas_(l) * v.dot(tail)) * v;
    }
    return y;
}

Eigen::VectorXd OrthogonalFactorization::solve(const Eigen::VectorXd& y) const {
    if (y.size() != n_) throw InvalidArgument("response length does not match design rows");
    const Eigen::VectorXd qty = apply_qt(y);
    return r_.triangularView<Eigen::Upper>().solve(qty.head(rank()));
}

Eigen::MatrixXd OrthogonalFactorization::unscaled_covariance() const {
    const Eigen::MatrixXd r_inv =
        r_.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank(), rank()));
    return r_inv * r_inv.transpose();
}

Eigen::VectorXd OrthogonalFactorization::apply_q(Eigen::VectorXd z) const {
    for (Eigen::Index l = rank() - 1; l >= 0; --l) {
        auto tail = z.tail(n_ - l);
        const auto v = reflectors_.col(l).tail(n_ - l);
        tail -= (betas_(l) * v.dot(tail)) * v;
    }
    return z;
}

Eigen::VectorXd OrthogonalFactorization::residualize(const Eigen::VectorXd& y) const {
    if (y.size() != n_) throw InvalidArgument("response length does not match design rows");
    // Zero the leading rank entries of Q'y, then map back with Q.
    Eigen::VectorXd z = apply_qt(y);
    z.head(rank()).setZero();
    return apply_q(std::move(z));
}

namespace {

constexpr int kRefinementSteps = 4;

// y - X b with the sums carried in long double.
Eigen::VectorXd exact_residuals(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                const std::vector<Eigen::Index>& cols, const Eigen::VectorXd& b) {
    std::vector<const double*> col_ptr;
    for (auto c : cols) col_ptr.push_back(X.col(c).data());
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        long double s = y(i);
        for (std::size_t c = 0; c < col_ptr.size(); ++c) {
            s -= static_cast<long double>(b(static_cast<Eigen::Index>(c))) * col_ptr[c][i];
        }
        out(i) = static_cast<double>(s);
    }
    return out;
}

}  // namespace

LeastSquares solve_least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double rank_tol) {
    OrthogonalFactorization qr(X, rank_tol);
    LeastSquares ls;
    ls.retained = qr.retained();
    ls.dropped = qr.dropped();
    const Eigen::Index n = X.rows(), k = qr.rank();
    const auto R = qr.r().triangularView<Eigen::Upper>();

    Eigen::VectorXd b = qr.solve(y);
    Eigen::VectorXd r = qr.residualize(y);
    double last_step = std::numeric_limits<double>::infinity();
    for (int step = 0; step < kRefinementSteps; ++step) {
        // f = y - r - X b, g = -X' r
        const Eigen::VectorXd f = exact_residuals(y - r, X, ls.retained, b);
        Eigen::VectorXd g(k);
        for (Eigen::Index c = 0; c < k; ++c) {
            long double s = 0.0L;
            const auto col = X.col(ls.retained[static_cast<std::size_t>(c)]);
            for (Eigen::Index i = 0; i < n; ++i) s -= static_cast<long double>(col(i)) * r(i);
            g(c) = static_cast<double>(s);
        }
        const Eigen::VectorXd h = R.transpose().solve(g);
        Eigen::VectorXd d = qr.apply_qt(f);
        const Eigen::VectorXd db = R.solve(d.head(k) - h);
        d.head(k) = h;
        b += db;
        r += qr.apply_q(std::move(d));
        // stop at roundoff level or once corrections stop contracting
        const double size = db.norm();
        if (size <= std::numeric_limits<double>::epsilon() * b.norm() || size > 0.25 * last_step) break;
        last_step = size;
    }

    ls.coef = b;
    ls.unscaled_cov = qr.unscaled_covariance();
    ls.residuals = std::move(r);
    ls.fitted = y - ls.residuals;
    ls.rss = ls.residuals.squaredNorm();
    return ls;
}

std::string format_stars(double p, const StarThresholds& t) {
    if (p < t.strong) return "***";
    if (p < t.moderate) return "**";
    if (p < t.weak) return "*";
    return "";
}

const TermEstimate* FitResult::find(std::string_view name) const noexcept {
    for (const auto& t : terms) {
        if (t.term == name) return &t;
    }
    return nullptr;
}

const TermEstimate& FitResult::term(std::string_view name) const {
    if (const auto* t = find(name)) return *t;
    throw UnknownVariable(std::string(name));
}

FitResult ols_fit(const Eigen::VectorXd& y, const VariableMatrix& X, const OlsOptions& options) {
    const Eigen::Index n = X.n_rows();
    if (y.size() != n) throw InvalidArgument("response length does not match design rows");
    if (!y.allFinite() || !X.values.allFinite()) throw InvalidArgument("non-finite value in design");
    if (n == 0) throw EmptyDataset();

    const LeastSquares ls = solve_least_squares(y, X.values, options.rank_tol);
    if (ls.retained.empty()) throw AllColumnsAliased();

    FitResult fit;
    fit.n_obs = static_cast<std::size_t>(n);
    fit.n_params = ls.retained.size() + options.absorbed_params;
    if (fit.n_obs <= fit.n_params) {
        throw InsufficientObservations(fmt::format("{} observations for {} parameters", fit.n_obs,
                                                   fit.n_params));
    }
    for (Eigen::Index j : ls.dropped) fit.dropped_terms.push_back(X.column_names[static_cast<std::size_t>(j)]);

    const double df_classical = static_cast<double>(fit.n_obs - fit.n_params);
    fit.rss = ls.rss;
    fit.sigma2 = ls.rss / df_classical;
    fit.covariance = options.covariance;

    Eigen::MatrixXd cov;
    double df = df_classical;
    if (options.covariance == CovarianceType::Classical) {
        cov = fit.sigma2 * ls.unscaled_cov;
    } else {
        if (options.clusters.size() != static_cast<std::size_t>(n)) {
            throw InvalidArgument("cluster labels must be row-aligned with the design");
        }
        std::map<std::string_view, std::vector<Eigen::Index>> groups;
        for (Eigen::Index i = 0; i < n; ++i) groups[options.clusters[static_cast<std::size_t>(i)]].push_back(i);
        const auto g = static_cast<double>(groups.size());
        if (groups.size() < 2) throw InsufficientObservations("clustered errors need two clusters");
        const auto k = static_cast<Eigen::Index>(ls.retained.size());
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd score(k);
        for (const auto& [label, rows] : groups) {
            score.setZero();
            for (Eigen::Index i : rows) {
                for (Eigen::Index c = 0; c < k; ++c) {
                    score(c) += X.values(i, ls.retained[static_cast<std::size_t>(c)]) * ls.residuals(i);
                }
            }
            meat.noalias() += score * score.transpose();
        }
        // CR1 small-sample factor
        const double scale = g / (g - 1.0) * (static_cast<double>(n) - 1.0) / df_classical;
        cov = scale * ls.unscaled_cov * meat * ls.unscaled_cov;
        fit.n_clusters = groups.size();
        df = g - 1.0;
    }
    fit.df_resid = df;

    for (std::size_t c = 0; c < ls.retained.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        TermEstimate t;
        t.term = X.column_names[static_cast<std::size_t>(ls.retained[c])];
        t.coef = ls.coef(ci);
        t.std_err = std::sqrt(std::max(cov(ci, ci), 0.0));
        if (t.std_err > 0.0) {
            t.t_stat = t.coef / t.std_err;
            t.p_value = t_two_sided_p(t.t_stat, df);
        } else if (t.coef != 0.0) {
            t.t_stat = std::copysign(std::numeric_limits<double>::infinity(), t.coef);
            t.p_value = 0.0;
        }
        t.stars = format_stars(t.p_value, options.stars);
        fit.terms.push_back(std::move(t));
    }

    bool intercept = false;
    if (options.has_intercept) {
        intercept = *options.has_intercept;
    } else {
        intercept = std::any_of(ls.retained.begin(), ls.retained.end(),
                                [&](Eigen::Index j) { return is_constant_column(X.values, j); });
    }
    fit.tss = intercept ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
    if (fit.tss > 0.0) {
        fit.r_squared = std::clamp(1.0 - fit.rss / fit.tss, 0.0, 1.0);
    } else {
        fit.r_squared = fit.rss == 0.0 ? 1.0 : 0.0;
    }
    return fit;
}

FitResult fit_model(const PanelDataset& dataset, const ModelSpec& spec, const OlsOptions& options) {
    Design d = build_design(dataset, spec);
    OlsOptions opts = options;
    if (opts.covariance == CovarianceType::ClusteredFirm && opts.clusters.empty()) {
        opts.clusters = d.firm_ids;
    }
    if (!opts.has_intercept) opts.has_intercept = spec.include_intercept;
    FitResult fit = ols_fit(d.y, d.X, opts);
    fit.spec = spec;
    return fit;
}

namespace {

struct Residualized {
    Design design;
    std::size_t absorbed = 0;
};

Residualized residualize_design(const PanelDataset& dataset, const ModelSpec& spec) {
    ModelSpec block_spec = spec;
    block_spec.regressors.clear();
    const Design full = build_design(dataset, spec);
    const Design block = build_design(dataset, block_spec);

    Residualized out;
    out.design.firm_ids = full.firm_ids;
    out.design.X.column_names = spec.regressors;
    const auto n = full.X.n_rows();
    const auto k = static_cast<Eigen::Index>(spec.regressors.size());
    const Eigen::Index offset = spec.include_intercept ? 1 : 0;
    if (block.X.n_cols() == 0) {
        out.design.y = full.y;
        out.design.X.values = full.X.values.middleCols(offset, k);
        return out;
    }
    const OrthogonalFactorization qr(block.X.values);
    out.absorbed = static_cast<std::size_t>(qr.rank());
    out.design.y = qr.residualize(full.y);
    out.design.X.values.resize(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.design.X.values.col(j) = qr.residualize(full.X.values.col(offset + j));
    }
    return out;
}

}  // namespace

Design within_demean(const PanelDataset& dataset, const ModelSpec& spec) {
    return residualize_design(dataset, spec).design;
}

FitResult fit_within(const PanelDataset& dataset, const ModelSpec& spec, const OlsOptions& options) {
    Residualized res = residualize_design(dataset, spec);
    OlsOptions opts = options;
    opts.absorbed_params = res.absorbed;
    if (opts.covariance == CovarianceType::ClusteredFirm && opts.clusters.empty()) {
        opts.clusters = res.design.firm_ids;
    }
    // y is already centred whenever the block holds an intercept
    opts.has_intercept = false;
    FitResult fit = ols_fit(res.design.y, res.design.X, opts);
    fit.spec = spec;
    return fit;
}

}  // namespace panelmed
