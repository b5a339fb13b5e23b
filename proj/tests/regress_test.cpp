#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "panelmed/error.hpp"
#include "panelmed/regress.hpp"

using namespace panelmed;

namespace {

VariableMatrix named(Eigen::MatrixXd values, std::vector<std::string> names) {
    return VariableMatrix{std::move(names), std::move(values)};
}

double max_rel_dev(const Eigen::VectorXd& got, const std::vector<double>& want) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < got.size(); ++i) {
        const double w = want[static_cast<std::size_t>(i)];
        worst = std::max(worst, std::abs(got(i) - w) / std::max(std::abs(w), 1e-300));
    }
    return worst;
}

}  // namespace

TEST(ParseModel, FullForm) {
    const auto spec = parse_model("INV ~ HOLD + AC1 | year + industry");
    EXPECT_EQ(spec.dependent, "INV");
    EXPECT_EQ(spec.regressors, (std::vector<std::string>{"HOLD", "AC1"}));
    EXPECT_EQ(spec.fixed_effects, (std::vector<FixedEffect>{FixedEffect::Year, FixedEffect::Industry}));
    EXPECT_TRUE(spec.include_intercept);
    EXPECT_EQ(parse_model(spec.to_string()), spec);
}

TEST(ParseModel, NoIntercept) {
    EXPECT_FALSE(parse_model("INV ~ HOLD - 1").include_intercept);
    EXPECT_FALSE(parse_model("INV ~ 0 + HOLD").include_intercept);
}

TEST(ParseModel, Rejects) {
    EXPECT_THROW(parse_model("INV HOLD"), InvalidArgument);
    EXPECT_THROW(parse_model("INV ~ HOLD | month"), InvalidArgument);
    EXPECT_THROW(parse_model("INV ~ INV"), InvalidArgument);
    EXPECT_THROW(parse_model("INV ~ HOLD + HOLD"), InvalidArgument);
}

TEST(BuildDesign, DummyCount) {
    std::vector<Observation> obs;
    for (int y : {2010, 2011}) {
        for (const char* ind : {"A", "B"}) {
            for (int i = 0; i < 3; ++i) {
                obs.push_back(fixtures::observation(std::string(ind) + std::to_string(i), y, ind));
            }
        }
    }
    const auto d = build_design(PanelDataset(obs), parse_model("INV ~ HOLD + AC1 + AC2 | year + industry"));
    EXPECT_EQ(d.X.n_cols(), 6);
    EXPECT_EQ(d.X.column_names,
              (std::vector<std::string>{"Constant", "HOLD", "AC1", "AC2", "year=2011", "industry=B"}));
    EXPECT_EQ(d.y.size(), 12);
}

TEST(BuildDesign, SingleYearNoDummies) {
    const auto ds = fixtures::random_panel(1, 10, 1, 2);
    const auto d = build_design(ds, parse_model("INV ~ HOLD | year"));
    EXPECT_EQ(d.X.n_cols(), 2);
}

TEST(BuildDesign, YearBlockIsOneHot) {
    const auto ds = fixtures::random_panel(2, 10, 4, 3);
    const auto d = build_design(ds, parse_model("INV ~ HOLD | year + industry"));
    for (Eigen::Index i = 0; i < d.X.n_rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < d.X.n_cols(); ++j) {
            if (d.X.column_names[static_cast<std::size_t>(j)].rfind("year=", 0) == 0) sum += d.X.values(i, j);
        }
        const bool baseline = ds.records()[static_cast<std::size_t>(i)].raw.year == ds.year_levels().front();
        EXPECT_EQ(sum, baseline ? 0.0 : 1.0);
    }
}

TEST(BuildDesign, Errors) {
    EXPECT_THROW(build_design(PanelDataset{}, parse_model("INV ~ HOLD")), EmptyDataset);
    EXPECT_THROW(build_design(fixtures::random_panel(1, 3, 1, 1), parse_model("INV ~ NOPE")), UnknownVariable);
}

TEST(OlsFit, ExactLine) {
    Eigen::MatrixXd X(10, 2);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i;
        y(i) = 2.0 * i + 1.0;
    }
    const auto fit = ols_fit(y, named(X, {"Constant", "x"}));
    EXPECT_NEAR(fit.term("x").coef, 2.0, 1e-12);
    EXPECT_NEAR(fit.term("Constant").coef, 1.0, 1e-12);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(fit.rss, 0.0, 1e-20);
    EXPECT_EQ(fit.df_resid, 8.0);
}

TEST(OlsFit, DuplicateColumnDropped) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(50, 3);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = X(i, 2) = n01(rng);
        y(i) = 0.5 * X(i, 1) + n01(rng);
    }
    const auto dup = ols_fit(y, named(X, {"Constant", "x", "x_copy"}));
    const auto single = ols_fit(y, named(X.leftCols(2), {"Constant", "x"}));
    EXPECT_EQ(dup.dropped_terms, std::vector<std::string>{"x_copy"});
    ASSERT_EQ(dup.terms.size(), 2u);
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_DOUBLE_EQ(dup.terms[j].coef, single.terms[j].coef);
        EXPECT_DOUBLE_EQ(dup.terms[j].std_err, single.terms[j].std_err);
    }
    EXPECT_DOUBLE_EQ(dup.r_squared, single.r_squared);
}

TEST(OlsFit, MatchesNormalEquationsOracle) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(500, 5);
    Eigen::VectorXd y(500);
    const double beta[5] = {1.5, -2.0, 0.25, 3.0, -0.75};
    for (int i = 0; i < 500; ++i) {
        X(i, 0) = 1.0;
        for (int j = 1; j < 5; ++j) X(i, j) = n01(rng);
        y(i) = n01(rng);
        for (int j = 0; j < 5; ++j) y(i) += beta[j] * X(i, j);
    }
    const auto fit = ols_fit(y, named(X, {"Constant", "a", "b", "c", "d"}));
    Eigen::VectorXd coef(5);
    for (int j = 0; j < 5; ++j) coef(j) = fit.terms[static_cast<std::size_t>(j)].coef;
    EXPECT_LE(max_rel_dev(coef, oracle::normal_equations(X, y)), 1e-8);
}

TEST(OlsFit, ResidualsOrthogonalAndDecompose) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(200, 4);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
        X(i, 0) = 1.0;
        for (int j = 1; j < 4; ++j) X(i, j) = n01(rng) * j;
        y(i) = X(i, 1) - X(i, 3) + n01(rng);
    }
    const auto ls = solve_least_squares(y, X);
    const Eigen::VectorXd ortho = X.transpose() * ls.residuals;
    EXPECT_LE(ortho.cwiseAbs().maxCoeff(), 1e-9 * X.norm() * y.norm());
    EXPECT_LE((ls.fitted + ls.residuals - y).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(ls.rss, ls.residuals.squaredNorm(), 1e-10);
}

TEST(OlsFit, RSquaredNeverFallsWithExtraRegressor) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd X(60, 5);
        Eigen::VectorXd y(60);
        for (int i = 0; i < 60; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < 5; ++j) X(i, j) = n01(rng);
            y(i) = 0.3 * X(i, 1) + n01(rng);
        }
        double prev = 0.0;
        for (int k = 1; k <= 5; ++k) {
            std::vector<std::string> names{"Constant", "a", "b", "c", "d"};
            names.resize(static_cast<std::size_t>(k));
            const auto fit = ols_fit(y, named(X.leftCols(k), names));
            EXPECT_GE(fit.r_squared, prev - 1e-12);
            EXPECT_GE(fit.r_squared, 0.0);
            EXPECT_LE(fit.r_squared, 1.0);
            prev = fit.r_squared;
        }
    }
}

TEST(OlsFit, TStatIsCoefOverStdErr) {
    const auto ds = fixtures::random_panel(5, 40, 3, 4);
    const auto fit = fit_model(ds, parse_model("INV ~ HOLD + AC1 + AC2 | year + industry"));
    for (const auto& t : fit.terms) {
        ASSERT_GT(t.std_err, 0.0);
        EXPECT_DOUBLE_EQ(t.t_stat, t.coef / t.std_err);
        EXPECT_EQ(t.stars, format_stars(t.p_value));
    }
    EXPECT_EQ(fit.n_obs, 120u);
    EXPECT_EQ(fit.n_params, 1u + 3u + 2u + 3u);
}

TEST(OlsFit, ErrorCases) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 2);
    X(1, 1) = 2.0;
    EXPECT_THROW(ols_fit(Eigen::VectorXd::Ones(2), named(X, {"a", "b"})), InsufficientObservations);
    EXPECT_THROW(ols_fit(Eigen::VectorXd::Ones(5), named(Eigen::MatrixXd::Zero(5, 2), {"a", "b"})),
                 AllColumnsAliased);
}

TEST(OlsFit, RowPermutationInvariant) {
    const auto ds = fixtures::random_panel(12, 30, 3, 3);
    const auto d = build_design(ds, parse_model("INV ~ HOLD + AC1 | year + industry"));
    const auto base = ols_fit(d.y, d.X);
    std::mt19937 rng(1);
    std::vector<int> perm(static_cast<std::size_t>(d.y.size()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(Eigen::Map<Eigen::VectorXi>(perm.data(), d.y.size()));
    VariableMatrix Xp{d.X.column_names, P * d.X.values};
    const auto permuted = ols_fit(P * d.y, Xp);
    for (std::size_t j = 0; j < base.terms.size(); ++j) {
        EXPECT_NEAR(permuted.terms[j].coef, base.terms[j].coef, 1e-10);
        EXPECT_NEAR(permuted.terms[j].std_err, base.terms[j].std_err, 1e-10);
    }
}

TEST(OlsFit, ZeroStdErrConvention) {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 1, 1, 2, 1, 3;
    const auto fit = ols_fit(Eigen::Vector4d(1, 3, 5, 7), named(X, {"Constant", "x"}));
    EXPECT_EQ(fit.term("x").p_value, 0.0);
    EXPECT_EQ(fit.term("x").stars, "***");
}

TEST(FormatStars, Boundaries) {
    EXPECT_EQ(format_stars(0.009), "***");
    EXPECT_EQ(format_stars(0.01), "**");
    EXPECT_EQ(format_stars(0.049), "**");
    EXPECT_EQ(format_stars(0.05), "*");
    EXPECT_EQ(format_stars(0.099), "*");
    EXPECT_EQ(format_stars(0.1), "");
    EXPECT_EQ(format_stars(1.0), "");
    EXPECT_EQ(format_stars(0.02, {0.05, 0.1, 0.2}), "***");
}

TEST(FixedEffects, WithinMatchesDummies) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ds = fixtures::random_panel(100 + seed, 40, 5, 6);
        const auto spec = parse_model("INV ~ HOLD + AC1 + AC2 | year + industry");
        const auto full = fit_model(ds, spec);
        const auto within = fit_within(ds, spec);
        for (const auto& name : spec.regressors) {
            EXPECT_NEAR(within.term(name).coef, full.term(name).coef, 1e-6);
            EXPECT_NEAR(within.term(name).std_err, full.term(name).std_err, 1e-6);
        }
        EXPECT_EQ(within.df_resid, full.df_resid);
    }
}

TEST(FixedEffects, SingleDimensionIsGroupDemeaning) {
    const auto ds = fixtures::random_panel(21, 30, 4, 3);
    const auto d = within_demean(ds, parse_model("INV ~ HOLD | year"));
    std::map<int, std::pair<double, int>> sums;
    for (const auto& o : ds.records()) {
        auto& s = sums[o.raw.year];
        s.first += o.vars[Var::INV];
        s.second += 1;
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& s = sums[ds.records()[i].raw.year];
        EXPECT_NEAR(d.y(static_cast<Eigen::Index>(i)), ds.records()[i].vars[Var::INV] - s.first / s.second, 1e-12);
    }
}

TEST(FixedEffects, OneGroupEqualsNoFixedEffect) {
    const auto ds = fixtures::random_panel(22, 40, 1, 1);
    const auto with_fe = fit_model(ds, parse_model("INV ~ HOLD + AC1 | year + industry"));
    const auto plain = fit_model(ds, parse_model("INV ~ HOLD + AC1"));
    ASSERT_EQ(with_fe.terms.size(), plain.terms.size());
    for (std::size_t j = 0; j < plain.terms.size(); ++j) EXPECT_EQ(with_fe.terms[j].coef, plain.terms[j].coef);
}

TEST(ClusteredErrors, MatchLoopOracle) {
    const auto ds = fixtures::random_panel(31, 25, 4, 2);
    const auto spec = parse_model("INV ~ HOLD + AC1");
    OlsOptions opts;
    opts.covariance = CovarianceType::ClusteredFirm;
    const auto fit = fit_model(ds, spec, opts);
    EXPECT_EQ(fit.n_clusters, 25u);
    EXPECT_EQ(fit.df_resid, 24.0);

    const auto d = build_design(ds, spec);
    const Eigen::MatrixXd& X = d.X.values;
    const auto ls = solve_least_squares(d.y, X);
    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    std::map<std::string, Eigen::VectorXd> scores;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        auto& s = scores.try_emplace(d.firm_ids[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(X.cols()))
                      .first->second;
        s += X.row(i).transpose() * ls.residuals(i);
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (const auto& [id, s] : scores) meat += s * s.transpose();
    const double g = 25.0, n = static_cast<double>(X.rows()), k = static_cast<double>(X.cols());
    const Eigen::MatrixXd V = g / (g - 1.0) * (n - 1.0) / (n - k) * bread * meat * bread;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        EXPECT_NEAR(fit.terms[static_cast<std::size_t>(j)].std_err, std::sqrt(V(j, j)), 1e-10);
    }
}
