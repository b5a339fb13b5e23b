#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "panelmed/panel.hpp"

namespace panelmed {

enum class FixedEffect { Year, Industry };

std::string_view fixed_effect_name(FixedEffect fe) noexcept;

inline constexpr std::string_view kInterceptTerm = "Constant";

struct ModelSpec {
    std::string dependent;
    std::vector<std::string> regressors;
    std::vector<FixedEffect> fixed_effects;
    bool include_intercept = true;

    /// Throws InvalidArgument on a dependent listed as regressor, repeated
    /// regressor names or repeated fixed-effect dimensions.
    void check() const;
    /// Renders the `DEP ~ R1 + R2 | year + industry` form accepted by parse_model.
    std::string to_string() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Parses `DEP ~ R1 + R2 [| FE1 + FE2]` where FE names are `year` or `industry`.
/// A `- 1` or `+ 0` regressor term removes the intercept.
ModelSpec parse_model(std::string_view text);

struct Design {
    Eigen::VectorXd y;
    VariableMatrix X;
    std::vector<std::string> firm_ids;  // row-aligned, for clustering
};

/// Columns: [Constant] + regressors + one dummy per non-baseline level of each
/// fixed effect, named `year=2011` / `industry=C27`. The first sorted level
/// is the baseline. Throws UnknownVariable, EmptyDataset.
Design build_design(const PanelDataset& dataset, const ModelSpec& spec);

/// Householder QR of X, processing columns left to right. A column whose
/// remaining norm falls below `rank_tol` times the largest retained diagonal
/// is aliased and skipped.
class OrthogonalFactorization {
public:
    explicit OrthogonalFactorization(const Eigen::MatrixXd& X, double rank_tol = 1e-10);

    Eigen::Index rows() const noexcept { return n_; }
    Eigen::Index rank() const noexcept { return static_cast<Eigen::Index>(retained_.size()); }
    const std::vector<Eigen::Index>& retained() const noexcept { return retained_; }
    const std::vector<Eigen::Index>& dropped() const noexcept { return dropped_; }
    const Eigen::MatrixXd& r() const noexcept { return r_; }

    /// Least-squares coefficients for the retained columns.
    Eigen::VectorXd solve(const Eigen::VectorXd& y) const;
    /// (X_r' X_r)^{-1} = R^{-1} R^{-T}.
    Eigen::MatrixXd unscaled_covariance() const;
    /// y minus its projection on the column space of X.
    Eigen::VectorXd residualize(const Eigen::VectorXd& y) const;
    /// Q'y and Qz for the full n x n orthogonal factor.
    Eigen::VectorXd apply_qt(Eigen::VectorXd y) const;
    Eigen::VectorXd apply_q(Eigen::VectorXd z) const;

private:

    Eigen::Index n_ = 0;
    Eigen::MatrixXd reflectors_;  // column l holds v_l in rows l..n-1
    Eigen::VectorXd betas_;
    Eigen::MatrixXd r_;
    std::vector<Eigen::Index> retained_;
    std::vector<Eigen::Index> dropped_;
};

struct LeastSquares {
    Eigen::VectorXd coef;                // retained columns only
    std::vector<Eigen::Index> retained;  // indices into X
    std::vector<Eigen::Index> dropped;
    Eigen::MatrixXd unscaled_cov;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    double rss = 0.0;
};

/// QR solve followed by iterative refinement of the augmented system
/// [I X; X' 0][r; b] = [y; 0] with residuals accumulated in extended precision.
LeastSquares solve_least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                 double rank_tol = 1e-10);

struct StarThresholds {
    double strong = 0.01;
    double moderate = 0.05;
    double weak = 0.1;
};

/// "***" for p < strong, "**" for p < moderate, "*" for p < weak, else "".
std::string format_stars(double p, const StarThresholds& thresholds = {});

enum class CovarianceType { Classical, ClusteredFirm };

struct OlsOptions {
    CovarianceType covariance = CovarianceType::Classical;
    std::vector<std::string> clusters;  // row-aligned group labels for ClusteredFirm
    std::optional<bool> has_intercept;  // default: detect a constant retained column
    double rank_tol = 1e-10;
    /// Parameters already removed from y and X (residualized designs).
    std::size_t absorbed_params = 0;
    StarThresholds stars;
};

struct TermEstimate {
    std::string term;
    double coef = 0.0;
    double std_err = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    std::string stars;
};

struct FitResult {
    ModelSpec spec;
    std::vector<TermEstimate> terms;  // retained design columns, in design order
    std::vector<std::string> dropped_terms;
    std::size_t n_obs = 0;
    std::size_t n_params = 0;  // retained columns plus absorbed parameters
    double df_resid = 0.0;
    double rss = 0.0;
    double tss = 0.0;
    double r_squared = 0.0;
    double sigma2 = 0.0;
    CovarianceType covariance = CovarianceType::Classical;
    std::size_t n_clusters = 0;

    const TermEstimate* find(std::string_view term) const noexcept;
    /// Throws UnknownVariable.
    const TermEstimate& term(std::string_view term) const;
};

/// Throws InsufficientObservations when n <= retained columns, AllColumnsAliased.
FitResult ols_fit(const Eigen::VectorXd& y, const VariableMatrix& X, const OlsOptions& options = {});

/// build_design + ols_fit; the result carries `spec`. Cluster labels are
/// taken from the design when clustered errors are requested.
FitResult fit_model(const PanelDataset& dataset, const ModelSpec& spec,
                    const OlsOptions& options = {});

/// Residualizes the dependent variable and each regressor on the intercept and
/// fixed-effect dummy block. X holds the residualized regressors only.
Design within_demean(const PanelDataset& dataset, const ModelSpec& spec);

/// Slopes-only fit on the residualized design; degrees of freedom account for
/// the absorbed block, so estimates and errors match fit_model.
FitResult fit_within(const PanelDataset& dataset, const ModelSpec& spec,
                     const OlsOptions& options = {});

}  // namespace panelmed
