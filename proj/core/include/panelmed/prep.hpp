#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelmed/panel.hpp"

namespace panelmed {

struct WinsorSpec {
    double lower_q = 0.01;
    double upper_q = 0.99;
    std::vector<std::string> variables{"INV", "HOLD", "AC1", "AC2", "SIZE",
                                       "TQ",  "NCPS", "GROWTH", "P", "AGE"};
    bool by_year = true;

    void check() const;
};

/// Linear interpolation between order statistics at h = (n - 1) q + 1
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double q);

struct WinsorBounds {
    int year = 0;  // 0 when pooled
    std::string variable;
    double lower = 0.0;
    double upper = 0.0;
};

struct WinsorResult {
    PanelDataset dataset;
    std::vector<WinsorBounds> bounds;
};

/// Clamps each listed variable to its group's [Q(lower_q), Q(upper_q)].
/// Throws GroupTooSmall for a group with fewer than two observations.
WinsorResult winsorize_with_bounds(const PanelDataset& dataset, const WinsorSpec& spec);
PanelDataset winsorize(const PanelDataset& dataset, const WinsorSpec& spec = {});

struct DescriptiveRow {
    std::string variable;
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // n - 1 denominator; 0 when n < 2
    double min = 0.0;
    double max = 0.0;
};

std::vector<DescriptiveRow> describe(const PanelDataset& dataset,
                                     const std::vector<std::string>& variables);

struct CorrelationMatrix {
    std::vector<std::string> variables;
    Eigen::MatrixXd r;
    Eigen::MatrixXd p;
    std::size_t n = 0;
};

/// Pearson correlations with two-sided t-test p-values on n - 2 degrees of
/// freedom. Throws ZeroVariance, InsufficientObservations (n < 3).
CorrelationMatrix correlate(const PanelDataset& dataset, const std::vector<std::string>& variables);

}  // namespace panelmed
