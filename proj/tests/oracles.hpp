#pragma once

// Reference computations used only by tests. They share no code with the
// library paths they check.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Least squares through the normal equations X'X b = X'y, factored as
// L D L' (square-root-free Cholesky) in quad precision so that the oracle's own
// rounding stays far below the tolerances it is compared against.
inline std::vector<double> normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    using quad = __float128;
    const auto n = static_cast<std::size_t>(X.rows());
    const auto k = static_cast<std::size_t>(X.cols());
    auto x = [&](std::size_t r, std::size_t c) {
        return static_cast<quad>(X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    };
    std::vector<quad> a(k * k, 0), rhs(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            quad s = 0;
            for (std::size_t r = 0; r < n; ++r) s += x(r, i) * x(r, j);
            a[i * k + j] = a[j * k + i] = s;
        }
        quad s = 0;
        for (std::size_t r = 0; r < n; ++r) s += x(r, i) * static_cast<quad>(y(static_cast<Eigen::Index>(r)));
        rhs[i] = s;
    }
    std::vector<quad> l(k * k, 0), d(k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        quad dj = a[j * k + j];
        for (std::size_t p = 0; p < j; ++p) dj -= l[j * k + p] * l[j * k + p] * d[p];
        if (!(dj > 0)) throw std::runtime_error("normal equations not positive definite");
        d[j] = dj;
        l[j * k + j] = 1;
        for (std::size_t i = j + 1; i < k; ++i) {
            quad s = a[i * k + j];
            for (std::size_t p = 0; p < j; ++p) s -= l[i * k + p] * l[j * k + p] * d[p];
            l[i * k + j] = s / dj;
        }
    }
    std::vector<quad> z(k), b(k);
    for (std::size_t i = 0; i < k; ++i) {
        quad s = rhs[i];
        for (std::size_t p = 0; p < i; ++p) s -= l[i * k + p] * z[p];
        z[i] = s;
    }
    for (std::size_t i = 0; i < k; ++i) z[i] /= d[i];
    for (std::size_t ii = k; ii-- > 0;) {
        quad s = z[ii];
        for (std::size_t p = ii + 1; p < k; ++p) s -= l[p * k + ii] * b[p];
        b[ii] = s;
    }
    return std::vector<double>(b.begin(), b.end());
}

// Sample quantile by sorting a copy: the order statistics x(j) and x(j+1)
// (1-based) bracket the position 1 + (n-1)q, interpolated linearly.
inline double sorted_quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double offset = (static_cast<double>(values.size()) - 1.0) * q;
    const double whole = std::floor(offset);
    const double g = offset - whole;
    const auto j = static_cast<std::size_t>(whole) + 1;  // 1-based
    if (g == 0.0 || j == values.size()) return values[j - 1];
    return values[j - 1] + g * (values[j] - values[j - 1]);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace oracle
