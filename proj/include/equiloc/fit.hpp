#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "equiloc/core/errors.hpp"

namespace equiloc {

struct OrderFit {
    double alpha = 0;
    double beta = 0;
    double constant = 0;
    double r_squared = 0;
};

/// Least squares for log residual = alpha log mu + beta log log(1/mu) + c; beta = 0 without the log term.
inline OrderFit fit_order(const std::vector<double>& mu, const std::vector<double>& residual, bool with_log) {
    if (mu.size() != residual.size()) fail(ErrorKind::shape, "fit table columns differ in length");
    if (mu.size() < 4) fail(ErrorKind::data, "order fit needs at least 4 points");
    int m = static_cast<int>(mu.size());
    int cols = with_log ? 3 : 2;
    Eigen::MatrixXd a(m, cols);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        if (!(residual[i] > 0)) fail(ErrorKind::data, "residuals must be positive");
        if (!(mu[i] > 0)) fail(ErrorKind::data, "mu values must be positive");
        if (with_log && !(mu[i] < 1)) fail(ErrorKind::data, "log-corrected fit needs mu < 1");
        a(i, 0) = std::log(mu[i]);
        if (with_log) a(i, 1) = std::log(std::log(1 / mu[i]));
        a(i, cols - 1) = 1;
        y(i) = std::log(residual[i]);
    }
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(y);
    OrderFit f;
    f.alpha = x(0);
    f.beta = with_log ? x(1) : 0.0;
    f.constant = x(cols - 1);
    double mean = y.mean();
    double ss_tot = (y.array() - mean).square().sum();
    double ss_res = (a.lazyProduct(x) - y).squaredNorm();
    f.r_squared = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace equiloc
