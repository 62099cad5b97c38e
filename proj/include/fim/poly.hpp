#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fim/common.hpp"
#include "fim/regression.hpp"
#include "fim/stats.hpp"

namespace fim {

// Longstaff-Schwartz-style polynomial least squares on the standardized
// regressor. Monomials of raw prices (~100^degree) are numerically hostile, so
// x is shifted/scaled before powers; the standardization is stored with the fit
// and replayed at prediction time.
struct PolyFit {
    std::size_t degree = 0;
    std::vector<double> coeffs; // beta_0 .. beta_degree on standardized x
    double x_mean = 0.0;
    double x_scale = 1.0;
    double train_min = 0.0; // raw-x training range, for extrapolation flagging
    double train_max = 0.0;
};

namespace detail {

inline void fill_monomials(Eigen::VectorXd& row, double x_std, std::size_t degree) {
    row(0) = 1.0;
    double v = 1.0;
    for (std::size_t j = 1; j <= degree; ++j) {
        v *= x_std;
        row(static_cast<Eigen::Index>(j)) = v;
    }
}

} // namespace detail

// Minimizes the empirical MSE of y against monomials of standardized x via
// Householder QR of the design matrix (never the normal equations). An optional
// ridge penalty on the non-intercept coefficients sits behind config.
inline PolyFit fit_polynomial(const RegressionData& data, std::size_t degree, double ridge = 0.0) {
    const std::size_t n = data.x.size();
    require(n == data.y.size(), "fit_polynomial: x and y must have equal length");
    require(n > degree + 1, "fit_polynomial: need more samples than coefficients");
    require(ridge >= 0.0, "fit_polynomial: ridge must be nonnegative");

    PolyFit fit;
    fit.degree = degree;
    fit.x_mean = mean(data.x);
    const double sd = (n >= 2) ? sample_stddev(data.x) : 0.0;
    require(sd > 0.0, "fit_polynomial: regressor is constant (rank-deficient design)");
    fit.x_scale = sd;
    fit.train_min = *std::min_element(data.x.begin(), data.x.end());
    fit.train_max = *std::max_element(data.x.begin(), data.x.end());

    const auto n_coef = static_cast<Eigen::Index>(degree + 1);
    const std::size_t n_rows = n + (ridge > 0.0 ? degree : 0);
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows), n_coef);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_rows));
    Eigen::VectorXd row(n_coef);
    for (std::size_t i = 0; i < n; ++i) {
        detail::fill_monomials(row, (data.x[i] - fit.x_mean) / fit.x_scale, degree);
        design.row(static_cast<Eigen::Index>(i)) = row;
        rhs(static_cast<Eigen::Index>(i)) = data.y[i];
    }
    if (ridge > 0.0) {
        const double lambda = std::sqrt(ridge);
        for (std::size_t j = 1; j <= degree; ++j)
            design(static_cast<Eigen::Index>(n + j - 1), static_cast<Eigen::Index>(j)) = lambda;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n_coef)
        throw validation_error("fit_polynomial: rank-deficient design matrix");
    const Eigen::VectorXd beta = qr.solve(rhs);

    fit.coeffs.resize(degree + 1);
    for (std::size_t j = 0; j <= degree; ++j) {
        fit.coeffs[j] = beta(static_cast<Eigen::Index>(j));
        check_finite(fit.coeffs[j], "fit_polynomial: coefficient");
    }
    return fit;
}

inline double predict_polynomial_at(const PolyFit& fit, double x) {
    const double x_std = (x - fit.x_mean) / fit.x_scale;
    // Horner evaluation of the fitted monomial expansion
    double acc = fit.coeffs[fit.degree];
    for (std::size_t j = fit.degree; j-- > 0;) acc = acc * x_std + fit.coeffs[j];
    return acc;
}

inline std::vector<double> predict_polynomial(const PolyFit& fit, std::span<const double> x_query) {
    require(!fit.coeffs.empty(), "predict_polynomial: fit has no coefficients");
    std::vector<double> out(x_query.size());
    for (std::size_t i = 0; i < x_query.size(); ++i) out[i] = predict_polynomial_at(fit, x_query[i]);
    return out;
}

// Queries outside the training range are permitted; callers surface the count
// in output metadata.
inline std::size_t count_extrapolations(const PolyFit& fit, std::span<const double> x_query) {
    std::size_t n = 0;
    for (double x : x_query)
        if (x < fit.train_min || x > fit.train_max) ++n;
    return n;
}

} // namespace fim
