#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fim/common.hpp"
#include "fim/parallel.hpp"
#include "fim/stats.hpp"

namespace fim {

// Gaussian kernel smoothing. The default weight is exp(-(x-x0)^2 / (2 h^2));
// the literal form with an unsquared distance, exp(-|x-x0| / (2 h^2)), is a
// Laplacian-like kernel kept behind a flag. Both are symmetric and positive;
// the normalization constant cancels in every weighted average here.
struct KernelSpec {
    enum class Rule { explicit_h, silverman };

    Rule rule = Rule::silverman;
    std::optional<double> bandwidth; // required for explicit_h
    bool squared_distance = true;    // false -> unsquared |x-x0| form

    void validate() const {
        if (rule == Rule::explicit_h) {
            require(bandwidth.has_value() && *bandwidth > 0.0,
                    "kernel: explicit bandwidth must be positive");
        }
    }
};

// Rule-of-thumb plug-in bandwidth: 1.06 min(std, IQR/1.34) n^{-1/5}. A zero
// IQR (more than half the sample tied) falls back to the standard deviation.
inline double silverman_bandwidth(std::span<const double> x) {
    require(x.size() >= 2, "silverman_bandwidth: need at least 2 samples");
    const double sd = sample_stddev(x);
    const double iqr = interquartile_range(x);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    require(spread > 0.0, "silverman_bandwidth: zero-dispersion sample");
    return 1.06 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

inline double resolve_bandwidth(const KernelSpec& spec, std::span<const double> x) {
    spec.validate();
    if (spec.rule == KernelSpec::Rule::explicit_h) return *spec.bandwidth;
    return silverman_bandwidth(x);
}

inline double kernel_weight(const KernelSpec& spec, double h, double x, double x0) {
    const double d = x - x0;
    if (spec.squared_distance) return std::exp(-d * d / (2.0 * h * h));
    return std::exp(-std::abs(d) / (2.0 * h * h));
}

// Training sample plus kernel choice; order 0 is the Nadaraya-Watson average,
// order 1 a local linear fit re-solved at every query point.
struct LocalFit {
    std::vector<double> x;
    std::vector<double> y;
    KernelSpec kernel;
    int order = 0;

    void validate() const {
        require(!x.empty() && x.size() == y.size(), "LocalFit: non-empty equal-length training set");
        require(order == 0 || order == 1, "LocalFit: order must be 0 or 1");
        kernel.validate();
    }
};

// Local coefficients at one query: beta0 is the estimate m(x), beta1 the local
// slope (zero for order 0 or after degradation to the weighted average).
struct LocalCoeffs {
    double beta0 = 0.0;
    double beta1 = 0.0;
    bool degraded = false;
};

namespace detail {

// Weighted average sum(w y) / sum(w) with compensated sums; predictions are
// then invariant to training-pair permutations up to ~1e-12.
inline double nw_at(const LocalFit& fit, double h, double xq) {
    CompensatedSum num, den;
    for (std::size_t i = 0; i < fit.x.size(); ++i) {
        const double w = kernel_weight(fit.kernel, h, xq, fit.x[i]);
        num.add(w * fit.y[i]);
        den.add(w);
    }
    const double total = den.value();
    if (!(total > 0.0))
        throw numeric_error("kernel: bandwidth starvation, all weights zero at query x=" +
                            std::to_string(xq));
    return num.value() / total;
}

// Order-1 local coefficients: weighted LS on basis {1, x_i - xq} via QR of the
// sqrt(w)-scaled design. Degrades to the order-0 average when fewer than two
// distinct x carry weight or the design loses rank.
inline LocalCoeffs local_linear_at(const LocalFit& fit, double h, double xq) {
    const std::size_t n = fit.x.size();
    std::vector<double> w(n);
    double w_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = kernel_weight(fit.kernel, h, xq, fit.x[i]);
        w_max = std::max(w_max, w[i]);
    }
    if (!(w_max > 0.0))
        throw numeric_error("kernel: bandwidth starvation, all weights zero at query x=" +
                            std::to_string(xq));

    LocalCoeffs out;
    double x_first = 0.0;
    bool seen = false, distinct = false;
    const double w_floor = w_max * 1e-12;
    for (std::size_t i = 0; i < n && !distinct; ++i) {
        if (w[i] <= w_floor) continue;
        if (!seen) {
            x_first = fit.x[i];
            seen = true;
        } else if (fit.x[i] != x_first) {
            distinct = true;
        }
    }
    if (!distinct) {
        out.degraded = true;
        out.beta0 = nw_at(fit, h, xq);
        return out;
    }

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double sw = std::sqrt(w[i]);
        design(static_cast<Eigen::Index>(i), 0) = sw;
        design(static_cast<Eigen::Index>(i), 1) = sw * (fit.x[i] - xq);
        rhs(static_cast<Eigen::Index>(i)) = sw * fit.y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 2) {
        out.degraded = true;
        out.beta0 = nw_at(fit, h, xq);
        return out;
    }
    const Eigen::Vector2d beta = qr.solve(rhs);
    out.beta0 = beta(0);
    out.beta1 = beta(1);
    return out;
}

inline LocalCoeffs local_coeffs_at(const LocalFit& fit, double h, double xq) {
    if (fit.order == 0) return {nw_at(fit, h, xq), 0.0, false};
    return local_linear_at(fit, h, xq);
}

} // namespace detail

inline LocalCoeffs local_poly_coefficients_at(const LocalFit& fit, double x_query) {
    fit.validate();
    return detail::local_coeffs_at(fit, resolve_bandwidth(fit.kernel, fit.x), x_query);
}

// Nadaraya-Watson estimate (order-0 local fit) at each query point.
inline std::vector<double> nw_estimate(const LocalFit& fit, std::span<const double> x_query,
                                       unsigned threads = 1) {
    fit.validate();
    const double h = resolve_bandwidth(fit.kernel, fit.x);
    std::vector<double> out(x_query.size());
    parallel_for(x_query.size(), threads,
                 [&](std::size_t q) { out[q] = detail::nw_at(fit, h, x_query[q]); });
    return out;
}

struct LocalPolyResult {
    std::vector<double> values;
    // Queries where the weighted local-linear design was rank deficient and the
    // estimate degraded to the order-0 weighted average.
    std::vector<std::size_t> degraded_queries;
};

// Local polynomial regression of the fit's order at each query point. Order 0
// computes exactly the NW average; order 1 degrades to order 0 per query when
// the weighted design loses rank, recording which queries did.
inline LocalPolyResult local_poly_fit_predict(const LocalFit& fit, std::span<const double> x_query,
                                              unsigned threads = 1) {
    fit.validate();
    const double h = resolve_bandwidth(fit.kernel, fit.x);

    LocalPolyResult result;
    result.values.resize(x_query.size());
    std::vector<unsigned char> degraded_flags(x_query.size(), 0);
    parallel_for(x_query.size(), threads, [&](std::size_t q) {
        const LocalCoeffs coeffs = detail::local_coeffs_at(fit, h, x_query[q]);
        result.values[q] = coeffs.beta0;
        degraded_flags[q] = coeffs.degraded ? 1 : 0;
    });
    for (std::size_t q = 0; q < x_query.size(); ++q)
        if (degraded_flags[q]) result.degraded_queries.push_back(q);
    return result;
}

} // namespace fim
