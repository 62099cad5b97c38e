#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "fim/common.hpp"
#include "fim/portfolio.hpp"
#include "fim/rng.hpp"
#include "fim/stats.hpp"
#include "fim/time_grid.hpp"

namespace fim {

// Per-time-step regression pair: X = netting-set value at t_k, Y = squared PnL
// over the margin period. Y regresses the conditional second moment directly;
// the data is treated as centered, so no conditional mean is subtracted.
struct RegressionData {
    std::size_t t_index = 0;
    std::vector<double> x;
    std::vector<double> y;
};

inline RegressionData build_regression_data(const ValueMatrix& values, const TimeGrid& grid,
                                            std::size_t t_index) {
    require(t_index < grid.n_obs(), "build_regression_data: t_index out of range");
    require(values.times.size() == 2 * grid.n_obs(),
            "build_regression_data: value matrix does not carry (t, t+mpor) column pairs");

    RegressionData data;
    data.t_index = t_index;
    data.x.resize(values.n_paths);
    data.y.resize(values.n_paths);
    const std::size_t col_t = TimeGrid::obs_column(t_index);
    const std::size_t col_d = TimeGrid::mpor_column(t_index);
    for (std::size_t p = 0; p < values.n_paths; ++p) {
        const double v_now = values(p, col_t);
        const double delta = values(p, col_d) - v_now;
        data.x[p] = v_now;
        data.y[p] = delta * delta;
    }
    return data;
}

// Maps a fitted standard deviation to a tail quantile. The Student-t variant is
// variance-normalized (t_nu^{-1}(p) sqrt((nu-2)/nu)) so both variants scale a
// unit standard deviation; it needs nu > 2 for the variance to exist.
struct NormalScaler {
    double p = 0.99;
};

struct StudentTScaler {
    double p = 0.99;
    double dof = 5.0;
};

using QuantileScaler = std::variant<NormalScaler, StudentTScaler>;

inline double quantile_multiplier(const QuantileScaler& scaler) {
    if (const auto* normal = std::get_if<NormalScaler>(&scaler)) {
        require(normal->p > 0.0 && normal->p < 1.0, "scaler: p must lie in (0,1)");
        return normal_quantile(normal->p);
    }
    const auto& st = std::get<StudentTScaler>(scaler);
    require(st.p > 0.0 && st.p < 1.0, "scaler: p must lie in (0,1)");
    require(st.dof > 2.0, "scaler: Student-t dof must exceed 2 (finite variance)");
    const double t_q =
        boost::math::quantile(boost::math::students_t_distribution<double>(st.dof), st.p);
    return t_q * std::sqrt((st.dof - 2.0) / st.dof);
}

// IM_i = sqrt(max(m_hat_i, 0)) * q(scaler). Negative model predictions are
// clamped before the square root; regression can undershoot near the boundary.
inline std::vector<double> im_from_second_moment(std::span<const double> m_hat,
                                                 const QuantileScaler& scaler) {
    const double q = quantile_multiplier(scaler);
    std::vector<double> im(m_hat.size());
    for (std::size_t i = 0; i < m_hat.size(); ++i) {
        check_finite(m_hat[i], "im_from_second_moment: prediction");
        im[i] = std::sqrt(std::max(m_hat[i], 0.0)) * q;
    }
    return im;
}

// Square-integrability diagnostics for the projection framework: the regression
// target Delta^2 is square integrable when V has finite mean, variance and
// fourth moment. There is no finite-sample test for moment existence, so the
// implementable reading is a bootstrap instability check: when the resampled
// fourth-moment estimate swings by more than its own size (CV > 1), the
// estimate is dominated by a few extreme points and the assumption is suspect.

struct MomentEstimate {
    int order = 0; // 1 -> E[V], 2 -> Var[V], 4 -> E[V^4]
    double estimate = 0.0;
    double bootstrap_cv = 0.0;
};

struct MomentReport {
    std::array<MomentEstimate, 3> moments{};
    double cv_threshold = 0.0;
    bool flagged = false;
    std::string verdict() const { return flagged ? "flag" : "pass"; }
};

// Flag threshold for the fourth-moment bootstrap CV. For thin-tailed samples
// the CV shrinks like O(1)/sqrt(n) (Gaussian: ~3.3/sqrt(n)), while samples
// without a fourth moment stay O(1): Student-t nu=3 at n = 1e5 measures in
// [0.14, 0.93] against a Gaussian 0.01. 15/sqrt(n) sits between the regimes
// with multiples of margin on both sides at the n = 1e4..1e6 scales this
// engine runs.
inline double fourth_moment_cv_threshold(std::size_t n_samples) {
    return 15.0 / std::sqrt(static_cast<double>(n_samples));
}

namespace detail {

inline double moment_statistic(std::span<const double> xs, int order) {
    if (order == 2) {
        // variance; constant samples give exactly 0
        const double m = mean(xs);
        CompensatedSum s;
        for (double x : xs) s.add((x - m) * (x - m));
        return s.value() / static_cast<double>(xs.size());
    }
    CompensatedSum s;
    for (double x : xs) {
        double term = x;
        for (int k = 1; k < order; ++k) term *= x;
        s.add(term);
    }
    return s.value() / static_cast<double>(xs.size());
}

inline double bootstrap_cv(std::span<const double> xs, int order, std::size_t n_boot,
                           std::uint64_t seed) {
    std::vector<double> estimates(n_boot);
    std::vector<double> resample(xs.size());
    for (std::size_t b = 0; b < n_boot; ++b) {
        const std::uint64_t bseed = derive_seed(seed, b, static_cast<std::uint64_t>(order));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double u = uniform_draw(bseed, static_cast<std::uint32_t>(i),
                                          static_cast<std::uint32_t>(i >> 32));
            auto idx = static_cast<std::size_t>(u * static_cast<double>(xs.size()));
            if (idx >= xs.size()) idx = xs.size() - 1;
            resample[i] = xs[idx];
        }
        estimates[b] = moment_statistic(resample, order);
    }
    const double m = mean(estimates);
    const double sd = sample_stddev(estimates);
    if (sd == 0.0) return 0.0;
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return sd / std::abs(m);
}

} // namespace detail

inline MomentReport moment_diagnostics(std::span<const double> samples, std::size_t n_boot,
                                       std::uint64_t seed = 0) {
    require(samples.size() >= 100, "moment_diagnostics: need at least 100 samples");
    require(n_boot >= 100, "moment_diagnostics: need at least 100 bootstrap resamples");

    MomentReport report;
    const std::array<int, 3> orders = {1, 2, 4};
    for (std::size_t j = 0; j < orders.size(); ++j) {
        MomentEstimate est;
        est.order = orders[j];
        est.estimate = detail::moment_statistic(samples, orders[j]);
        est.bootstrap_cv = detail::bootstrap_cv(samples, orders[j], n_boot, seed);
        report.moments[j] = est;
    }
    report.cv_threshold = fourth_moment_cv_threshold(samples.size());
    report.flagged = report.moments[2].bootstrap_cv > report.cv_threshold;
    return report;
}

} // namespace fim
