#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fim/approximator.hpp"
#include "fim/common.hpp"
#include "fim/model.hpp"
#include "fim/oracle.hpp"
#include "fim/portfolio.hpp"
#include "fim/regression.hpp"
#include "fim/sde.hpp"
#include "fim/stats.hpp"
#include "fim/time_grid.hpp"

namespace fim {

// Orchestration of the two experiment arms: the nested-MC oracle and the
// regression approximators, both reduced to a per-time IM profile.

struct ProfileResult {
    std::vector<double> times;
    std::vector<double> im_mean;
    std::vector<double> im_stderr;
};

inline ProfileResult profile_from_surface(const ImSurface& surface) {
    ProfileResult out;
    out.times = surface.obs_times;
    out.im_mean = surface.profile;
    out.im_stderr.resize(surface.obs_times.size());
    std::vector<double> column(surface.n_outer);
    for (std::size_t k = 0; k < surface.obs_times.size(); ++k) {
        for (std::size_t p = 0; p < surface.n_outer; ++p) column[p] = surface(p, k);
        out.im_stderr[k] = surface.n_outer >= 2 ? standard_error(column) : 0.0;
    }
    return out;
}

struct StepFit {
    std::size_t t_index = 0;
    double t = 0.0;
    Approximator approx;
    FitDiagnostics diagnostics;
    std::size_t n_extrapolated = 0; // poly only: queries outside the training range
};

struct ApproxRunResult {
    ProfileResult profile;
    std::vector<StepFit> fits;
};

// One regression arm: simulate outer paths once, then per observation time fit
// the selected conditional-second-moment model, predict on the training paths
// and convert to IM through the quantile scaler. Per-step model seeds derive
// from (seed, "fit", t_index).
inline ApproxRunResult approx_im_profile(const ModelSpec& model, const NettingSet& ns,
                                         const TimeGrid& grid, const ApproxSettings& settings,
                                         const QuantileScaler& scaler, std::uint64_t seed,
                                         double disc_rate, unsigned threads = 1) {
    require(settings.n_paths >= 2, "approx_im_profile: need at least 2 outer paths");
    const PathCube cube = simulate_paths(model, grid, settings.n_paths, seed, threads);
    const ValueMatrix values = value_netting_set(ns, cube, model, disc_rate, threads);

    ApproxRunResult out;
    out.profile.times = grid.obs_times;
    out.profile.im_mean.resize(grid.n_obs());
    out.profile.im_stderr.resize(grid.n_obs());
    out.fits.reserve(grid.n_obs());

    for (std::size_t k = 0; k < grid.n_obs(); ++k) {
        const RegressionData data = build_regression_data(values, grid, k);
        StepFit step;
        step.t_index = k;
        step.t = grid.obs_times[k];
        step.approx = fit_approximator(settings, data, derive_seed(seed, 0x666974u /*"fit"*/, k),
                                       &step.diagnostics);
        const std::vector<double> m_hat =
            predict(step.approx, data.x, threads, &step.diagnostics);
        if (const auto* poly = std::get_if<PolyFit>(&step.approx))
            step.n_extrapolated = count_extrapolations(*poly, data.x);
        const std::vector<double> im = im_from_second_moment(m_hat, scaler);
        out.profile.im_mean[k] = mean(im);
        out.profile.im_stderr[k] = im.size() >= 2 ? standard_error(im) : 0.0;
        out.fits.push_back(std::move(step));
    }
    return out;
}

struct ComparisonRow {
    double time = 0.0;
    double im_oracle = 0.0;
    double im_approx = 0.0;
    double rel_err = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double rmse = 0.0;
    double max_rel_err = 0.0;
};

// Per-time comparison of two profiles on the same grid. Relative error is
// measured against the oracle; a zero oracle value with zero approx error
// reports 0 (the degenerate sigma=0 world must show zero RMSE).
inline ComparisonReport compare_profiles(const ProfileResult& oracle, const ProfileResult& approx) {
    require(oracle.times.size() == approx.times.size(), "compare_profiles: time grids differ");
    ComparisonReport report;
    CompensatedSum sq;
    for (std::size_t k = 0; k < oracle.times.size(); ++k) {
        require(std::abs(oracle.times[k] - approx.times[k]) <= 1e-12,
                "compare_profiles: time grids differ");
        ComparisonRow row;
        row.time = oracle.times[k];
        row.im_oracle = oracle.im_mean[k];
        row.im_approx = approx.im_mean[k];
        const double diff = row.im_approx - row.im_oracle;
        row.rel_err = std::abs(diff) / (std::abs(row.im_oracle) > 0.0 ? std::abs(row.im_oracle) : 1.0);
        sq.add(diff * diff);
        report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
        report.rows.push_back(row);
    }
    report.rmse = std::sqrt(sq.value() / static_cast<double>(oracle.times.size()));
    return report;
}

struct StepMoments {
    double t = 0.0;
    MomentReport report;
};

// Square-integrability screen of the netting-set value at every observation
// time, on a dedicated outer simulation.
inline std::vector<StepMoments> diagnose_moments(const ModelSpec& model, const NettingSet& ns,
                                                 const TimeGrid& grid, std::size_t n_paths,
                                                 std::size_t n_boot, std::uint64_t seed,
                                                 double disc_rate, unsigned threads = 1) {
    const PathCube cube = simulate_paths(model, grid, n_paths, seed, threads);
    const ValueMatrix values = value_netting_set(ns, cube, model, disc_rate, threads);
    std::vector<StepMoments> out;
    out.reserve(grid.n_obs());
    std::vector<double> column(values.n_paths);
    for (std::size_t k = 0; k < grid.n_obs(); ++k) {
        for (std::size_t p = 0; p < values.n_paths; ++p)
            column[p] = values(p, TimeGrid::obs_column(k));
        StepMoments sm;
        sm.t = grid.obs_times[k];
        sm.report = moment_diagnostics(column, n_boot, derive_seed(seed, 0x6d6f6dull /*"mom"*/, k));
        out.push_back(std::move(sm));
    }
    return out;
}

} // namespace fim
