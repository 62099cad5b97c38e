#pragma once

#include <cstddef>
#include <vector>

#include "fim/common.hpp"

namespace fim {

// Observation times plus the margin period of risk. Each observation t_k is
// paired with the off-grid point t_k + mpor, kept explicit because the margin
// period (days) is much shorter than typical observation spacing (months).
//
// Simulation and valuation work on the interleaved "sample times"
//   [t_0, t_0+mpor, t_1, t_1+mpor, ...]
// which is strictly increasing whenever 0 < mpor < min grid spacing.
struct TimeGrid {
    std::vector<double> obs_times;
    double mpor = 0.0;

    std::size_t n_obs() const { return obs_times.size(); }

    // Column index of t_k / t_k + mpor in any (path, sample-time) matrix.
    static std::size_t obs_column(std::size_t k) { return 2 * k; }
    static std::size_t mpor_column(std::size_t k) { return 2 * k + 1; }

    std::vector<double> sample_times() const {
        std::vector<double> ts;
        ts.reserve(2 * obs_times.size());
        for (double t : obs_times) {
            ts.push_back(t);
            ts.push_back(t + mpor);
        }
        return ts;
    }

    double last_sample_time() const { return obs_times.back() + mpor; }

    void validate() const {
        require(!obs_times.empty(), "TimeGrid: obs_times must be non-empty");
        require(mpor > 0.0, "TimeGrid: mpor must be positive");
        require(obs_times.front() >= 0.0, "TimeGrid: observation times must be nonnegative");
        for (std::size_t k = 1; k < obs_times.size(); ++k) {
            require(obs_times[k] > obs_times[k - 1], "TimeGrid: obs_times must be strictly increasing");
            require(obs_times[k - 1] + mpor < obs_times[k],
                    "TimeGrid: mpor must be smaller than the grid spacing");
        }
    }
};

// Uniform grid {0, step, 2 step, ...} truncated so that t + mpor <= horizon.
inline TimeGrid build_time_grid(double horizon, double step, double mpor) {
    require(horizon > 0.0, "build_time_grid: horizon must be positive");
    require(step > 0.0, "build_time_grid: step must be positive");
    require(mpor > 0.0, "build_time_grid: mpor must be positive");
    require(mpor < step, "build_time_grid: mpor must be smaller than step");
    require(step <= horizon, "build_time_grid: step must not exceed horizon");

    TimeGrid grid;
    grid.mpor = mpor;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * step;
        if (t + mpor > horizon) break;
        grid.obs_times.push_back(t);
    }
    grid.validate();
    return grid;
}

} // namespace fim
