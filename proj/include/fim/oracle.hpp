#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fim/common.hpp"
#include "fim/model.hpp"
#include "fim/parallel.hpp"
#include "fim/portfolio.hpp"
#include "fim/sde.hpp"
#include "fim/stats.hpp"
#include "fim/time_grid.hpp"

namespace fim {

// Ground-truth forward IM by brute-force nested Monte Carlo: an inner cloud of
// re-simulations at every (path, observation time) node of the outer run.

struct ImSurface {
    std::size_t n_outer = 0;
    std::size_t n_inner = 0;
    double quantile_p = 0.0;
    std::vector<double> obs_times;
    std::vector<double> im;      // (path, obs time), path-major, nonnegative
    std::vector<double> profile; // per-time average over paths

    double operator()(std::size_t path, std::size_t k) const {
        return im[path * obs_times.size() + k];
    }
    double& at(std::size_t path, std::size_t k) { return im[path * obs_times.size() + k]; }
};

// Per-time column means of the surface.
inline std::vector<double> expected_im_profile(const ImSurface& surface) {
    const std::size_t n_times = surface.obs_times.size();
    std::vector<double> profile(n_times, 0.0);
    for (std::size_t k = 0; k < n_times; ++k) {
        CompensatedSum sum;
        for (std::size_t p = 0; p < surface.n_outer; ++p) sum.add(surface(p, k));
        profile[k] = sum.value() / static_cast<double>(surface.n_outer);
    }
    return profile;
}

// Tail-quantile IM of one PnL sample. Posted IM (p >= 0.5) is the upper-tail
// quantile floored at zero; received IM (p < 0.5) is reported as the magnitude
// of the lower-tail quantile so the surface stays nonnegative.
inline double im_from_pnl(std::span<const double> pnl, double p) {
    const double q = empirical_quantile(pnl, p);
    return p < 0.5 ? std::max(0.0, -q) : std::max(0.0, q);
}

// Nested MC over every outer node: inner states are drawn at t_k + mpor from
// the node's state, the PnL of each inner draw is V(t_k + mpor) - V(omega, t_k),
// and IM is the empirical p-quantile of that cloud. Inner seeds derive from
// (seed, path, time) so nodes are independent and any parallel schedule gives
// the same surface.
inline ImSurface brute_force_im(const ModelSpec& model, const NettingSet& ns, const TimeGrid& grid,
                                std::size_t n_outer, std::size_t n_inner, double p,
                                std::uint64_t seed, double disc_rate, unsigned threads = 1) {
    require(n_outer >= 1, "brute_force_im: n_outer must be at least 1");
    require(n_inner >= 100, "brute_force_im: n_inner must be at least 100 (tail statistic)");
    require(p > 0.0 && p < 1.0, "brute_force_im: p must lie in (0,1)");

    const PathCube cube = simulate_paths(model, grid, n_outer, seed, threads);
    const ValueMatrix values = value_netting_set(ns, cube, model, disc_rate, threads);

    ImSurface surface;
    surface.n_outer = n_outer;
    surface.n_inner = n_inner;
    surface.quantile_p = p;
    surface.obs_times = grid.obs_times;
    surface.im.resize(n_outer * grid.n_obs());

    const std::size_t n_nodes = n_outer * grid.n_obs();
    parallel_for(n_nodes, threads, [&](std::size_t node) {
        const std::size_t path = node / grid.n_obs();
        const std::size_t k = node % grid.n_obs();
        const double t = grid.obs_times[k];
        const double state = cube(path, TimeGrid::obs_column(k));
        const double v_now = values(path, TimeGrid::obs_column(k));

        const std::uint64_t node_seed = derive_seed(seed, path, k);
        const std::vector<double> inner_states =
            simulate_inner(model, state, t, grid.mpor, n_inner, node_seed);

        std::vector<double> pnl(n_inner);
        for (std::size_t i = 0; i < n_inner; ++i)
            pnl[i] = value_netting_set_at(ns, inner_states[i], t + grid.mpor, model, disc_rate) - v_now;

        surface.at(path, k) = im_from_pnl(pnl, p);
    });

    surface.profile = expected_im_profile(surface);
    return surface;
}

} // namespace fim
