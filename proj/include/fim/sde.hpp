#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fim/common.hpp"
#include "fim/model.hpp"
#include "fim/parallel.hpp"
#include "fim/rng.hpp"
#include "fim/time_grid.hpp"

namespace fim {

// Counter streams: word 3 of the Philox counter separates outer-path draws
// from inner-cloud draws so the two never collide under one seed.
inline constexpr std::uint32_t kStreamOuter = 0;
inline constexpr std::uint32_t kStreamInner = 1;

// Outer-simulation risk-factor values, indexed (path, sample time, factor).
// Sample times interleave each observation time t_k with t_k + mpor.
struct PathCube {
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::size_t n_factors = 1;
    std::vector<double> values; // path-major, then time, then factor
    TimeGrid grid;
    std::uint64_t seed = 0;

    double operator()(std::size_t path, std::size_t time_idx, std::size_t factor = 0) const {
        return values[(path * n_times + time_idx) * n_factors + factor];
    }
    double& at(std::size_t path, std::size_t time_idx, std::size_t factor = 0) {
        return values[(path * n_times + time_idx) * n_factors + factor];
    }
};

// Exact-transition path simulation over the interleaved sample times.
// Draw (path p, interval j) is normal_draw(seed, stream=outer, p, j): paths are
// independent substreams and the cube is bit-identical for any thread count.
inline PathCube simulate_paths(const ModelSpec& model, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, unsigned threads = 1) {
    validate(model);
    grid.validate();
    require(n_paths >= 1, "simulate_paths: n_paths must be at least 1");

    const std::vector<double> times = grid.sample_times();
    PathCube cube;
    cube.n_paths = n_paths;
    cube.n_times = times.size();
    cube.n_factors = 1;
    cube.grid = grid;
    cube.seed = seed;
    cube.values.resize(n_paths * times.size());

    const double x0 = initial_state(model);
    parallel_for(n_paths, threads, [&](std::size_t p) {
        double x = x0;
        double t = 0.0;
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double dt = times[j] - t;
            if (dt > 0.0) {
                const double z = normal_draw(seed, kStreamOuter, static_cast<std::uint32_t>(p),
                                             static_cast<std::uint32_t>(j));
                x = transition(model, x, dt, z);
            }
            cube.at(p, j) = x;
            t = times[j];
        }
    });
    return cube;
}

// n_inner conditional draws of the state at t + delta given state at t, using
// the same transition law as simulate_paths. Draw i uses the inner stream with
// counter word i; callers hand each node its own derived seed.
inline std::vector<double> simulate_inner(const ModelSpec& model, double state, double t,
                                          double delta, std::size_t n_inner, std::uint64_t seed) {
    validate(model);
    require(n_inner >= 2, "simulate_inner: n_inner must be at least 2");
    require(delta > 0.0, "simulate_inner: delta must be positive");
    check_finite(state, "simulate_inner state");
    (void)t; // the transition law is time-homogeneous; t identifies the node for the caller

    std::vector<double> terminal(n_inner);
    for (std::size_t i = 0; i < n_inner; ++i) {
        const double z = normal_draw(seed, kStreamInner, static_cast<std::uint32_t>(i));
        terminal[i] = transition(model, state, delta, z);
    }
    return terminal;
}

} // namespace fim
