#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fim/common.hpp"
#include "fim/sde.hpp"
#include "fim/stats.hpp"

namespace {

constexpr double kMpor10d = 10.0 / 365.0;

double sample_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = fim::mean(a), mb = fim::mean(b);
    fim::CompensatedSum sab, saa, sbb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab.add((a[i] - ma) * (b[i] - mb));
        saa.add((a[i] - ma) * (a[i] - ma));
        sbb.add((b[i] - mb) * (b[i] - mb));
    }
    return sab.value() / std::sqrt(saa.value() * sbb.value());
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

TEST(SimulatePathsTest, DegenerateGbmStaysAtSpot) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.0, 0.0};
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    const fim::PathCube cube = fim::simulate_paths(model, grid, 50, 7);
    for (std::size_t p = 0; p < cube.n_paths; ++p)
        for (std::size_t j = 0; j < cube.n_times; ++j) EXPECT_DOUBLE_EQ(cube(p, j), 100.0);
}

// Driftless GBM is a martingale: E[S_t] = s0, checked within 3 standard errors.
TEST(SimulatePathsTest, DriftlessGbmIsMartingale) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.0, 0.2};
    const fim::TimeGrid grid = fim::build_time_grid(1.0 + 2.0 * kMpor10d, 0.25, kMpor10d);
    ASSERT_EQ(grid.obs_times.size(), 5u); // includes t = 1.0
    const std::size_t n_paths = 100000;
    const fim::PathCube cube = fim::simulate_paths(model, grid, n_paths, 20240101);

    std::vector<double> terminal(n_paths);
    const std::size_t col = fim::TimeGrid::obs_column(4);
    for (std::size_t p = 0; p < n_paths; ++p) terminal[p] = cube(p, col);
    const double se = fim::standard_error(terminal);
    EXPECT_NEAR(fim::mean(terminal), 100.0, 3.0 * se);
}

TEST(SimulatePathsTest, NoiselessOuDecaysExponentially) {
    const fim::ModelSpec model = fim::OuParams{5.0, 1.0, 0.0, 0.0};
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    const fim::PathCube cube = fim::simulate_paths(model, grid, 3, 1);
    const auto ts = grid.sample_times();
    for (std::size_t j = 0; j < ts.size(); ++j)
        EXPECT_NEAR(cube(0, j), 5.0 * std::exp(-ts[j]), 1e-12);
}

TEST(SimulatePathsTest, GbmPathsStayPositive) {
    const fim::ModelSpec model = fim::GbmParams{100.0, -0.5, 0.8};
    const fim::TimeGrid grid = fim::build_time_grid(2.0, 0.5, kMpor10d);
    const fim::PathCube cube = fim::simulate_paths(model, grid, 2000, 5);
    for (double v : cube.values) {
        ASSERT_TRUE(std::isfinite(v));
        ASSERT_GT(v, 0.0);
    }
}

TEST(SimulatePathsTest, BitIdenticalAcrossThreadCounts) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.05, 0.3};
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    const fim::PathCube one = fim::simulate_paths(model, grid, 1000, 99, 1);
    const fim::PathCube four = fim::simulate_paths(model, grid, 1000, 99, 4);
    const fim::PathCube eight = fim::simulate_paths(model, grid, 1000, 99, 8);
    EXPECT_EQ(one.values, four.values);
    EXPECT_EQ(one.values, eight.values);
    const fim::PathCube other_seed = fim::simulate_paths(model, grid, 1000, 100, 4);
    EXPECT_NE(one.values, other_seed.values);
}

TEST(SimulatePathsTest, RejectsBadArguments) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.0, 0.2};
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    EXPECT_THROW(fim::simulate_paths(model, grid, 0, 1), fim::validation_error);
    EXPECT_THROW(fim::simulate_paths(fim::GbmParams{-1.0, 0.0, 0.2}, grid, 10, 1),
                 fim::validation_error);
    EXPECT_THROW(fim::simulate_paths(fim::OuParams{0.0, 0.0, 0.0, 0.1}, grid, 10, 1),
                 fim::validation_error);
}

// Log-returns of GBM over disjoint intervals are independent; the sample
// correlation at 1e6 paths should vanish.
TEST(SdeInvariantTest, IndependentIncrements) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.0, 0.2};
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    const std::size_t n = 1000000;
    const fim::PathCube cube = fim::simulate_paths(model, grid, n, 31415, 0);

    std::vector<double> r1(n), r2(n);
    const std::size_t c0 = fim::TimeGrid::obs_column(0);
    const std::size_t c1 = fim::TimeGrid::obs_column(1);
    const std::size_t c2 = fim::TimeGrid::obs_column(2);
    for (std::size_t p = 0; p < n; ++p) {
        r1[p] = std::log(cube(p, c1) / cube(p, c0));
        r2[p] = std::log(cube(p, c2) / cube(p, c1));
    }
    EXPECT_LT(std::abs(sample_correlation(r1, r2)), 0.02);
}

// simulate_inner must draw from the same transition law as simulate_paths:
// two-sample KS on the (t_k, t_k + mpor] increment below the 1% critical value
// 1.6276 sqrt(2/n) at n = 1e4 per side.
TEST(SdeInvariantTest, InnerDrawsMatchOuterIncrementDistribution) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.03, 0.25};
    const fim::TimeGrid grid = fim::build_time_grid(0.3, 0.25, kMpor10d);
    const std::size_t n = 10000;
    const fim::PathCube cube = fim::simulate_paths(model, grid, n, 777, 0);

    // outer increment ratios over (t_1, t_1 + mpor]
    std::vector<double> outer(n);
    const std::size_t ct = fim::TimeGrid::obs_column(1);
    const std::size_t cd = fim::TimeGrid::mpor_column(1);
    for (std::size_t p = 0; p < n; ++p) outer[p] = cube(p, cd) / cube(p, ct);

    // inner draws from one fixed state, expressed as the same ratio
    const double state = 93.7;
    std::vector<double> inner =
        fim::simulate_inner(model, state, 0.25, kMpor10d, n, fim::derive_seed(777, 1, 1));
    for (double& v : inner) v /= state;

    EXPECT_LT(two_sample_ks(outer, inner), 1.6276236307187293 * std::sqrt(2.0 / n));
}

TEST(SimulateInnerTest, DegenerateGbmGrowsAtDrift) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.05, 0.0};
    const auto draws = fim::simulate_inner(model, 100.0, 0.5, 0.5, 10, 3);
    for (double v : draws) EXPECT_NEAR(v, 100.0 * std::exp(0.05 * 0.5), 1e-10);
}

// OU conditional mean from the long-run level stays at the level.
TEST(SimulateInnerTest, OuFromThetaKeepsMean) {
    const fim::ModelSpec model = fim::OuParams{0.0, 2.0, 1.5, 0.4};
    const std::size_t n = 100000;
    const auto draws = fim::simulate_inner(model, 1.5, 1.0, 0.25, n, 17);
    EXPECT_NEAR(fim::mean(draws), 1.5, 3.0 * fim::standard_error(draws));
}

TEST(SimulateInnerTest, RejectsBadArguments) {
    const fim::ModelSpec model = fim::GbmParams{100.0, 0.0, 0.2};
    EXPECT_THROW(fim::simulate_inner(model, 100.0, 0.0, 0.1, 1, 1), fim::validation_error);
    EXPECT_THROW(fim::simulate_inner(model, 100.0, 0.0, 0.0, 10, 1), fim::validation_error);
}

} // namespace
