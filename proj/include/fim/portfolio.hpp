#pragma once

#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "fim/common.hpp"
#include "fim/model.hpp"
#include "fim/parallel.hpp"
#include "fim/sde.hpp"
#include "fim/stats.hpp"
#include "fim/time_grid.hpp"

namespace fim {

// Simple instruments with closed-form prices given the simulated state.
// Pricing is always analytic: the nested-MC cost stays in the state dimension.

struct ForwardContract {
    double strike = 0.0;
    double maturity = 0.0;
    double notional = 1.0;
};

// Black-Scholes call on the GBM factor, priced with its own vol.
struct EuropeanCall {
    double strike = 0.0;
    double maturity = 0.0;
    double pricing_vol = 0.0;
    double notional = 1.0;
};

// Zero-coupon bond under the OU (Vasicek) short rate, affine closed form.
struct ZeroCouponBondOu {
    double maturity = 0.0;
    double notional = 1.0;
};

using Instrument = std::variant<ForwardContract, EuropeanCall, ZeroCouponBondOu>;

struct NettingSet {
    std::vector<Instrument> instruments;
};

inline double instrument_maturity(const Instrument& instr) {
    return std::visit([](const auto& i) { return i.maturity; }, instr);
}

inline double instrument_notional(const Instrument& instr) {
    return std::visit([](const auto& i) { return i.notional; }, instr);
}

namespace detail {

inline double black_scholes_call(double spot, double strike, double rate, double vol, double tau) {
    if (tau <= 0.0) return std::max(spot - strike, 0.0);
    if (vol <= 0.0 || strike <= 0.0)
        return std::max(spot - strike * std::exp(-rate * tau), 0.0);
    const double vol_sqrt_tau = vol * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * tau) / vol_sqrt_tau;
    const double d2 = d1 - vol_sqrt_tau;
    return spot * normal_cdf(d1) - strike * std::exp(-rate * tau) * normal_cdf(d2);
}

// Vasicek bond factors: P(t,T) = exp(A(tau) - B(tau) x_t), tau = T - t.
inline double vasicek_bond(const OuParams& ou, double x, double tau) {
    const double b = -std::expm1(-ou.kappa * tau) / ou.kappa;
    const double sig2 = ou.vol * ou.vol;
    const double a = (ou.theta - 0.5 * sig2 / (ou.kappa * ou.kappa)) * (b - tau) -
                     0.25 * sig2 * b * b / ou.kappa;
    return std::exp(a - b * x);
}

} // namespace detail

// Value of one instrument given the factor state at time t. The discount rate
// for the forward's strike leg and the call comes from run configuration; the
// OU bond discounts through its own short-rate parameters.
inline double value(const Instrument& instr, double state, double t, const ModelSpec& model,
                    double disc_rate) {
    require(t <= instrument_maturity(instr) + 1e-12, "value: valuation time beyond instrument maturity");
    const double notional = instrument_notional(instr);
    require(notional != 0.0 && std::isfinite(notional), "value: notional must be finite nonzero");

    if (const auto* fwd = std::get_if<ForwardContract>(&instr)) {
        require(is_gbm(model), "value: ForwardContract requires the GBM model");
        const double tau = std::max(fwd->maturity - t, 0.0);
        return fwd->notional * (state - fwd->strike * std::exp(-disc_rate * tau));
    }
    if (const auto* call = std::get_if<EuropeanCall>(&instr)) {
        require(is_gbm(model), "value: EuropeanCall requires the GBM model");
        const double tau = call->maturity - t;
        return call->notional *
               detail::black_scholes_call(state, call->strike, disc_rate, call->pricing_vol, tau);
    }
    const auto& zcb = std::get<ZeroCouponBondOu>(instr);
    require(!is_gbm(model), "value: ZeroCouponBondOu requires the OU model");
    const double tau = std::max(zcb.maturity - t, 0.0);
    return zcb.notional * detail::vasicek_bond(std::get<OuParams>(model), state, tau);
}

inline double value_netting_set_at(const NettingSet& ns, double state, double t,
                                   const ModelSpec& model, double disc_rate) {
    double total = 0.0;
    for (const auto& instr : ns.instruments) total += value(instr, state, t, model, disc_rate);
    return total;
}

// Netting-set values on every (path, sample time) node of a cube.
struct ValueMatrix {
    std::size_t n_paths = 0;
    std::vector<double> times; // interleaved sample times, from the cube's grid
    std::vector<double> v;     // path-major

    double operator()(std::size_t path, std::size_t time_idx) const {
        return v[path * times.size() + time_idx];
    }
    double& at(std::size_t path, std::size_t time_idx) { return v[path * times.size() + time_idx]; }
};

inline ValueMatrix value_netting_set(const NettingSet& ns, const PathCube& cube,
                                     const ModelSpec& model, double disc_rate,
                                     unsigned threads = 1) {
    require(!ns.instruments.empty(), "value_netting_set: netting set must be non-empty");
    const double horizon = cube.grid.last_sample_time();
    for (const auto& instr : ns.instruments)
        require(instrument_maturity(instr) >= horizon,
                "value_netting_set: instrument matures before the grid horizon");

    ValueMatrix vm;
    vm.n_paths = cube.n_paths;
    vm.times = cube.grid.sample_times();
    vm.v.resize(cube.n_paths * vm.times.size());
    parallel_for(cube.n_paths, threads, [&](std::size_t p) {
        for (std::size_t j = 0; j < vm.times.size(); ++j) {
            const double val = value_netting_set_at(ns, cube(p, j), vm.times[j], model, disc_rate);
            if (!std::isfinite(val)) throw numeric_error("value_netting_set: non-finite value");
            vm.at(p, j) = val;
        }
    });
    return vm;
}

} // namespace fim
