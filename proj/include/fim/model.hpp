#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "fim/common.hpp"

namespace fim {

// Single-factor risk-factor dynamics with exact Gaussian transition densities.
// Both variants have independent increments, hence are Markov; exact-step
// sampling keeps discretization error out of the oracle-vs-approximator
// comparison.

struct GbmParams {
    double s0 = 0.0;
    double drift = 0.0;
    double vol = 0.0;

    void validate() const {
        require(s0 > 0.0, "gbm: s0 must be positive");
        require(vol >= 0.0, "gbm: vol must be nonnegative");
        check_finite(drift, "gbm drift");
    }
};

struct OuParams {
    double x0 = 0.0;
    double kappa = 0.0; // mean-reversion speed
    double theta = 0.0; // long-run level
    double vol = 0.0;

    void validate() const {
        require(kappa > 0.0, "ou: kappa must be positive");
        require(vol >= 0.0, "ou: vol must be nonnegative");
        check_finite(x0, "ou x0");
        check_finite(theta, "ou theta");
    }
};

using ModelSpec = std::variant<GbmParams, OuParams>;

inline void validate(const ModelSpec& model) {
    std::visit([](const auto& m) { m.validate(); }, model);
}

inline double initial_state(const ModelSpec& model) {
    if (const auto* gbm = std::get_if<GbmParams>(&model)) return gbm->s0;
    return std::get<OuParams>(model).x0;
}

inline bool is_gbm(const ModelSpec& model) { return std::holds_alternative<GbmParams>(model); }

inline std::string model_name(const ModelSpec& model) {
    return is_gbm(model) ? "gbm" : "ou";
}

// Exact one-step transition given a standard normal draw z.
//   GBM: x' = x exp((mu - vol^2/2) dt + vol sqrt(dt) z)
//   OU:  x' = theta + (x - theta) e^{-kappa dt} + vol sqrt((1 - e^{-2 kappa dt}) / (2 kappa)) z
inline double transition(const ModelSpec& model, double x, double dt, double z) {
    if (const auto* gbm = std::get_if<GbmParams>(&model)) {
        const double v = gbm->vol;
        return x * std::exp((gbm->drift - 0.5 * v * v) * dt + v * std::sqrt(dt) * z);
    }
    const auto& ou = std::get<OuParams>(model);
    const double decay = std::exp(-ou.kappa * dt);
    const double var = ou.vol * ou.vol * (-std::expm1(-2.0 * ou.kappa * dt)) / (2.0 * ou.kappa);
    return ou.theta + (x - ou.theta) * decay + std::sqrt(var) * z;
}

} // namespace fim
