#pragma once

#include <cmath>
#include <span>

#include "fim/common.hpp"
#include "fim/stats.hpp"

namespace fim {

// Flat deterministic-credit inputs for the MVA integral. The carry spread on
// posted IM is (1 - R_C) lambda_fund - S_I; survival of both parties and
// risk-free discounting decay the profile at rate r + lambda_B + lambda_C.
struct MvaInputs {
    double r = 0.0;           // risk-free rate /yr
    double lambda_b = 0.0;    // bank hazard rate /yr
    double lambda_c = 0.0;    // counterparty hazard rate /yr
    double lambda_fund = 0.0; // funding spread /yr
    double im_spread = 0.0;   // spread received on posted IM /yr
    double recovery = 0.0;    // counterparty recovery in [0,1]

    void validate() const {
        require(lambda_b >= 0.0 && lambda_c >= 0.0, "mva: hazard rates must be nonnegative");
        require(recovery >= 0.0 && recovery <= 1.0, "mva: recovery must lie in [0,1]");
        check_finite(r, "mva r");
        check_finite(lambda_fund, "mva lambda_fund");
        check_finite(im_spread, "mva im_spread");
    }

    double carry_spread() const { return (1.0 - recovery) * lambda_fund - im_spread; }
    double decay_rate() const { return r + lambda_b + lambda_c; }
};

// Trapezoidal quadrature of
//   ((1-R_C) lambda_fund - S_I) e^{-(r+lambda_B+lambda_C) u} E[IM(u)]
// over the profile's time grid, valued at t = 0.
inline double mva_deterministic(std::span<const double> profile, std::span<const double> times,
                                MvaInputs inp) {
    inp.validate();
    require(profile.size() == times.size(), "mva_deterministic: profile/grid length mismatch");
    require(!profile.empty(), "mva_deterministic: empty profile");
    for (double im : profile) require(im >= 0.0, "mva_deterministic: profile must be nonnegative");

    const double spread = inp.carry_spread();
    const double a = inp.decay_rate();

    CompensatedSum integral;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        require(dt > 0.0, "mva_deterministic: times must be strictly increasing");
        const double f0 = spread * std::exp(-a * times[k - 1]) * profile[k - 1];
        const double f1 = spread * std::exp(-a * times[k]) * profile[k];
        integral.add(0.5 * dt * (f0 + f1));
    }
    return integral.value();
}

} // namespace fim
