#pragma once

// Closed-form small-amplitude results for the symmetric periodic solution:
// first-order harmonic coefficients, leading-order mean speed and the optimal
// rotor COM placement. All formulas live in the dimensionless frame.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "raps/model.hpp"

namespace raps {

/// First-order orbit coefficients. phi1 = a1 sin + a2 cos, sigma1 = b1 sin +
/// b2 cos, v2 = c0 + c1 sin(2wt) + c2 cos(2wt); the physical signals carry
/// factors eps = A eta w^2 and eps^2 respectively.
struct PerturbationCoeffs {
    double q = 0.0;
    double b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double q1 = 0.0, q2 = 0.0;
    double epsilon = 0.0;
};

inline PerturbationCoeffs perturbation_coefficients(const DimlessParams& dp) {
    dp.validate();
    const double mu = dp.delta * dp.delta + dp.eta;
    if (!(mu > 0.0))
        throw std::invalid_argument("perturbation_coefficients: delta^2 + eta must be positive");
    if (!(dp.beta > 0.0) || !(dp.omega > 0.0))
        throw std::invalid_argument("perturbation_coefficients: beta and omega must be positive");

    PerturbationCoeffs pc;
    const double w = dp.omega;
    pc.q = 2.0 * dp.alpha * dp.alpha / mu;
    const double den = mu * (pc.q * pc.q + w * w);
    pc.b1 = pc.q / den;
    pc.b2 = -w / den;
    pc.a1 = (dp.beta - 1.0) / (dp.beta * den);
    pc.a2 = pc.q * (dp.beta - 1.0) / (dp.beta * w * den);
    pc.c0 = (dp.delta * pc.b1 * pc.b1 - pc.a1 * pc.b1 + dp.delta * pc.b2 * pc.b2 - pc.a2 * pc.b2) / 6.0;
    pc.q1 = dp.delta * pc.b1 * pc.b2 - 0.5 * (pc.a2 * pc.b1 + pc.a1 * pc.b2);
    pc.q2 = 0.5 * (dp.delta * pc.b2 * pc.b2 - pc.a2 * pc.b2 + pc.a1 * pc.b1 - dp.delta * pc.b1 * pc.b1);
    pc.c1 = (3.0 * pc.q1 + 2.0 * pc.q2 * w) / (9.0 + 4.0 * w * w);
    pc.c2 = (3.0 * pc.q2 - 2.0 * pc.q1 * w) / (9.0 + 4.0 * w * w);
    pc.epsilon = dp.A * dp.eta * w * w;
    return pc;
}

/// Leading-order mean speed A^2 eta^2 w^4 delta / (6 [4 alpha^4 + (delta^2+eta)^2 w^2]).
inline double mean_speed_asymptotic(const DimlessParams& dp) {
    dp.validate();
    const double w2 = dp.omega * dp.omega;
    const double mu = dp.delta * dp.delta + dp.eta;
    const double denom = 6.0 * (4.0 * std::pow(dp.alpha, 4) + mu * mu * w2);
    return dp.A * dp.A * dp.eta * dp.eta * w2 * w2 * dp.delta / denom;
}

struct OptimalDelta {
    double delta_opt = 0.0;
    double v_bar_max = 0.0;
    bool interior = false; ///< false when the radicand is non-positive
};

/// Location and value of the single interior maximum of the mean speed over
/// delta, when it exists.
inline OptimalDelta optimal_delta(const DimlessParams& dp) {
    dp.validate();
    OptimalDelta res;
    const double w = dp.omega;
    const double radicand =
        std::sqrt(12.0 * std::pow(dp.alpha, 4) + 4.0 * dp.eta * dp.eta * w * w) / (3.0 * w) -
        dp.eta / 3.0;
    if (!(radicand > 0.0)) return res;
    res.delta_opt = std::sqrt(radicand);
    DimlessParams at = dp;
    at.delta = res.delta_opt;
    res.v_bar_max = mean_speed_asymptotic(at);
    res.interior = true;
    return res;
}

/// Reconstructed first-order steady-state signals at time t.
inline ReducedState perturbation_signal(const PerturbationCoeffs& pc, const DimlessParams& dp,
                                        double t) {
    const double w = dp.omega;
    const double e = pc.epsilon;
    ReducedState z;
    z.phi = e * (pc.a1 * std::sin(w * t) + pc.a2 * std::cos(w * t));
    z.sigma = e * (pc.b1 * std::sin(w * t) + pc.b2 * std::cos(w * t));
    z.v = e * e * (pc.c0 + pc.c1 * std::sin(2.0 * w * t) + pc.c2 * std::cos(2.0 * w * t));
    return z;
}

} // namespace raps
