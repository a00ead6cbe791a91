#pragma once

// Adaptive Dormand-Prince 5(4) integration with 4th-order dense output.
// Fixed tableau, PI step-size controller (safety 0.9, growth clamp [0.2, 5]).
// Deterministic: identical inputs give bit-identical trajectories.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "raps/dynamics.hpp" // IntegrationError

namespace raps {

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h0 = 0.0;    ///< initial step; 0 selects one automatically
    double h_max = 0.0; ///< max step; 0 means span length
    long max_steps = 10'000'000;

    void validate() const {
        if (!(rtol > 0.0) || rtol > 1e-3)
            throw std::invalid_argument("IntegratorConfig: rtol must be in (0, 1e-3]");
        if (!(atol > 0.0))
            throw std::invalid_argument("IntegratorConfig: atol must be positive");
        if (max_steps <= 0)
            throw std::invalid_argument("IntegratorConfig: max_steps must be positive");
    }
};

namespace dopri5 {
// Dormand-Prince RK5(4)7M coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded error weights (5th minus 4th order)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;
} // namespace dopri5

/// Dense trajectory: node states plus per-step interpolation coefficients.
/// Evaluation inside step k uses the quartic continuous extension
///   y(t0+q h) = r0 + q (r1 + (1-q)(r2 + q (r3 + (1-q) r4))).
template <int N>
struct Trajectory {
    using Vec = Eigen::Matrix<double, N, 1>;

    std::vector<double> t;                 ///< strictly increasing node times
    std::vector<Vec> y;                    ///< states at nodes
    std::vector<std::array<Vec, 5>> coef;  ///< one record per step

    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    const Vec& back() const { return y.back(); }
    std::size_t steps() const { return coef.size(); }

    Vec eval(double ti) const {
        if (t.size() < 2)
            return y.front();
        if (!(ti >= t.front() && ti <= t.back()))
            throw std::out_of_range("Trajectory::eval: time outside span");
        // locate step: first node > ti, step index is the one before
        auto it = std::upper_bound(t.begin(), t.end(), ti);
        std::size_t k = static_cast<std::size_t>(it - t.begin());
        if (k == 0) k = 1;
        if (k >= t.size()) k = t.size() - 1;
        k -= 1;
        const double h = t[k + 1] - t[k];
        const double q = (ti - t[k]) / h;
        const auto& r = coef[k];
        return r[0] + q * (r[1] + (1.0 - q) * (r[2] + q * (r[3] + (1.0 - q) * r[4])));
    }
};

/// Integrate y' = rhs(t, y) over [t0, t1] with dense output.
template <int N, typename RHS>
Trajectory<N> integrate(RHS&& rhs, double t0, double t1, const Eigen::Matrix<double, N, 1>& y0,
                        const IntegratorConfig& cfg = {}) {
    using Vec = Eigen::Matrix<double, N, 1>;
    using namespace dopri5;
    cfg.validate();
    if (!(t1 > t0))
        throw std::invalid_argument("integrate: t1 must exceed t0");
    if (!y0.allFinite())
        throw IntegrationError("integrate: non-finite initial state");

    const double span = t1 - t0;
    const double hmax = cfg.h_max > 0.0 ? std::min(cfg.h_max, span) : span;

    Trajectory<N> traj;
    traj.t.push_back(t0);
    traj.y.push_back(y0);

    double t = t0;
    Vec y = y0;
    Vec k1 = rhs(t, y);

    // initial step: Hairer-style first guess from the rhs magnitude
    double h = cfg.h0;
    if (h <= 0.0) {
        double d0 = 0.0, d1n = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1n += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1n = std::sqrt(d1n / N);
        h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1n;
        h = std::min(h, hmax);
    }

    const double expo = 0.2;       // 1/5
    const double pi_alpha = 0.7 / 5.0, pi_beta = 0.4 / 5.0;
    double err_prev = 1.0;
    long steps = 0;

    while (t < t1) {
        if (++steps > cfg.max_steps)
            throw IntegrationError("integrate: step budget exhausted");
        h = std::min(h, t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError("integrate: step size underflow");

        const Vec k2 = rhs(t + c2 * h, Vec(y + h * (a21 * k1)));
        const Vec k3 = rhs(t + c3 * h, Vec(y + h * (a31 * k1 + a32 * k2)));
        const Vec k4 = rhs(t + c4 * h, Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        const Vec k5 = rhs(t + c5 * h, Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const Vec k6 = rhs(t + h, Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const Vec y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = rhs(t + h, y1);

        if (!y1.allFinite())
            throw IntegrationError("integrate: state blow-up (non-finite)");

        const Vec ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (ev[i] / sc) * (ev[i] / sc);
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            // accept; store dense coefficients
            const Vec dy = y1 - y;
            std::array<Vec, 5> r;
            r[0] = y;
            r[1] = dy;
            r[2] = h * k1 - dy;
            r[3] = dy - h * k7 - r[2];
            r[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            traj.coef.push_back(std::move(r));

            t += h;
            y = y1;
            k1 = k7; // FSAL
            traj.t.push_back(t);
            traj.y.push_back(y);

            const double e_clip = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e_clip, -pi_alpha) * std::pow(err_prev, pi_beta);
            fac = std::clamp(fac, 0.2, 5.0);
            h = std::min(h * fac, hmax);
            err_prev = e_clip;
        } else {
            double fac = std::max(0.2, 0.9 * std::pow(err, -expo));
            h *= fac;
        }
    }
    return traj;
}

/// End state only; avoids storing the dense trajectory.
template <int N, typename RHS>
Eigen::Matrix<double, N, 1> integrate_end(RHS&& rhs, double t0, double t1,
                                          const Eigen::Matrix<double, N, 1>& y0,
                                          const IntegratorConfig& cfg = {}) {
    using Vec = Eigen::Matrix<double, N, 1>;
    using namespace dopri5;
    cfg.validate();
    if (!(t1 > t0))
        throw std::invalid_argument("integrate_end: t1 must exceed t0");

    const double span = t1 - t0;
    const double hmax = cfg.h_max > 0.0 ? std::min(cfg.h_max, span) : span;

    double t = t0;
    Vec y = y0;
    Vec k1 = rhs(t, y);

    double h = cfg.h0;
    if (h <= 0.0) {
        double d0 = 0.0, d1n = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1n += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1n = std::sqrt(d1n / N);
        h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1n;
        h = std::min(h, hmax);
    }

    const double expo = 0.2;
    const double pi_alpha = 0.7 / 5.0, pi_beta = 0.4 / 5.0;
    double err_prev = 1.0;
    long steps = 0;

    while (t < t1) {
        if (++steps > cfg.max_steps)
            throw IntegrationError("integrate_end: step budget exhausted");
        h = std::min(h, t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError("integrate_end: step size underflow");

        const Vec k2 = rhs(t + c2 * h, Vec(y + h * (a21 * k1)));
        const Vec k3 = rhs(t + c3 * h, Vec(y + h * (a31 * k1 + a32 * k2)));
        const Vec k4 = rhs(t + c4 * h, Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        const Vec k5 = rhs(t + c5 * h, Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const Vec k6 = rhs(t + h, Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const Vec y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = rhs(t + h, y1);

        if (!y1.allFinite())
            throw IntegrationError("integrate_end: state blow-up (non-finite)");

        const Vec ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (ev[i] / sc) * (ev[i] / sc);
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            t += h;
            y = y1;
            k1 = k7;
            const double e_clip = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e_clip, -pi_alpha) * std::pow(err_prev, pi_beta);
            fac = std::clamp(fac, 0.2, 5.0);
            h = std::min(h * fac, hmax);
            err_prev = e_clip;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -expo));
        }
    }
    return y;
}

} // namespace raps
