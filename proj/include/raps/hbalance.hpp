#pragma once

// Harmonic balance for the truncated reduced system: assembly of the sigma and
// speed subsystems, the residual F(a), the Upsilon bifurcation function, the
// pitchfork-frequency solve and the quartic stability polynomial.
//
// Ansatz: phi   = a0 + a1 sin(wt) + a2 cos(wt)
//         sigma = b0 + b1 sin(wt) + b2 cos(wt)
//         v     = c0 + c1 sin(wt) + c2 cos(wt) + c3 sin(2wt) + c4 cos(2wt)
//
// The assembled forms follow the Galerkin projections of the truncated
// equations; the printed matrices carry two misprints (a dropped factor and a
// flipped forcing sign) that the quadrature oracle in the tests pins down.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "raps/asymptotics.hpp"
#include "raps/model.hpp"
#include "raps/poincare.hpp" // ConvergenceError

namespace raps {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Coefficient vectors of the harmonic-balance solution.
struct HarmonicAnsatz {
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    Vec5 c = Vec5::Zero();

    /// Signals reconstructed from the coefficients at time t.
    ReducedState signal(double t, double omega) const {
        const double s = std::sin(omega * t), co = std::cos(omega * t);
        const double s2 = std::sin(2.0 * omega * t), c2 = std::cos(2.0 * omega * t);
        return {a[0] + a[1] * s + a[2] * co,
                b[0] + b[1] * s + b[2] * co,
                c[0] + c[1] * s + c[2] * co + c[3] * s2 + c[4] * c2};
    }
};

struct SigmaSystem {
    Eigen::Matrix3d M_b;
    Eigen::Vector3d F_b;
    Eigen::Vector3d b;
};

/// Assemble and solve M_b(a) b = F_b(a) for the first-harmonic sigma
/// coefficients.
inline SigmaSystem hb_sigma_system(const Eigen::Vector3d& a, const DimlessParams& dp) {
    const double a0 = a[0], a1 = a[1], a2 = a[2];
    const double be = dp.beta, al2 = dp.alpha * dp.alpha;
    const double mu = dp.delta * dp.delta + dp.eta;
    const double w = dp.omega;
    const double a02 = a0 * a0, a12 = a1 * a1, a22 = a2 * a2;
    const double r2 = a12 + a22;

    SigmaSystem sys;
    const double quart = 4.0 * a02 + 3.0 * a12 + 3.0 * a22;
    const double m12 = a0 * a1 * be * (1.0 - quart / 24.0);
    const double m13 = a0 * a2 * be * (1.0 - quart / 24.0);
    sys.M_b(0, 0) = be * (a02 + a12 / 2.0 + a22 / 2.0) - 2.0 * be -
                    be / 96.0 *
                        (8.0 * a02 * a02 + 24.0 * a02 * a12 + 24.0 * a02 * a22 +
                         3.0 * a12 * a12 + 6.0 * a12 * a22 + 3.0 * a22 * a22) +
                    4.0 * al2 + 2.0;
    sys.M_b(0, 1) = m12;
    sys.M_b(0, 2) = m13;
    sys.M_b(1, 0) = -m12;
    sys.M_b(1, 1) = -2.0 * al2 + be - 1.0 +
                    be / 192.0 *
                        (8.0 * a02 * a02 + 36.0 * a02 * a12 + 12.0 * a02 * a22 +
                         5.0 * a12 * a12 + 6.0 * a12 * a22 + a22 * a22) -
                    be * (a02 / 2.0 + 3.0 * a12 / 8.0 + a22 / 8.0);
    sys.M_b(1, 2) = w * mu - a1 * a2 * be / 4.0 + a1 * a2 * be / 48.0 * (6.0 * a02 + r2);
    sys.M_b(2, 0) = -m13;
    sys.M_b(2, 1) = a1 * a2 * be / 48.0 * (6.0 * a02 + r2) - a1 * a2 * be / 4.0 - w * mu;
    sys.M_b(2, 2) = -2.0 * al2 + be - 1.0 +
                    be / 192.0 *
                        (8.0 * a02 * a02 + 12.0 * a02 * a12 + 36.0 * a02 * a22 + a12 * a12 +
                         6.0 * a12 * a22 + 5.0 * a22 * a22) -
                    be * (a02 / 2.0 + a12 / 8.0 + 3.0 * a22 / 8.0);

    // forcing; the common factor folds the phi-derivative feed-through
    const double K = 8.0 * a02 * a02 + 12.0 * a02 * r2 - 96.0 * a02 + r2 * r2 - 24.0 * r2 + 192.0;
    sys.F_b[0] = 0.0;
    sys.F_b[1] = -dp.A * dp.eta * w * w + be * w * a2 * K / 192.0;
    sys.F_b[2] = -be * w * a1 * K / 192.0;

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(sys.M_b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 1e-12 * smax)) {
        std::ostringstream msg;
        msg << "hb_sigma_system: M_b singular at a = (" << a0 << ", " << a1 << ", " << a2 << ")";
        throw ConvergenceError(msg.str());
    }
    sys.b = svd.solve(sys.F_b);
    return sys;
}

struct SpeedSystem {
    Mat5 M_c;
    Vec5 F_c;
    Vec5 c;
};

/// Speed-subsystem matrix; depends only on omega and is invertible for w > 0.
inline Mat5 hb_speed_matrix(double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("hb_speed_matrix: omega must be positive");
    Mat5 M = Mat5::Zero();
    M(0, 0) = 3.0;
    M(1, 1) = -0.5 * omega;
    M(1, 2) = -1.5;
    M(2, 1) = -1.5;
    M(2, 2) = 0.5 * omega;
    M(3, 3) = -omega;
    M(3, 4) = -1.5;
    M(4, 3) = -1.5;
    M(4, 4) = omega;
    return M;
}

/// Assemble and solve M_c c = F_c(a, b).
inline SpeedSystem hb_speed_system(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                   const DimlessParams& dp) {
    const double a0 = a[0], a1 = a[1], a2 = a[2];
    const double b0 = b[0], b1 = b[1], b2 = b[2];
    const double de = dp.delta;

    SpeedSystem sys;
    sys.M_c = hb_speed_matrix(dp.omega);
    sys.F_c[0] = (8 * a0 * a0 * a0 * b0 + 12 * a0 * a0 * a1 * b1 + 12 * a0 * a0 * a2 * b2 +
                  12 * a0 * a1 * a1 * b0 + 12 * a0 * a2 * a2 * b0 - 12 * a0 * b0 +
                  3 * a1 * a1 * a1 * b1 + 3 * a1 * a1 * a2 * b2 + 3 * a1 * a2 * a2 * b1 -
                  6 * a1 * b1 + 3 * a2 * a2 * a2 * b2 - 6 * a2 * b2 + 12 * de * b0 * b0 +
                  6 * de * b1 * b1 + 6 * de * b2 * b2) /
                 12.0;
    sys.F_c[1] = -(4 * a0 * a0 * a0 * b2 + 12 * a0 * a0 * a2 * b0 + 3 * a0 * a1 * a1 * b2 +
                   6 * a0 * a1 * a2 * b1 + 9 * a0 * a2 * a2 * b2 - 6 * a0 * b2 +
                   3 * a1 * a1 * a2 * b0 + 3 * a2 * a2 * a2 * b0 - 6 * a2 * b0 +
                   12 * de * b0 * b2) /
                 12.0;
    sys.F_c[2] = -(4 * a0 * a0 * a0 * b1 + 12 * a0 * a0 * a1 * b0 + 9 * a0 * a1 * a1 * b1 +
                   6 * a0 * a1 * a2 * b2 + 3 * a0 * a2 * a2 * b1 - 6 * a0 * b1 +
                   3 * a1 * a1 * a1 * b0 + 3 * a1 * a2 * a2 * b0 - 6 * a1 * b0 +
                   12 * de * b0 * b1) /
                 12.0;
    sys.F_c[3] = (6 * a0 * a0 * a1 * b1 - 6 * a0 * a0 * a2 * b2 + 6 * a0 * a1 * a1 * b0 -
                  6 * a0 * a2 * a2 * b0 + 2 * a1 * a1 * a1 * b1 - 3 * a1 * b1 -
                  2 * a2 * a2 * a2 * b2 + 3 * a2 * b2 + 3 * de * (b1 * b1 - b2 * b2)) /
                 12.0;
    sys.F_c[4] = -(6 * a0 * a0 * a1 * b2 + 6 * a0 * a0 * a2 * b1 + 12 * a0 * a1 * a2 * b0 +
                   a1 * a1 * a1 * b2 + 3 * a1 * a1 * a2 * b1 + 3 * a1 * a2 * a2 * b2 -
                   3 * a1 * b2 + a2 * a2 * a2 * b1 - 3 * a2 * b1 + 6 * de * b1 * b2) /
                 12.0;
    sys.c = sys.M_c.fullPivLu().solve(sys.F_c);
    return sys;
}

/// Self-consistent ansatz at given a: b = B(a), c = C(a).
inline HarmonicAnsatz hb_closure(const Eigen::Vector3d& a, const DimlessParams& dp) {
    HarmonicAnsatz h;
    h.a = a;
    h.b = hb_sigma_system(a, dp).b;
    h.c = hb_speed_system(a, h.b, dp).c;
    return h;
}

/// DC residual of the steering equation, the printed closed form.
inline double hb_f1(const HarmonicAnsatz& h, const DimlessParams& dp) {
    const double a0 = h.a[0], a1 = h.a[1], a2 = h.a[2];
    const double b0 = h.b[0], b1 = h.b[1], b2 = h.b[2];
    const double c0 = h.c[0], c1 = h.c[1], c2 = h.c[2], c3 = h.c[3], c4 = h.c[4];
    const double be = dp.beta;
    return a0 * a0 * a0 * c0 / 6.0 - a1 * c1 / 2.0 - a2 * c2 / 2.0 - a0 * a0 * b0 / 2.0 -
           a1 * a1 * b0 / 4.0 - a2 * a2 * b0 / 4.0 - a0 * c0 + a1 * a1 * a1 * c1 / 16.0 +
           a2 * a2 * a2 * c2 / 16.0 - b0 * (be - 1.0) - a0 * a1 * b1 / 2.0 - a0 * a2 * b2 / 2.0 +
           a0 * a1 * a1 * c0 / 4.0 + a0 * a2 * a2 * c0 / 4.0 + a0 * a0 * a1 * c1 / 4.0 +
           a1 * a2 * a2 * c1 / 16.0 + a0 * a0 * a2 * c2 / 4.0 - a0 * a1 * a1 * c4 / 8.0 +
           a1 * a1 * a2 * c2 / 16.0 + a0 * a2 * a2 * c4 / 8.0 + a0 * a1 * a2 * c3 / 4.0;
}

namespace hb_detail {

constexpr int kQuadPoints = 4096;

/// Residual of the truncated steering equation at time t under the ansatz.
inline double steering_residual(const HarmonicAnsatz& h, const DimlessParams& dp, double t) {
    const double w = dp.omega;
    const ReducedState z = h.signal(t, w);
    const double phid = w * (h.a[1] * std::cos(w * t) - h.a[2] * std::sin(w * t));
    const double phi = z.phi;
    return dp.beta * phid + z.v * (phi - phi * phi * phi / 6.0) -
           (1.0 - dp.beta - phi * phi / 2.0) * z.sigma;
}

} // namespace hb_detail

/// Residual vector F(a) = (F1, F2, F3): the closed-form DC component plus the
/// first-harmonic Galerkin projections of the steering equation, evaluated by
/// periodic trapezoid quadrature (4096 points, exact for these trig
/// polynomials).
inline Eigen::Vector3d hb_residual(const Eigen::Vector3d& a, const DimlessParams& dp) {
    const HarmonicAnsatz h = hb_closure(a, dp);
    const double tp = dp.period();
    const int n = hb_detail::kQuadPoints;
    double s_sin = 0.0, s_cos = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = tp * k / n;
        const double r = hb_detail::steering_residual(h, dp, t);
        s_sin += r * std::sin(dp.omega * t);
        s_cos += r * std::cos(dp.omega * t);
    }
    Eigen::Vector3d F;
    F[0] = hb_f1(h, dp);
    F[1] = -s_sin / n;
    F[2] = -s_cos / n;
    return F;
}

/// Upsilon(0, a1, a2) = dF1/da0 at a0 = 0; central difference exploits the
/// oddness of F1 in a0.
inline double upsilon(double a1, double a2, const DimlessParams& dp, double h = 1e-6) {
    const double Fp = hb_f1(hb_closure({h, a1, a2}, dp), dp);
    const double Fm = hb_f1(hb_closure({-h, a1, a2}, dp), dp);
    return (Fp - Fm) / (2.0 * h);
}

/// Pitchfork frequency from the 3-equation system {Upsilon = 0, F2 = 0,
/// F3 = 0} in (a1, a2, omega) with a0 = 0. The initial (a1, a2) comes from the
/// perturbation coefficients at omega_guess.
inline double pitchfork_frequency_hb(double delta, DimlessParams dp, double omega_guess,
                                     int itmax = 100) {
    dp.delta = delta;
    dp.omega = omega_guess;
    const PerturbationCoeffs pc = perturbation_coefficients(dp);
    Eigen::Vector3d x{pc.epsilon * pc.a1, pc.epsilon * pc.a2, omega_guess};

    auto eval = [&dp, delta](const Eigen::Vector3d& x) -> Eigen::Vector3d {
        DimlessParams d = dp;
        d.delta = delta;
        d.omega = x[2];
        const Eigen::Vector3d F = hb_residual({0.0, x[0], x[1]}, d);
        return {upsilon(x[0], x[1], d), F[1], F[2]};
    };

    Eigen::Vector3d F = eval(x);
    double fn = F.norm();
    for (int it = 0; it < itmax; ++it) {
        if (fn < 1e-13) break;
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            Eigen::Vector3d xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            J.col(j) = (eval(xp) - eval(xm)) / (2.0 * h);
        }
        const Eigen::Vector3d dx = J.fullPivLu().solve(-F);
        if (!dx.allFinite())
            throw ConvergenceError("pitchfork_frequency_hb: singular Jacobian");
        double lam = 1.0;
        Eigen::Vector3d x_new = x;
        Eigen::Vector3d F_new = F;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls) {
            x_new = x + lam * dx;
            if (x_new[2] > 0.0) {
                F_new = eval(x_new);
                if (F_new.norm() < fn) {
                    improved = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!improved) {
            std::ostringstream msg;
            msg << "pitchfork_frequency_hb: stalled at omega = " << x[2] << ", |F| = " << fn;
            throw ConvergenceError(msg.str());
        }
        x = x_new;
        F = F_new;
        fn = F.norm();
    }
    if (!(fn < 1e-11)) {
        std::ostringstream msg;
        msg << "pitchfork_frequency_hb: no convergence, last omega = " << x[2] << ", |F| = " << fn;
        throw ConvergenceError(msg.str());
    }
    return x[2];
}

enum class AsymptoticSource { B9_fixture, semi_numeric };

/// Quartic-in-omega^2 stability polynomial coefficients at a given delta.
/// The fixture carries the printed numeric coefficient set, valid for the
/// Table-1 ratio class (alpha = beta = 1/3, eta = 0.0118) with A ~ 0.1.
struct StabilityPolynomial {
    double d8 = 0.0, d6 = 0.0, d4 = 0.0, d2 = 0.0, d0 = 0.0;
    AsymptoticSource source = AsymptoticSource::B9_fixture;

    /// All positive real omega roots of d8 x^4 + d6 x^3 + d4 x^2 + d2 x + d0,
    /// x = omega^2.
    std::vector<double> positive_roots() const {
        Eigen::Matrix<double, 5, 1> coeffs; // ascending: d0 .. d8
        coeffs << d0, d2, d4, d6, d8;
        int deg = 4;
        while (deg > 0 && std::abs(coeffs[deg]) < 1e-30) --deg;
        if (deg == 0) return {};
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
        for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
        std::vector<double> out;
        for (int i = 0; i < deg; ++i) {
            const std::complex<double> x = es.eigenvalues()[i];
            if (std::abs(x.imag()) < 1e-8 * std::max(1.0, std::abs(x)) && x.real() > 0.0)
                out.push_back(std::sqrt(x.real()));
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline StabilityPolynomial b9_polynomial(double dl) {
    StabilityPolynomial p;
    p.source = AsymptoticSource::B9_fixture;
    const double d2_ = dl * dl, d3 = d2_ * dl, d4_ = d3 * dl, d5 = d4_ * dl, d6_ = d5 * dl,
                 d7 = d6_ * dl, d8_ = d7 * dl;
    p.d8 = -9.0195e-3 * d7 + 4.7409e-4 * d5 + 1.4956e-5 * d3 + 9.5651e-7 * dl;
    p.d6 = -1439.5 * d8_ - 3.5514e-2 * d7 - 67.943 * d6_ + 189.61 * d5 - 1.2026 * d4_ +
           4.48 * d3 - 9.4604e-3 * d2_ + 2.6596e-2 * dl - 2.7908e-5;
    p.d4 = -3238.8 * d8_ - 152.87 * d6_ + 2132.7 * d5 - 2277.4 * d4_ + 50.353 * d3 -
           53.705 * d2_ + 150.08 * dl - 0.3168;
    p.d2 = 3838.61 * d5 - 5118.1 * d4_ + 90.591 * d3 - 120.79 * d2_ + 1685.52 * dl - 899.37;
    p.d0 = 3032.907 * dl - 2021.98;
    return p;
}

/// Pitchfork frequency from the asymptotic routes. B9_fixture evaluates the
/// compiled polynomial and keeps the admissible root closest to omega_ref
/// (the HB value when available, else the neighbouring grid root).
/// semi_numeric substitutes the truncated expansions of the perturbation
/// coefficients into Upsilon and root-finds in omega near omega_ref.
inline double pitchfork_frequency_asymptotic(double delta, DimlessParams dp,
                                             AsymptoticSource source, double omega_ref) {
    if (!(delta > 0.0))
        throw std::invalid_argument("pitchfork_frequency_asymptotic: delta must be positive");
    dp.delta = delta;

    if (source == AsymptoticSource::B9_fixture) {
        const auto roots = b9_polynomial(delta).positive_roots();
        if (roots.empty())
            throw ConvergenceError("pitchfork_frequency_asymptotic: no admissible B9 root");
        double best = roots.front();
        for (double r : roots)
            if (std::abs(r - omega_ref) < std::abs(best - omega_ref)) best = r;
        return best;
    }

    // semi-numeric: truncated eps~ expansions of a1, a2 fed into Upsilon
    auto ups = [&](double om) {
        const double epst = std::sqrt(dp.delta * dp.delta + dp.eta);
        const double alt = dp.alpha / std::sqrt(epst);
        const double be = dp.beta;
        const double alt2 = alt * alt, alt4 = alt2 * alt2, alt6 = alt4 * alt2,
                     alt8 = alt4 * alt4, alt10 = alt8 * alt2;
        const double a1t = (-1.0 + be) / (4.0 * alt4 * be) -
                           om * om * (-1.0 + be) * epst * epst / (16.0 * alt8 * be);
        const double a2t = (be - 1.0) / (2.0 * om * alt2 * be * epst) -
                           om * epst * (be - 1.0) / (8.0 * alt6 * be) +
                           om * om * om * (-1.0 + be) * epst * epst * epst / (32.0 * alt10 * be);
        const double eps = dp.A * dp.eta * om * om;
        DimlessParams d = dp;
        d.omega = om;
        return upsilon(eps * a1t, eps * a2t, d);
    };
    const double lo_lim = std::max(0.5, 0.55 * omega_ref);
    const double hi_lim = 1.6 * omega_ref;
    const int ngrid = 120;
    double best_root = 0.0, best_dist = 1e300;
    double prev_om = lo_lim, prev_val = ups(lo_lim);
    for (int i = 1; i <= ngrid; ++i) {
        const double om = lo_lim + (hi_lim - lo_lim) * i / ngrid;
        const double val = ups(om);
        if (prev_val == 0.0 || prev_val * val < 0.0) {
            double a = prev_om, b = om, fa = prev_val;
            for (int it = 0; it < 80; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = ups(m);
                if (fa * fm <= 0.0)
                    b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            const double root = 0.5 * (a + b);
            if (std::abs(root - omega_ref) < best_dist) {
                best_dist = std::abs(root - omega_ref);
                best_root = root;
            }
        }
        prev_om = om;
        prev_val = val;
    }
    if (best_dist == 1e300)
        throw ConvergenceError(
            "pitchfork_frequency_asymptotic: semi-numeric Upsilon has no admissible root");
    return best_root;
}

} // namespace raps
