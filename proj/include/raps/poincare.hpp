#pragma once

// Stroboscopic Poincare map of the forced reduced system, periodic-orbit
// solving (plain and symmetry-constrained), Floquet multipliers, period
// averages and the stability-boundary bisection.
//
// Phase convention: t = 0 at psi = 0 with psi_dot > 0.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "raps/dynamics.hpp"
#include "raps/integrator.hpp"
#include "raps/model.hpp"

namespace raps {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reversal symmetry R = diag(-1,-1,+1) on (phi, sigma, v).
inline Eigen::Vector3d reversal(const Eigen::Vector3d& z) { return {-z[0], -z[1], z[2]}; }

namespace detail {
inline auto guarded_rhs(const DimlessParams& dp) {
    return [dp](double t, const Eigen::Vector3d& z) {
        check_chart(z[0]);
        return rhs_dimless(t, z, dp);
    };
}
} // namespace detail

/// Flow of the dimensionless system over [0, frac * t_p].
inline Eigen::Vector3d flow_map(const Eigen::Vector3d& z, const DimlessParams& dp,
                                double frac = 1.0, const IntegratorConfig& cfg = {}) {
    return integrate_end<3>(detail::guarded_rhs(dp), 0.0, frac * dp.period(), z, cfg);
}

/// Stroboscopic map P(z): integrate one forcing period from phase 0.
inline Eigen::Vector3d stroboscopic_map(const Eigen::Vector3d& z, const DimlessParams& dp,
                                        const IntegratorConfig& cfg = {}) {
    dp.validate();
    return flow_map(z, dp, 1.0, cfg);
}

/// Central finite-difference Jacobian of the stroboscopic map,
/// step 1e-6 * max(1, |z_i|) per component.
inline Eigen::Matrix3d map_jacobian_fd(const Eigen::Vector3d& z, const DimlessParams& dp,
                                       const IntegratorConfig& cfg = {}) {
    Eigen::Matrix3d J;
    for (int j = 0; j < 3; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[j]));
        Eigen::Vector3d zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        J.col(j) = (stroboscopic_map(zp, dp, cfg) - stroboscopic_map(zm, dp, cfg)) / (2.0 * h);
    }
    return J;
}

/// Map Jacobian from the variational equations: integrate X' = Df(t,z) X
/// along the orbit with X(0) = I.
inline Eigen::Matrix3d map_jacobian_variational(const Eigen::Vector3d& z, const DimlessParams& dp,
                                                const IntegratorConfig& cfg = {}) {
    using V12 = Eigen::Matrix<double, 12, 1>;
    auto rhs = [&dp](double t, const V12& y) {
        const Eigen::Vector3d zz = y.head<3>();
        check_chart(zz[0]);
        Eigen::Matrix3d X;
        for (int c = 0; c < 3; ++c) X.col(c) = y.segment<3>(3 + 3 * c);
        const Eigen::Matrix3d dX = rhs_dimless_jacobian(t, zz, dp) * X;
        V12 dy;
        dy.head<3>() = rhs_dimless(t, zz, dp);
        for (int c = 0; c < 3; ++c) dy.segment<3>(3 + 3 * c) = dX.col(c);
        return dy;
    };
    V12 y0;
    y0.head<3>() = z;
    Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    for (int c = 0; c < 3; ++c) y0.segment<3>(3 + 3 * c) = I.col(c);
    const V12 y1 = integrate_end<12>(rhs, 0.0, dp.period(), y0, cfg);
    Eigen::Matrix3d X;
    for (int c = 0; c < 3; ++c) X.col(c) = y1.segment<3>(3 + 3 * c);
    return X;
}

/// Floquet multipliers: eigenvalues of the map Jacobian at a fixed point.
inline std::array<std::complex<double>, 3> floquet(const Eigen::Vector3d& z_star,
                                                   const DimlessParams& dp,
                                                   const IntegratorConfig& cfg = {}) {
    const Eigen::Matrix3d J = map_jacobian_fd(z_star, dp, cfg);
    Eigen::EigenSolver<Eigen::Matrix3d> es(J);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("floquet: eigenvalue computation failed");
    std::array<std::complex<double>, 3> lam;
    for (int i = 0; i < 3; ++i) lam[i] = es.eigenvalues()[i];
    // sort by descending modulus so lam[0] is the leading multiplier
    std::sort(lam.begin(), lam.end(),
              [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
    return lam;
}

inline double max_multiplier(const std::array<std::complex<double>, 3>& lam) {
    double m = 0.0;
    for (const auto& l : lam) m = std::max(m, std::abs(l));
    return m;
}

/// Fixed point of the stroboscopic map with stability and period averages.
struct PeriodicOrbit {
    ReducedState z_star;
    double omega = 0.0;
    std::array<std::complex<double>, 3> multipliers{};
    bool stable = false;
    double phi_bar = 0.0;
    double v_bar = 0.0;
    double theta_drift = 0.0;
    bool symmetric = false;
    double residual = 0.0;      ///< |P(z*) - z*|
    double symmetry_residual = 0.0; ///< |R z(t_p/2) - z*|
};

/// Period averages by trapezoid quadrature on dense output. The forcing period
/// makes the trapezoid rule spectrally accurate here.
inline void observables(const Eigen::Vector3d& z_star, const DimlessParams& dp, double& phi_bar,
                        double& v_bar, double& theta_drift, const IntegratorConfig& cfg = {},
                        int n = 4096) {
    const double tp = dp.period();
    const auto traj = integrate<3>(detail::guarded_rhs(dp), 0.0, tp, z_star, cfg);
    double sp = 0.0, sv = 0.0, ss = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        const Eigen::Vector3d z = traj.eval(tp * i / n);
        sp += w * z[0];
        sv += w * z[2];
        ss += w * z[1];
    }
    const double dt = tp / n;
    phi_bar = sp * dt / tp;
    v_bar = sv * dt / tp;
    theta_drift = ss * dt;
}

namespace detail {

// Damped Newton on G(z) = 0 with central-difference Jacobian.
template <typename G>
bool newton3(G&& g, Eigen::Vector3d& z, double tol, int itmax) {
    Eigen::Vector3d Gz = g(z);
    for (int it = 0; it < itmax; ++it) {
        const double n0 = Gz.norm();
        if (n0 < tol) return true;
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(z[j]));
            Eigen::Vector3d zp = z, zm = z;
            zp[j] += h;
            zm[j] -= h;
            J.col(j) = (g(zp) - g(zm)) / (2.0 * h);
        }
        const Eigen::Vector3d dz = J.fullPivLu().solve(-Gz);
        if (!dz.allFinite()) return false;
        double lambda = 1.0;
        Eigen::Vector3d z_new = z, G_new = Gz;
        bool improved = false;
        for (int ls = 0; ls < 25; ++ls) {
            z_new = z + lambda * dz;
            try {
                G_new = g(z_new);
            } catch (const IntegrationError&) {
                lambda *= 0.5;
                continue;
            }
            if (G_new.norm() < n0) {
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) return false;
        z = z_new;
        Gz = G_new;
    }
    return Gz.norm() < tol;
}

} // namespace detail

/// Solve P(z) = z (or the half-period relation R P_half(z) = z when
/// symmetric_constraint is set, which captures unstable symmetric orbits).
inline PeriodicOrbit find_periodic_orbit(const Eigen::Vector3d& z_guess, const DimlessParams& dp,
                                         bool symmetric_constraint = false,
                                         const IntegratorConfig& cfg = {}, double tol = 1e-11,
                                         int itmax = 50) {
    dp.validate();
    if (!z_guess.allFinite())
        throw std::invalid_argument("find_periodic_orbit: non-finite guess");

    Eigen::Vector3d z = z_guess;
    bool ok;
    if (symmetric_constraint) {
        auto g = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d {
            return reversal(flow_map(x, dp, 0.5, cfg)) - x;
        };
        ok = detail::newton3(g, z, tol, itmax);
    } else {
        auto g = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d {
            return stroboscopic_map(x, dp, cfg) - x;
        };
        ok = detail::newton3(g, z, tol, itmax);
    }
    if (!ok)
        throw ConvergenceError("find_periodic_orbit: Newton did not converge");

    PeriodicOrbit orb;
    orb.z_star = ReducedState::from(z);
    orb.omega = dp.omega;
    orb.residual = (stroboscopic_map(z, dp, cfg) - z).norm();
    if (orb.residual > 1e-9)
        throw ConvergenceError("find_periodic_orbit: converged point is not periodic");
    orb.symmetry_residual = (reversal(flow_map(z, dp, 0.5, cfg)) - z).norm();
    orb.symmetric = orb.symmetry_residual <= 1e-7;
    orb.multipliers = floquet(z, dp, cfg);
    orb.stable = max_multiplier(orb.multipliers) < 1.0;
    observables(z, dp, orb.phi_bar, orb.v_bar, orb.theta_drift, cfg);
    return orb;
}

/// Conjugate of an asymmetric orbit: R z(t_p/2) is the phase-0 fixed point of
/// the half-period-shifted mirror orbit, with mean angle -phi_bar and the
/// same multiplier moduli.
inline PeriodicOrbit conjugate_orbit(const PeriodicOrbit& orbit, const DimlessParams& dp,
                                     const IntegratorConfig& cfg = {}) {
    const Eigen::Vector3d zc = reversal(flow_map(orbit.z_star.vec(), dp, 0.5, cfg));
    return find_periodic_orbit(zc, dp, false, cfg);
}

/// Iterate the map `periods` times (attractor transient).
inline Eigen::Vector3d settle(const Eigen::Vector3d& z0, const DimlessParams& dp, int periods,
                              const IntegratorConfig& cfg = {}) {
    return integrate_end<3>(detail::guarded_rhs(dp), 0.0, periods * dp.period(), z0, cfg);
}

/// Deterministic orbit census at fixed parameters: the symmetric orbit via the
/// constrained solve, attractors from the fixed seed set (300-period
/// transients), plus a fan of phi-offset Newton starts that picks up unstable
/// asymmetric orbits. Conjugates are reduced to the phi_bar >= 0
/// representative.
inline std::vector<PeriodicOrbit> orbit_census(const DimlessParams& dp,
                                               const IntegratorConfig& cfg = {}) {
    std::vector<PeriodicOrbit> orbits;
    auto is_new = [&orbits](const Eigen::Vector3d& z) {
        for (const auto& o : orbits)
            if ((o.z_star.vec() - z).norm() <= 1e-4) return false;
        return true;
    };
    auto add = [&](const PeriodicOrbit& o) {
        // canonical representative: asymmetric pairs counted once via phi_bar >= 0
        if (!o.symmetric && o.phi_bar < 0.0) return;
        if (is_new(o.z_star.vec())) orbits.push_back(o);
    };

    try {
        add(find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true, cfg));
    } catch (const ConvergenceError&) {
    }

    const std::array<Eigen::Vector3d, 5> seeds = {
        Eigen::Vector3d{0.0, 0.0, 0.0}, Eigen::Vector3d{1.0, 0.0, 0.0},
        Eigen::Vector3d{-1.0, 0.0, 0.0}, Eigen::Vector3d{1.2, 0.0, 0.05},
        Eigen::Vector3d{-1.2, 0.0, 0.05}};
    for (const auto& seed : seeds) {
        try {
            const Eigen::Vector3d zs = settle(seed, dp, 300, cfg);
            add(find_periodic_orbit(zs, dp, false, cfg));
        } catch (const IntegrationError&) {
        } catch (const ConvergenceError&) {
        }
    }

    // fan of offsets around the symmetric orbit catches coexisting unstable orbits
    if (!orbits.empty() && orbits.front().symmetric) {
        const Eigen::Vector3d zs = orbits.front().z_star.vec();
        for (double off : {0.2, 0.4, 0.6, 0.8, 1.0, -0.2, -0.4, -0.6, -0.8, -1.0}) {
            try {
                Eigen::Vector3d guess = zs + Eigen::Vector3d{off, 0.0, 0.0};
                add(find_periodic_orbit(guess, dp, false, cfg));
            } catch (const IntegrationError&) {
            } catch (const ConvergenceError&) {
            }
        }
    }
    return orbits;
}

/// Symmetric orbit tracked across a parameter change; reuses the previous
/// fixed point as the Newton start.
inline PeriodicOrbit symmetric_orbit(const DimlessParams& dp,
                                     const Eigen::Vector3d& guess = Eigen::Vector3d::Zero(),
                                     const IntegratorConfig& cfg = {}) {
    return find_periodic_orbit(guess, dp, true, cfg);
}

/// One point of the stability boundary: bisect omega for max|lambda| = 1 of
/// the symmetric orbit. The bracket must straddle the transition.
inline double stability_transition_omega(double delta, DimlessParams dp, double omega_lo,
                                         double omega_hi, const IntegratorConfig& cfg = {},
                                         double omega_tol = 1e-3) {
    dp.delta = delta;
    Eigen::Vector3d guess = Eigen::Vector3d::Zero();
    auto g = [&](double om) {
        dp.omega = om;
        const PeriodicOrbit orb = symmetric_orbit(dp, guess, cfg);
        guess = orb.z_star.vec();
        return max_multiplier(orb.multipliers) - 1.0;
    };
    double glo = g(omega_lo), ghi = g(omega_hi);
    if (glo * ghi > 0.0)
        throw ConvergenceError("stability_transition_omega: bracket does not straddle");
    double lo = omega_lo, hi = omega_hi;
    while (hi - lo > omega_tol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if (gm * glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct BoundaryPoint {
    double delta = 0.0;
    double omega_star = 0.0;
    bool ok = false;
    std::string error;
};

/// Stability boundary over a delta grid; bracket failures are reported per
/// point and do not abort the sweep.
inline std::vector<BoundaryPoint> stability_boundary(const std::vector<double>& delta_grid,
                                                     const DimlessParams& dp, double omega_lo,
                                                     double omega_hi,
                                                     const IntegratorConfig& cfg = {}) {
    std::vector<BoundaryPoint> out(delta_grid.size());
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        out[i].delta = delta_grid[i];
        try {
            out[i].omega_star = stability_transition_omega(delta_grid[i], dp, omega_lo, omega_hi, cfg);
            out[i].ok = true;
        } catch (const std::exception& e) {
            out[i].ok = false;
            out[i].error = e.what();
        }
    }
    return out;
}

} // namespace raps
