#pragma once

// Branch continuation of periodic orbits in omega or delta: secant-predictor /
// Newton-corrector with pseudo-arclength fallback, pitchfork detection on the
// symmetric branch (real multiplier through +1), fold detection as a turning
// point of the branch tangent, and bisection refinement of both.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raps/poincare.hpp"

namespace raps {

enum class SweepParam { omega, delta };

inline const char* to_string(SweepParam p) {
    return p == SweepParam::omega ? "omega" : "delta";
}

inline DimlessParams with_param(DimlessParams dp, SweepParam which, double value) {
    if (which == SweepParam::omega)
        dp.omega = value;
    else
        dp.delta = value;
    return dp;
}

struct Bifurcation {
    enum class Kind { pitchfork, fold };
    Kind kind;
    double param = 0.0;
};

inline const char* to_string(Bifurcation::Kind k) {
    return k == Bifurcation::Kind::pitchfork ? "pitchfork" : "fold";
}

struct BranchPoint {
    double param = 0.0;
    PeriodicOrbit orbit;
    int branch_id = 0; ///< 0 symmetric, 1 asymmetric, 2 mirrored conjugates
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<Bifurcation> markers;
};

struct ContinuationOptions {
    int symmetric_points = 61;   ///< grid resolution of the symmetric branch
    double param_tol = 1e-3;     ///< bisection tolerance for bifurcation locations
    double min_step = 1e-6;      ///< corrector gives up below this parameter step
    int max_branch_points = 600;
    IntegratorConfig integ{};
};

namespace detail {

// leading multiplier magnitude minus one for the symmetric orbit at p
struct SymTracker {
    DimlessParams base;
    SweepParam which;
    IntegratorConfig cfg;
    Eigen::Vector3d guess = Eigen::Vector3d::Zero();

    PeriodicOrbit solve(double p) {
        PeriodicOrbit orb = symmetric_orbit(with_param(base, which, p), guess, cfg);
        guess = orb.z_star.vec();
        return orb;
    }
    double g(double p) { return max_multiplier(solve(p).multipliers) - 1.0; }
};

// 4-dim pseudo-arclength corrector state: u = (z, phat) with phat the
// parameter normalized to the sweep range.
struct ArcSystem {
    DimlessParams base;
    SweepParam which;
    IntegratorConfig cfg;
    double p_lo, p_hi;

    double denorm(double phat) const { return p_lo + phat * (p_hi - p_lo); }
    double norm(double p) const { return (p - p_lo) / (p_hi - p_lo); }

    Eigen::Vector3d residual(const Eigen::Vector4d& u) const {
        const DimlessParams dp = with_param(base, which, denorm(u[3]));
        const Eigen::Vector3d z = u.head<3>();
        return stroboscopic_map(z, dp, cfg) - z;
    }

    bool correct(Eigen::Vector4d& u, const Eigen::Vector4d& tangent,
                 const Eigen::Vector4d& u_pred, double tol = 1e-10, int itmax = 14) const {
        for (int it = 0; it < itmax; ++it) {
            Eigen::Vector3d G;
            try {
                G = residual(u);
            } catch (const IntegrationError&) {
                return false;
            }
            const double arc = tangent.dot(u - u_pred);
            Eigen::Vector4d F;
            F << G, arc;
            if (F.norm() < tol) return true;

            Eigen::Matrix4d J;
            for (int j = 0; j < 4; ++j) {
                const double h = 1e-7 * std::max(1.0, std::abs(u[j]));
                Eigen::Vector4d up = u, um = u;
                up[j] += h;
                um[j] -= h;
                Eigen::Vector3d Gp, Gm;
                try {
                    Gp = residual(up);
                    Gm = residual(um);
                } catch (const IntegrationError&) {
                    return false;
                }
                J.block<3, 1>(0, j) = (Gp - Gm) / (2.0 * h);
                J(3, j) = tangent[j];
            }
            const Eigen::Vector4d du = J.fullPivLu().solve(-F);
            if (!du.allFinite()) return false;
            u += du;
            if (du.norm() < 1e-13) break;
        }
        Eigen::Vector3d G;
        try {
            G = residual(u);
        } catch (const IntegrationError&) {
            return false;
        }
        return G.norm() < 1e-9;
    }
};

inline PeriodicOrbit orbit_at(const DimlessParams& base, SweepParam which, double p,
                              const Eigen::Vector3d& guess, const IntegratorConfig& cfg) {
    return find_periodic_orbit(guess, with_param(base, which, p), false, cfg);
}

} // namespace detail

/// Symmetric branch over [lo, hi] with pitchfork markers. The orbit is tracked
/// with the symmetry-constrained solve, so it stays on the branch through the
/// stability transition.
inline Branch continue_symmetric_branch(const DimlessParams& dp, SweepParam which, double lo,
                                        double hi, const ContinuationOptions& opts = {}) {
    if (!(hi > lo))
        throw std::invalid_argument("continue_symmetric_branch: range must be ordered");
    detail::SymTracker tracker{dp, which, opts.integ};
    Branch branch;
    const int n = std::max(2, opts.symmetric_points);
    std::vector<double> gval(n);
    std::vector<double> ps(n);
    for (int i = 0; i < n; ++i) {
        const double p = lo + (hi - lo) * i / (n - 1);
        PeriodicOrbit orb = tracker.solve(p);
        gval[i] = max_multiplier(orb.multipliers) - 1.0;
        ps[i] = p;
        branch.points.push_back({p, std::move(orb), 0});
    }
    // refine each magnitude-1 crossing to a pitchfork marker
    for (int i = 0; i + 1 < n; ++i) {
        if (gval[i] == 0.0 || gval[i] * gval[i + 1] >= 0.0) continue;
        double a = ps[i], b = ps[i + 1], ga = gval[i];
        double gm = 1.0, mid = 0.5 * (a + b);
        for (int it = 0; it < 60; ++it) {
            mid = 0.5 * (a + b);
            gm = tracker.g(mid);
            if (gm * ga > 0.0) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
            if (b - a <= opts.param_tol && std::abs(gm) <= 5e-4) break;
        }
        branch.markers.push_back({Bifurcation::Kind::pitchfork, 0.5 * (a + b)});
    }
    return branch;
}

/// Asymmetric branch from a starting orbit. Marches in `direction` (+1/-1)
/// with natural continuation, switches to pseudo-arclength after two corrector
/// failures, rounds folds and marks them. Stops on range escape.
inline Branch continue_asymmetric_branch(const PeriodicOrbit& start, const DimlessParams& dp,
                                         SweepParam which, double lo, double hi, double p_start,
                                         int direction, const ContinuationOptions& opts = {}) {
    Branch branch;
    const double range = hi - lo;
    detail::ArcSystem sys{dp, which, opts.integ, lo, hi};

    double dp_nat = direction * 0.01 * range;
    Eigen::Vector4d u;
    u << start.z_star.vec(), sys.norm(p_start);
    branch.points.push_back({p_start, start, 1});

    // natural continuation until it fails twice at the same front
    bool arclength = false;
    Eigen::Vector4d u_prev = u;
    int failures = 0;
    while (!arclength && (int)branch.points.size() < opts.max_branch_points) {
        const double p_next = sys.denorm(u[3]) + dp_nat;
        if (p_next < lo - 1e-12 || p_next > hi + 1e-12) return branch; // range escape
        Eigen::Vector3d guess = u.head<3>();
        if (branch.points.size() >= 2) {
            const auto& zk = branch.points[branch.points.size() - 1].orbit.z_star;
            const auto& zk1 = branch.points[branch.points.size() - 2].orbit.z_star;
            const double dpk = branch.points[branch.points.size() - 1].param -
                               branch.points[branch.points.size() - 2].param;
            if (std::abs(dpk) > 1e-14)
                guess = zk.vec() + (zk.vec() - zk1.vec()) * (dp_nat / dpk);
        }
        try {
            PeriodicOrbit orb = detail::orbit_at(dp, which, p_next, guess, opts.integ);
            // fell back onto the symmetric solution: treat as corrector failure
            if (std::abs(orb.phi_bar) < 1e-4) throw ConvergenceError("left the asymmetric branch");
            u_prev = u;
            u << orb.z_star.vec(), sys.norm(p_next);
            branch.points.push_back({p_next, std::move(orb), 1});
            failures = 0;
        } catch (const std::exception&) {
            ++failures;
            dp_nat *= 0.5;
            if (failures >= 2) arclength = true;
            if (std::abs(dp_nat) < opts.min_step * range) arclength = true;
        }
    }

    // pseudo-arclength from the last two points
    if ((int)branch.points.size() < 2) return branch;
    auto upoint = [&](int idx) {
        Eigen::Vector4d w;
        w << branch.points[idx].orbit.z_star.vec(), sys.norm(branch.points[idx].param);
        return w;
    };
    Eigen::Vector4d uk = upoint((int)branch.points.size() - 1);
    Eigen::Vector4d ukm = upoint((int)branch.points.size() - 2);
    double ds = (uk - ukm).norm();
    ds = std::clamp(ds, 1e-4, 0.05);

    std::optional<double> fold_param;
    int fold_refine_rounds = 0;
    double prev_tangent_p = (uk - ukm)[3];

    while ((int)branch.points.size() < opts.max_branch_points) {
        Eigen::Vector4d tangent = (uk - ukm).normalized();
        Eigen::Vector4d u_pred = uk + ds * tangent;
        Eigen::Vector4d u_cor = u_pred;
        bool ok = sys.correct(u_cor, tangent, u_pred);
        if (!ok) {
            ds *= 0.4;
            if (ds < opts.min_step) break;
            continue;
        }
        const double p_new = sys.denorm(u_cor[3]);
        if (p_new < lo - 1e-12 || p_new > hi + 1e-12) break; // range escape

        PeriodicOrbit orb;
        try {
            orb = detail::orbit_at(dp, which, p_new, u_cor.head<3>(), opts.integ);
        } catch (const std::exception&) {
            ds *= 0.4;
            if (ds < opts.min_step) break;
            continue;
        }
        const double tangent_p = (u_cor - uk)[3];
        const bool reversed = prev_tangent_p != 0.0 && tangent_p != 0.0 &&
                              std::signbit(tangent_p) != std::signbit(prev_tangent_p);
        branch.points.push_back({p_new, std::move(orb), 1});
        ukm = uk;
        uk = u_cor;
        prev_tangent_p = tangent_p;

        if (reversed && fold_refine_rounds < 10) {
            // shrink steps through the turning point until the parameter
            // bracket is below tolerance
            const double p_gap = std::abs(sys.denorm(ukm[3]) - p_new);
            if (p_gap * range > 0.0 && std::abs(sys.denorm(ukm[3]) - p_new) > opts.param_tol &&
                ds > 4.0 * opts.min_step) {
                ds *= 0.25;
                ++fold_refine_rounds;
            } else if (!fold_param) {
                // quadratic fit of p over the last three points around the fold
                const int m = (int)branch.points.size();
                if (m >= 3) {
                    const double p1 = branch.points[m - 3].param;
                    const double p2 = branch.points[m - 2].param;
                    const double p3 = branch.points[m - 1].param;
                    const double phi1 = branch.points[m - 3].orbit.phi_bar;
                    const double phi2 = branch.points[m - 2].orbit.phi_bar;
                    const double phi3 = branch.points[m - 1].orbit.phi_bar;
                    // p(phi) is smooth through the fold; vertex of the parabola
                    const double d21 = (p2 - p1) / (phi2 - phi1);
                    const double d32 = (p3 - p2) / (phi3 - phi2);
                    const double c2d = (d32 - d21) / (phi3 - phi1);
                    if (std::abs(c2d) > 1e-14) {
                        const double phiv = 0.5 * (phi1 + phi2 - d21 / c2d);
                        fold_param = p1 + d21 * (phiv - phi1) + c2d * (phiv - phi1) * (phiv - phi2);
                    } else {
                        fold_param = p2;
                    }
                    branch.markers.push_back({Bifurcation::Kind::fold, *fold_param});
                }
                ds = std::min(0.05, ds * 4.0); // resume normal stepping
            }
        } else {
            ds = std::min(0.05, ds * 1.3);
        }
    }
    return branch;
}

/// Probe both sides of a pitchfork for the emerging asymmetric pair; returns
/// the seed orbit and its parameter value.
inline std::optional<std::pair<double, PeriodicOrbit>> seed_asymmetric_at_pitchfork(
    const DimlessParams& dp, SweepParam which, double p_star, double lo, double hi,
    const ContinuationOptions& opts = {}, double eps_phi = 0.05) {
    const double range = hi - lo;
    std::optional<std::pair<double, PeriodicOrbit>> best;
    for (double side : {+1.0, -1.0}) {
        for (double frac : {0.02, 0.05, 0.1}) {
            const double p = p_star + side * frac * range;
            if (p < lo || p > hi) continue;
            try {
                const PeriodicOrbit sym = symmetric_orbit(with_param(dp, which, p),
                                                          Eigen::Vector3d::Zero(), opts.integ);
                for (double off : {eps_phi, -eps_phi, 4 * eps_phi, -4 * eps_phi}) {
                    try {
                        Eigen::Vector3d guess = sym.z_star.vec() + Eigen::Vector3d{off, 0.0, 0.0};
                        PeriodicOrbit orb = detail::orbit_at(dp, which, p, guess, opts.integ);
                        if (std::abs(orb.phi_bar) < 1e-3) continue;
                        if (!best || std::abs(orb.phi_bar) < std::abs(best->second.phi_bar))
                            best = {p, std::move(orb)};
                    } catch (const std::exception&) {
                    }
                }
            } catch (const std::exception&) {
            }
            if (best) return best; // nearest probe wins; keeps the seed on the emerging pair
        }
    }
    return best;
}

/// Full bifurcation diagram: symmetric branch, emerging asymmetric branch
/// (rounding the fold), mirrored conjugate rows, and all markers.
inline Branch bifurcation_diagram(const DimlessParams& dp, SweepParam which, double lo, double hi,
                                  const ContinuationOptions& opts = {}) {
    Branch diagram = continue_symmetric_branch(dp, which, lo, hi, opts);

    std::optional<std::pair<double, PeriodicOrbit>> seed;
    if (!diagram.markers.empty()) {
        seed = seed_asymmetric_at_pitchfork(dp, which, diagram.markers.front().param, lo, hi, opts);
    } else {
        // no pitchfork in range: look for an asymmetric attractor mid-range
        const double pm = 0.5 * (lo + hi);
        for (const auto& orb : orbit_census(with_param(dp, which, pm), opts.integ))
            if (!orb.symmetric) {
                seed = {pm, orb};
                break;
            }
    }

    if (seed) {
        // march away from the pitchfork first (covers the emerging segment,
        // rounds the fold, and returns across the range); then the other way
        const double p0 = seed->first;
        const int dir_away = diagram.markers.empty()
                                 ? +1
                                 : (p0 >= diagram.markers.front().param ? +1 : -1);
        Branch asym = continue_asymmetric_branch(seed->second, dp, which, lo, hi, p0, dir_away, opts);
        Branch asym_back =
            continue_asymmetric_branch(seed->second, dp, which, lo, hi, p0, -dir_away, opts);
        for (auto it = asym_back.points.rbegin(); it != asym_back.points.rend(); ++it)
            if (std::abs(it->param - p0) > 1e-12) diagram.points.push_back(*it);
        for (auto& pt : asym.points) diagram.points.push_back(pt);
        for (auto& mk : asym.markers) diagram.markers.push_back(mk);
        for (auto& mk : asym_back.markers) diagram.markers.push_back(mk);

        // mirrored conjugate rows: same multipliers, negated means
        const std::size_t base = diagram.points.size();
        for (std::size_t i = 0; i < base; ++i) {
            if (diagram.points[i].branch_id != 1) continue;
            BranchPoint m = diagram.points[i];
            m.branch_id = 2;
            m.orbit.phi_bar = -m.orbit.phi_bar;
            m.orbit.theta_drift = -m.orbit.theta_drift;
            m.orbit.z_star = ReducedState::from(
                reversal(flow_map(diagram.points[i].orbit.z_star.vec(),
                                  with_param(dp, which, m.param), 0.5, opts.integ)));
            diagram.points.push_back(std::move(m));
        }
    }

    std::sort(diagram.markers.begin(), diagram.markers.end(),
              [](const Bifurcation& a, const Bifurcation& b) { return a.param < b.param; });
    return diagram;
}

} // namespace raps
