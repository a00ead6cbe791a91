#pragma once

// Right-hand sides of the reduced Twistcar dynamics: the dimensionless system
// used everywhere, the dimensional reduced system kept as an independent
// oracle, pose reconstruction and the rotor torque diagnostic.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "raps/model.hpp"

namespace raps {

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a trajectory leaves the steering chart |phi| < pi. The reduced
/// equations stay finite there, but the physical joint self-intersects.
struct ChartExitError : IntegrationError {
    using IntegrationError::IntegrationError;
};

/// Rotor angle and its first two time derivatives for psi = A sin(omega t).
struct ActuationSample {
    double psi = 0.0;
    double psi_dot = 0.0;
    double psi_ddot = 0.0;
};

inline ActuationSample actuation(double t, double A, double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("actuation: omega must be positive");
    const double st = std::sin(omega * t), ct = std::cos(omega * t);
    return {A * st, A * omega * ct, -A * omega * omega * st};
}

/// Dimensionless reduced vector field, z = (phi, sigma, v).
inline Eigen::Vector3d rhs_dimless(double t, const Eigen::Vector3d& z, const DimlessParams& dp) {
    if (!z.allFinite())
        throw IntegrationError("rhs_dimless: non-finite state");
    const double phi = z[0], sig = z[1], v = z[2];
    const double psidd = -dp.A * dp.omega * dp.omega * std::sin(dp.omega * t);
    const double s2 = std::sin(2.0 * phi), c2 = std::cos(2.0 * phi);
    const double denom = 2.0 * (dp.delta * dp.delta + dp.eta);
    Eigen::Vector3d dz;
    dz[0] = (-v * std::sin(phi) + (-dp.beta + std::cos(phi)) * sig) / dp.beta;
    dz[1] = -(2.0 * dp.eta * psidd + v * s2 + (dp.alpha1() - c2 + 2.0 * dp.delta * v) * sig) / denom;
    dz[2] = dp.delta * sig * sig - 0.5 * sig * s2 - 0.5 * (5.0 + c2) * v;
    return dz;
}

/// Jacobian of rhs_dimless with respect to z (no explicit t dependence enters).
inline Eigen::Matrix3d rhs_dimless_jacobian(double /*t*/, const Eigen::Vector3d& z,
                                            const DimlessParams& dp) {
    const double phi = z[0], sig = z[1], v = z[2];
    const double s1 = std::sin(phi), c1 = std::cos(phi);
    const double s2 = std::sin(2.0 * phi), c2 = std::cos(2.0 * phi);
    const double denom = 2.0 * (dp.delta * dp.delta + dp.eta);
    Eigen::Matrix3d J;
    J(0, 0) = (-v * c1 - s1 * sig) / dp.beta;
    J(0, 1) = (-dp.beta + c1) / dp.beta;
    J(0, 2) = -s1 / dp.beta;
    J(1, 0) = -(2.0 * v * c2 + 2.0 * s2 * sig) / denom;
    J(1, 1) = -(dp.alpha1() - c2 + 2.0 * dp.delta * v) / denom;
    J(1, 2) = -(s2 + 2.0 * dp.delta * sig) / denom;
    J(2, 0) = -sig * c2 + v * s2;
    J(2, 1) = 2.0 * dp.delta * sig - 0.5 * s2;
    J(2, 2) = -0.5 * (5.0 + c2);
    return J;
}

/// Reduced inertia matrix, velocity forces and dissipation forces of the
/// dimensional system, for reduced velocities v_r = (v, theta_dot, psi_dot).
struct ReducedMatrices {
    Eigen::Matrix3d M_r;
    Eigen::Vector3d B_r;
    Eigen::Vector3d D_r;
};

inline ReducedMatrices assemble_reduced_matrices(double phi, double v, double theta_dot,
                                                 const PhysicalParams& p) {
    ReducedMatrices m;
    m.M_r << p.m_r, 0.0, 0.0,
             0.0, p.I_r + p.d1 * p.d1 * p.m_r, p.I_r,
             0.0, p.I_r, p.I_r;
    m.B_r << -p.d1 * p.m_r * theta_dot * theta_dot,
             p.d1 * p.m_r * v * theta_dot,
             0.0;
    const double s1 = std::sin(phi), c1 = std::cos(phi);
    const double s2 = std::sin(2.0 * phi);
    m.D_r << p.c * ((2.0 + c1 * c1) * v + 0.5 * p.l1 * s2 * theta_dot),
             p.c * (0.5 * p.l1 * s2 * v + (2.0 * p.s * p.s + p.l1 * p.l1 * s1 * s1) * theta_dot),
             0.0;
    return m;
}

/// Dimensional reduced system in SI units, state ordered (v, theta_dot, phi).
/// Serves as the independent oracle for rhs_dimless.
inline Eigen::Vector3d rhs_dimensional(double t, const Eigen::Vector3d& state,
                                       const PhysicalParams& p, double Omega) {
    if (!state.allFinite())
        throw IntegrationError("rhs_dimensional: non-finite state");
    const double v = state[0], thd = state[1], phi = state[2];
    const double psidd = -p.A * Omega * Omega * std::sin(Omega * t);
    const ReducedMatrices m = assemble_reduced_matrices(phi, v, thd, p);
    Eigen::Vector3d rates;
    rates[0] = (-m.B_r[0] - m.D_r[0]) / p.m_r;
    rates[1] = (-p.I_r * psidd - m.B_r[1] - m.D_r[1]) / (p.I_r + p.d1 * p.d1 * p.m_r);
    rates[2] = -v * std::sin(phi) / p.l2 + thd * (p.l1 * std::cos(phi) / p.l2 - 1.0);
    return rates;
}

/// Pose reconstruction: xdot = v cos(theta), ydot = v sin(theta), thetadot = sigma.
inline Eigen::Vector3d pose_rhs(double /*t*/, const Eigen::Vector3d& pose,
                                const Eigen::Vector3d& z) {
    return {z[2] * std::cos(pose[2]), z[2] * std::sin(pose[2]), z[1]};
}

/// Rotor torque from the third reduced equation: tau = I_r (sigma_dot + psi_ddot),
/// both accelerations dimensional.
inline double required_torque(const PhysicalParams& p, double sigma_dot_dim, double psi_ddot_dim) {
    return p.I_r * (sigma_dot_dim + psi_ddot_dim);
}

/// Extended 6-state field (z, pose) for trajectory output.
inline Eigen::Matrix<double, 6, 1> rhs_extended(double t, const Eigen::Matrix<double, 6, 1>& y,
                                                const DimlessParams& dp) {
    const Eigen::Vector3d z = y.head<3>();
    const Eigen::Vector3d dz = rhs_dimless(t, z, dp);
    const Eigen::Vector3d dpse = pose_rhs(t, y.tail<3>(), z);
    Eigen::Matrix<double, 6, 1> dy;
    dy << dz, dpse;
    return dy;
}

/// Guard helper: throws ChartExitError when |phi| >= pi.
inline void check_chart(double phi) {
    if (!(std::abs(phi) < M_PI))
        throw ChartExitError("steering angle left the chart |phi| < pi");
}

} // namespace raps
