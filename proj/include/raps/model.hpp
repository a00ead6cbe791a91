#pragma once

// Parameter containers and the dimensional <-> dimensionless conversion layer
// for the rotor-actuated passive-steering (RAPS) Twistcar model.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace raps {

/// Dimensional geometry/inertia/dissipation plus actuation amplitude (SI units).
/// The link masses and inertias are taken as zero; the rotor/rider body is the
/// only massive element.
struct PhysicalParams {
    double l1 = 0.6;     ///< main body length [m]
    double l2 = 0.2;     ///< frontal link length [m]
    double d1 = 0.06;    ///< rotor COM offset along the body [m]
    double d2 = 0.1;     ///< frontal COM offset [m]; carried but unused (massless link)
    double s = 0.2;      ///< rear half-track [m]
    double m_r = 40.0;   ///< rotor mass [kg]
    double I_r = 0.1695; ///< rotor inertia [kg m^2]
    double c = 10.0;     ///< rolling dissipation coefficient [N s/m]
    double A = 1.0;      ///< actuation amplitude [rad]

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("PhysicalParams: ") + name +
                                            " must be positive and finite");
        };
        positive(l1, "l1");
        positive(l2, "l2");
        positive(m_r, "m_r");
        positive(I_r, "I_r");
        positive(c, "c");
        if (!(d1 >= 0.0) || !std::isfinite(d1))
            throw std::invalid_argument("PhysicalParams: d1 must be >= 0");
        if (!(s >= 0.0) || !std::isfinite(s))
            throw std::invalid_argument("PhysicalParams: s must be >= 0");
        if (!(d2 > 0.0) || !std::isfinite(d2))
            throw std::invalid_argument("PhysicalParams: d2 must be positive");
        if (!(A >= 0.0) || !std::isfinite(A))
            throw std::invalid_argument("PhysicalParams: A must be >= 0");
    }
};

/// Dimensionless parameter set: length ratios, scaled inertia, amplitude and
/// scaled frequency. t_c and l1 are retained so results can be converted back
/// to SI units.
struct DimlessParams {
    double alpha = 1.0 / 3.0; ///< s/l1
    double beta = 1.0 / 3.0;  ///< l2/l1
    double delta = 0.1;       ///< d1/l1
    double eta = 0.0118;      ///< I_r/(m_r l1^2)
    double A = 1.0;           ///< amplitude [rad]
    double omega = 6.88;      ///< dimensionless frequency t_c*Omega
    double t_c = 4.0;         ///< characteristic time m_r/c [s]
    double l1 = 0.6;          ///< body length [m], kept for redimensionalization

    /// alpha1 = 1 + 4 alpha^2; always derived, never stored.
    double alpha1() const { return 1.0 + 4.0 * alpha * alpha; }

    /// Forcing period 2 pi / omega (dimensionless time).
    double period() const { return 2.0 * M_PI / omega; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("DimlessParams: ") + name +
                                            " must be positive and finite");
        };
        positive(beta, "beta");
        positive(eta, "eta");
        positive(omega, "omega");
        positive(t_c, "t_c");
        positive(l1, "l1");
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("DimlessParams: alpha must be >= 0");
        if (!(delta >= 0.0) || !std::isfinite(delta))
            throw std::invalid_argument("DimlessParams: delta must be >= 0");
        if (!(A >= 0.0) || !std::isfinite(A))
            throw std::invalid_argument("DimlessParams: A must be >= 0");
    }
};

/// Reduced state z = (phi, sigma, v): steering angle, body angular rate and
/// forward speed, all dimensionless. The chart is |phi| < pi.
struct ReducedState {
    double phi = 0.0;
    double sigma = 0.0;
    double v = 0.0;

    Eigen::Vector3d vec() const { return {phi, sigma, v}; }
    static ReducedState from(const Eigen::Vector3d& z) { return {z[0], z[1], z[2]}; }
};

/// Planar pose of the body frame, positions in units of l1.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Eigen::Vector3d vec() const { return {x, y, theta}; }
    static Pose from(const Eigen::Vector3d& p) { return {p[0], p[1], p[2]}; }
};

/// Scale a dimensional problem per t_c = m_r/c; omega = t_c * Omega.
inline DimlessParams nondimensionalize(const PhysicalParams& p, double Omega) {
    p.validate();
    if (!(Omega > 0.0) || !std::isfinite(Omega))
        throw std::invalid_argument("nondimensionalize: Omega must be positive");
    DimlessParams dp;
    dp.t_c = p.m_r / p.c;
    dp.alpha = p.s / p.l1;
    dp.beta = p.l2 / p.l1;
    dp.delta = p.d1 / p.l1;
    dp.eta = p.I_r / (p.m_r * p.l1 * p.l1);
    dp.A = p.A;
    dp.omega = dp.t_c * Omega;
    dp.l1 = p.l1;
    return dp;
}

/// Inverse of the speed scaling v~ = (t_c/l1) v.
inline double redimensionalize_speed(const DimlessParams& dp, double v_bar) {
    dp.validate();
    return v_bar * dp.l1 / dp.t_c;
}

/// Dimensional frequency Omega = omega / t_c.
inline double redimensionalize_frequency(const DimlessParams& dp, double omega) {
    dp.validate();
    return omega / dp.t_c;
}

/// Dimensional time t = t~ * t_c.
inline double redimensionalize_time(const DimlessParams& dp, double t) {
    return t * dp.t_c;
}

/// Parse the `params` JSON block. Exactly the nine Table-1 keys are accepted;
/// unknown keys are rejected.
inline PhysicalParams physical_params_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw std::invalid_argument("params: expected a JSON object");
    static const char* keys[] = {"l1", "l2", "d1", "d2", "s", "m_r", "I_r", "c", "A"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known)
            throw std::invalid_argument("params: unknown key `" + it.key() + "`");
    }
    PhysicalParams p;
    auto get = [&j](const char* key) {
        if (!j.contains(key))
            throw std::invalid_argument(std::string("params.") + key + ": missing required key");
        const auto& v = j.at(key);
        if (!v.is_number())
            throw std::invalid_argument(std::string("params.") + key + ": expected a number");
        return v.get<double>();
    };
    p.l1 = get("l1");
    p.l2 = get("l2");
    p.d1 = get("d1");
    p.d2 = get("d2");
    p.s = get("s");
    p.m_r = get("m_r");
    p.I_r = get("I_r");
    p.c = get("c");
    p.A = get("A");
    p.validate();
    return p;
}

} // namespace raps
