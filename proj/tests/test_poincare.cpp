#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "raps/poincare.hpp"

using namespace raps;
using Catch::Approx;

// Frozen fixed-point data cross-checked against an independent high-order
// integration (DOP853, rtol 1e-12) of the same reduced equations.

TEST_CASE("unactuated map: origin is fixed, transverse directions contract") {
    DimlessParams dp = test::table1_dimless(6.88);
    dp.A = 0.0;
    CHECK(stroboscopic_map(Eigen::Vector3d::Zero(), dp).norm() < 1e-12);

    // (sigma, v) contract under iteration; phi parks at a constant
    Eigen::Vector3d z{0.4, 0.3, -0.2};
    for (int k = 0; k < 30; ++k) z = stroboscopic_map(z, dp);
    CHECK(std::abs(z[1]) < 1e-10);
    CHECK(std::abs(z[2]) < 1e-10);

    // multipliers at the origin: {1, exp(-q tp), exp(-3 tp)}; the unit one is
    // the neutral steering direction of the unactuated line of equilibria
    const auto lam = floquet(Eigen::Vector3d::Zero(), dp);
    const double q = 2.0 * dp.alpha * dp.alpha / (dp.delta * dp.delta + dp.eta);
    const double tp = dp.period();
    CHECK(std::abs(lam[0]) == Approx(1.0).margin(1e-7));
    CHECK(std::abs(lam[1]) == Approx(std::exp(-3.0 * tp)).margin(1e-7));
    CHECK(std::abs(lam[2]) == Approx(std::exp(-q * tp)).margin(1e-7));
}

TEST_CASE("stable symmetric orbit at omega = 6.88") {
    const DimlessParams dp = test::table1_dimless(6.88);
    const PeriodicOrbit orb = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);

    CHECK(orb.z_star.phi == Approx(-0.44314092).margin(2e-6));
    CHECK(orb.z_star.sigma == Approx(-0.61262235).margin(2e-6));
    CHECK(orb.z_star.v == Approx(0.03575222).margin(2e-6));
    CHECK(orb.residual <= 1e-9);
    CHECK(orb.symmetric);
    CHECK(orb.symmetry_residual <= 1e-7);
    CHECK(orb.stable);
    CHECK(max_multiplier(orb.multipliers) == Approx(0.9021920).margin(1e-4));
    CHECK(std::abs(orb.phi_bar) < 1e-7);
    CHECK(std::abs(orb.theta_drift) < 1e-7);
    CHECK(orb.v_bar == Approx(0.0505177).margin(1e-6));
    CHECK(redimensionalize_speed(dp, orb.v_bar) == Approx(0.0075776).margin(2e-6));

    // the converged point is mapped to itself
    CHECK((stroboscopic_map(orb.z_star.vec(), dp) - orb.z_star.vec()).norm() < 1e-9);
}

TEST_CASE("mean speed of the symmetric orbit at delta = 0.2") {
    const DimlessParams dp = test::table1_dimless(6.88, 1.0, 0.2);
    const PeriodicOrbit orb = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
    CHECK(orb.stable);
    CHECK(orb.v_bar == Approx(0.0541552).margin(1e-6));
    CHECK(redimensionalize_speed(dp, orb.v_bar) == Approx(0.0081233).margin(2e-6));
}

TEST_CASE("map iteration converges to the asymmetric orbit at omega = 5.4") {
    const DimlessParams dp = test::table1_dimless(5.4);
    Eigen::Vector3d z{1.0, 0.0, 0.0};
    for (int k = 0; k < 500; ++k) z = stroboscopic_map(z, dp);
    const PeriodicOrbit orb = find_periodic_orbit(z, dp);
    CHECK((z - orb.z_star.vec()).norm() < 0.02);
    // steady-state mean steering angle of the attractor
    CHECK(orb.phi_bar == Approx(1.122989).margin(1e-4));
}

TEST_CASE("coexisting orbits at omega = 5.4: stable asymmetric, unstable symmetric") {
    const DimlessParams dp = test::table1_dimless(5.4);

    const Eigen::Vector3d za = settle({1, 0, 0}, dp, 400);
    const PeriodicOrbit asym = find_periodic_orbit(za, dp);
    CHECK_FALSE(asym.symmetric);
    CHECK(asym.stable);
    CHECK(asym.phi_bar == Approx(1.122989).margin(1e-5));
    CHECK(asym.v_bar == Approx(0.0018543).margin(1e-6));
    CHECK(asym.theta_drift == Approx(0.00069937).margin(1e-6));
    CHECK(max_multiplier(asym.multipliers) == Approx(0.983607).margin(1e-4));

    const PeriodicOrbit sym = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
    CHECK(sym.symmetric);
    CHECK_FALSE(sym.stable);
    CHECK(max_multiplier(sym.multipliers) == Approx(1.066771).margin(1e-4));
}

TEST_CASE("orbit census at omega = 6.4 finds the three orbit families") {
    const DimlessParams dp = test::table1_dimless(6.4);
    const auto orbits = orbit_census(dp);
    REQUIRE(orbits.size() == 3);

    int stable_sym = 0, stable_asym = 0, unstable_asym = 0;
    for (const auto& o : orbits) {
        if (o.symmetric && o.stable) ++stable_sym;
        if (!o.symmetric && o.stable) {
            ++stable_asym;
            CHECK(o.phi_bar == Approx(0.894603).margin(1e-4));
        }
        if (!o.symmetric && !o.stable) {
            ++unstable_asym;
            CHECK(o.phi_bar == Approx(0.346989).margin(1e-4));
            CHECK(max_multiplier(o.multipliers) == Approx(1.0530).margin(1e-3));
        }
    }
    CHECK(stable_sym == 1);
    CHECK(stable_asym == 1);
    CHECK(unstable_asym == 1);
}

TEST_CASE("conjugate asymmetric orbit: mirrored means, same multiplier moduli") {
    const DimlessParams dp = test::table1_dimless(5.4);
    const PeriodicOrbit asym = find_periodic_orbit(settle({1, 0, 0}, dp, 400), dp);
    const PeriodicOrbit conj = conjugate_orbit(asym, dp);

    CHECK(conj.phi_bar == Approx(-asym.phi_bar).margin(1e-6));
    CHECK(conj.theta_drift == Approx(-asym.theta_drift).margin(1e-6));
    CHECK(conj.v_bar == Approx(asym.v_bar).margin(1e-8));
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(conj.multipliers[i]) == Approx(std::abs(asym.multipliers[i])).margin(1e-6));
}

TEST_CASE("stability consistency under perturbed iteration") {
    // stable orbit: perturbation stays near the fixed point for 200 periods
    {
        const DimlessParams dp = test::table1_dimless(6.88);
        const PeriodicOrbit orb = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
        Eigen::Vector3d z = orb.z_star.vec() + Eigen::Vector3d{1e-4, 0, 0};
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            z = stroboscopic_map(z, dp);
            worst = std::max(worst, (z - orb.z_star.vec()).norm());
        }
        CHECK(worst < 1e-2);
    }
    // unstable symmetric orbit: same perturbation departs
    {
        const DimlessParams dp = test::table1_dimless(5.4);
        const PeriodicOrbit orb = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
        Eigen::Vector3d z = orb.z_star.vec() + Eigen::Vector3d{1e-4, 0, 0};
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            z = stroboscopic_map(z, dp);
            worst = std::max(worst, (z - orb.z_star.vec()).norm());
        }
        CHECK(worst > 1e-1);
    }
}

TEST_CASE("finite-difference map Jacobian agrees with the variational one") {
    const DimlessParams dp = test::table1_dimless(6.88);
    const PeriodicOrbit orb = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
    const Eigen::Matrix3d Jfd = map_jacobian_fd(orb.z_star.vec(), dp);
    const Eigen::Matrix3d Jvar = map_jacobian_variational(orb.z_star.vec(), dp);
    CHECK((Jfd - Jvar).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("pitchfork structure around the transition") {
    // just below the pitchfork (omega* ~ 6.042): two conjugate asymmetric
    // attractors and the unstable symmetric orbit
    {
        const DimlessParams dp = test::table1_dimless(5.95);
        const PeriodicOrbit sym = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
        CHECK_FALSE(sym.stable);
        const PeriodicOrbit plus = find_periodic_orbit(settle({1, 0, 0}, dp, 300), dp);
        const PeriodicOrbit minus = find_periodic_orbit(settle({-1, 0, 0}, dp, 300), dp);
        CHECK(plus.phi_bar > 1e-3);
        CHECK(minus.phi_bar < -1e-3);
        CHECK(plus.phi_bar == Approx(-minus.phi_bar).margin(1e-6));
    }
    // just above: the symmetric orbit is stable
    {
        const DimlessParams dp = test::table1_dimless(6.13);
        const PeriodicOrbit sym = find_periodic_orbit(Eigen::Vector3d::Zero(), dp, true);
        CHECK(sym.stable);
    }
}

TEST_CASE("stability transition bisection at delta = 0.1, A = 1") {
    const DimlessParams dp = test::table1_dimless(6.0);
    const double w_star = stability_transition_omega(0.1, dp, 5.5, 6.5);
    CHECK(w_star == Approx(6.04197).margin(2e-3));
}

TEST_CASE("stability boundary is monotone decreasing in delta (A = 1)") {
    const DimlessParams dp = test::table1_dimless(6.0);
    const auto pts = stability_boundary({0.08, 0.12, 0.18}, dp, 4.0, 8.0);
    REQUIRE(pts.size() == 3);
    for (const auto& p : pts) {
        INFO(p.error);
        CHECK(p.ok);
    }
    CHECK(pts[0].omega_star > pts[1].omega_star);
    CHECK(pts[1].omega_star > pts[2].omega_star);
}

TEST_CASE("bracket failure is reported, not thrown") {
    const DimlessParams dp = test::table1_dimless(6.0);
    const auto pts = stability_boundary({0.1}, dp, 7.5, 8.0); // no transition inside
    REQUIRE(pts.size() == 1);
    CHECK_FALSE(pts[0].ok);
    CHECK_FALSE(pts[0].error.empty());
}
