#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "helpers.hpp"
#include "raps/dynamics.hpp"
#include "raps/integrator.hpp"
#include "raps/poincare.hpp"

using namespace raps;
using Catch::Approx;

namespace {
using Vec1 = Eigen::Matrix<double, 1, 1>;

Vec1 v1(double x) {
    Vec1 v;
    v << x;
    return v;
}
} // namespace

TEST_CASE("analytic exponential") {
    auto rhs = [](double, const Vec1& y) { return v1(-3.0 * y[0]); };
    const auto traj = integrate<1>(rhs, 0.0, 1.0, v1(1.0));
    CHECK(traj.back()[0] == Approx(std::exp(-3.0)).margin(1e-9));
}

TEST_CASE("analytic circle stays on the circle") {
    using Vec2 = Eigen::Matrix<double, 2, 1>;
    auto rhs = [](double, const Vec2& y) { return Vec2{y[1], -y[0]}; };
    Vec2 y0{1.0, 0.0};
    const auto y = integrate_end<2>(rhs, 0.0, 100.0, y0);
    CHECK(y.squaredNorm() == Approx(1.0).margin(1e-9));
}

TEST_CASE("self-convergence on the reduced dynamics is at least 4th order") {
    const DimlessParams dp = test::table1_dimless(6.88);
    auto rhs = [&dp](double t, const Eigen::Vector3d& z) { return rhs_dimless(t, z, dp); };
    const Eigen::Vector3d z0{0.5, 0.1, 0.0};

    auto run = [&](double rtol) {
        IntegratorConfig cfg;
        cfg.rtol = rtol;
        cfg.atol = 1e-14;
        return integrate_end<3>(rhs, 0.0, 5.0, z0, cfg);
    };
    const Eigen::Vector3d ref = run(1e-12);
    const double e6 = (run(1e-6) - ref).norm();
    const double e8 = (run(1e-8) - ref).norm();
    const double e10 = (run(1e-10) - ref).norm();
    CHECK(e8 < e6);
    CHECK(e10 < e8);
    CHECK(e6 / e8 > 10.0);
}

TEST_CASE("dense output: node reproduction and mid-step accuracy") {
    auto rhs = [](double, const Vec1& y) { return v1(-3.0 * y[0]); };
    IntegratorConfig cfg;
    cfg.rtol = 1e-9;
    cfg.atol = 1e-12;
    const auto traj = integrate<1>(rhs, 0.0, 1.0, v1(1.0), cfg);

    // nodes reproduce exactly
    for (std::size_t k = 0; k < traj.t.size(); k += std::max<std::size_t>(1, traj.t.size() / 7))
        CHECK(traj.eval(traj.t[k])[0] == traj.y[k][0]);

    // mid-step error within 10x the step tolerance
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < traj.t.size(); ++k) {
        const double tm = 0.5 * (traj.t[k] + traj.t[k + 1]);
        const double exact = std::exp(-3.0 * tm);
        const double tol = cfg.atol + cfg.rtol * std::abs(exact);
        worst = std::max(worst, std::abs(traj.eval(tm)[0] - exact) / tol);
    }
    CHECK(worst <= 10.0);

    CHECK_THROWS_AS(traj.eval(1.5), std::out_of_range);
}

TEST_CASE("deterministic: repeated integration is bit-identical") {
    const DimlessParams dp = test::table1_dimless(5.4);
    auto rhs = [&dp](double t, const Eigen::Vector3d& z) { return rhs_dimless(t, z, dp); };
    const Eigen::Vector3d z0{1.0, 0.0, 0.0};
    const auto a = integrate<3>(rhs, 0.0, 10.0, z0);
    const auto b = integrate<3>(rhs, 0.0, 10.0, z0);
    REQUIRE(a.t.size() == b.t.size());
    CHECK(std::memcmp(a.t.data(), b.t.data(), a.t.size() * sizeof(double)) == 0);
    for (std::size_t k = 0; k < a.y.size(); ++k)
        CHECK(std::memcmp(a.y[k].data(), b.y[k].data(), 3 * sizeof(double)) == 0);
}

TEST_CASE("error paths: budget, blow-up, chart exit") {
    {
        IntegratorConfig cfg;
        cfg.max_steps = 10;
        const DimlessParams dp = test::table1_dimless(6.88);
        auto rhs = [&dp](double t, const Eigen::Vector3d& z) { return rhs_dimless(t, z, dp); };
        CHECK_THROWS_AS(integrate_end<3>(rhs, 0.0, 100.0, Eigen::Vector3d{0.5, 0.1, 0.0}, cfg),
                        IntegrationError);
    }
    {
        // finite-time blow-up y' = y^2
        auto rhs = [](double, const Vec1& y) { return v1(y[0] * y[0]); };
        CHECK_THROWS_AS(integrate_end<1>(rhs, 0.0, 3.0, v1(1.0)), IntegrationError);
    }
    {
        // chart exit guard on the steering angle
        const DimlessParams dp = test::table1_dimless(6.88);
        CHECK_THROWS_AS(stroboscopic_map({3.1, 3.0, 0.0}, dp), ChartExitError);
    }
    {
        IntegratorConfig cfg;
        cfg.rtol = 1.0; // out of range
        auto rhs = [](double, const Vec1& y) { return v1(-y[0]); };
        CHECK_THROWS_AS(integrate_end<1>(rhs, 0.0, 1.0, v1(1.0), cfg), std::invalid_argument);
        CHECK_THROWS_AS(integrate_end<1>(rhs, 1.0, 0.0, v1(1.0)), std::invalid_argument);
    }
}
