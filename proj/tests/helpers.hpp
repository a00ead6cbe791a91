#pragma once

#include <random>

#include "raps/model.hpp"

namespace raps::test {

/// Reference vehicle parameters used throughout the suite.
inline PhysicalParams table1() {
    PhysicalParams p;
    p.l1 = 0.6;
    p.l2 = 0.2;
    p.d1 = 0.06;
    p.d2 = 0.1;
    p.s = 0.2;
    p.m_r = 40.0;
    p.I_r = 0.1695;
    p.c = 10.0;
    p.A = 1.0;
    return p;
}

/// Dimensionless reference set at a given dimensionless frequency.
inline DimlessParams table1_dimless(double omega, double A = 1.0, double delta = 0.1) {
    DimlessParams dp = nondimensionalize(table1(), omega / 4.0);
    dp.omega = omega; // exact, avoids the round trip through Omega
    dp.A = A;
    dp.delta = delta;
    return dp;
}

/// Reduced-parameter set matching the published coefficient tables
/// (eta rounded to 0.0118).
inline DimlessParams rounded_eta_dimless(double omega, double A = 1.0, double delta = 0.1) {
    DimlessParams dp = table1_dimless(omega, A, delta);
    dp.eta = 0.0118;
    return dp;
}

inline std::mt19937_64 rng(unsigned seed = 20240915u) { return std::mt19937_64{seed}; }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

} // namespace raps::test
