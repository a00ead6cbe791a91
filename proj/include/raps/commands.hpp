#pragma once

// Subcommand implementations shared by the CLI binary and the tests. Each
// command writes its artifact files under out_dir and returns a summary JSON
// document. All plotting is external; only data files are produced.

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "raps/config.hpp"
#include "raps/continuation.hpp"
#include "raps/hbalance.hpp"
#include "raps/io.hpp"
#include "raps/log.hpp"
#include "raps/parallel.hpp"
#include "raps/poincare.hpp"

namespace raps {

namespace cmd_detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline nlohmann::json orbit_json(const PeriodicOrbit& o, const DimlessParams& dp) {
    nlohmann::json j;
    j["z_star"] = {o.z_star.phi, o.z_star.sigma, o.z_star.v};
    j["omega"] = o.omega;
    j["phi_bar"] = o.phi_bar;
    j["v_bar"] = o.v_bar;
    j["v_bar_dimensional"] = redimensionalize_speed(dp, o.v_bar);
    j["theta_drift"] = o.theta_drift;
    j["stable"] = o.stable;
    j["symmetric"] = o.symmetric;
    j["max_multiplier"] = max_multiplier(o.multipliers);
    nlohmann::json lam = nlohmann::json::array();
    for (const auto& l : o.multipliers) lam.push_back({l.real(), l.imag()});
    j["multipliers"] = lam;
    return j;
}

inline std::vector<double> orbit_csv_row(double param, const PeriodicOrbit& o, int branch_id) {
    std::vector<double> row{param, o.phi_bar, o.v_bar, o.theta_drift};
    for (const auto& l : o.multipliers) {
        row.push_back(l.real());
        row.push_back(l.imag());
    }
    row.push_back(o.stable ? 1.0 : 0.0);
    row.push_back(static_cast<double>(branch_id));
    return row;
}

constexpr const char* kBranchHeader =
    "param,phi_bar,v_bar,theta_drift,re_l1,im_l1,re_l2,im_l2,re_l3,im_l3,stable,branch_id";

} // namespace cmd_detail

/// `simulate`: time integration of the extended (state, pose) system with
/// trajectory CSV output and steady-state summary over the final period.
inline nlohmann::json run_simulate(const ScenarioConfig& cfg, const std::string& out_dir,
                                   unsigned /*jobs*/) {
    const DimlessParams dp = cfg.dimless();
    const double tp = dp.period();
    const double t_end = cfg.sim_t_end();

    Eigen::Matrix<double, 6, 1> y0 = Eigen::Matrix<double, 6, 1>::Zero();
    if (!cfg.seeds.empty()) y0.head<3>() = cfg.seeds.front().vec();

    auto rhs = [&dp](double t, const Eigen::Matrix<double, 6, 1>& y) {
        check_chart(y[0]);
        return rhs_extended(t, y, dp);
    };
    const auto traj = integrate<6>(rhs, 0.0, t_end, y0, cfg.integ);

    CsvWriter csv(cmd_detail::join_path(out_dir, "trajectory.csv"),
                  "t,phi,sigma,v,x,y,theta,psi");
    const int per_period = 256;
    const long n_samples = std::lround(t_end / tp * per_period);
    for (long i = 0; i <= n_samples; ++i) {
        const double t = std::min(t_end, t_end * i / n_samples);
        const auto y = traj.eval(t);
        csv.row(std::vector<double>{t, y[0], y[1], y[2], y[3], y[4], y[5],
                                    dp.A * std::sin(dp.omega * t)});
    }

    // steady-state means over the final period
    double phi_bar = 0.0, v_bar = 0.0, theta_drift = 0.0;
    {
        const int n = 4096;
        double sp = 0.0, sv = 0.0, ss = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            const auto y = traj.eval(t_end - tp + tp * i / n);
            sp += w * y[0];
            sv += w * y[2];
            ss += w * y[1];
        }
        phi_bar = sp / n;
        v_bar = sv / n;
        theta_drift = ss * (tp / n);
    }

    nlohmann::json summary;
    summary["command"] = "simulate";
    summary["omega"] = dp.omega;
    summary["Omega"] = cfg.Omega;
    summary["t_end"] = t_end;
    summary["phi_bar"] = phi_bar;
    summary["v_bar"] = v_bar;
    summary["v_bar_dimensional"] = redimensionalize_speed(dp, v_bar);
    summary["theta_drift"] = theta_drift;
    try {
        const PeriodicOrbit orb = find_periodic_orbit(traj.back().head<3>(), dp, false, cfg.integ);
        summary["orbit"] = cmd_detail::orbit_json(orb, dp);
    } catch (const std::exception& e) {
        summary["orbit_error"] = e.what();
    }
    return summary;
}

/// `orbit`: deterministic census of periodic orbits at fixed parameters.
inline nlohmann::json run_orbit(const ScenarioConfig& cfg, const std::string& out_dir,
                                unsigned /*jobs*/) {
    const DimlessParams dp = cfg.dimless();
    std::vector<PeriodicOrbit> orbits = orbit_census(dp, cfg.integ);
    for (const auto& seed : cfg.seeds) {
        try {
            const Eigen::Vector3d zs = settle(seed.vec(), dp, 300, cfg.integ);
            PeriodicOrbit o = find_periodic_orbit(zs, dp, false, cfg.integ);
            if (!o.symmetric && o.phi_bar < 0.0) continue;
            bool dup = false;
            for (const auto& e : orbits)
                if ((e.z_star.vec() - o.z_star.vec()).norm() <= 1e-4) dup = true;
            if (!dup) orbits.push_back(std::move(o));
        } catch (const std::exception&) {
        }
    }

    CsvWriter csv(cmd_detail::join_path(out_dir, "orbits.csv"), cmd_detail::kBranchHeader);
    for (const auto& o : orbits) csv.row(cmd_detail::orbit_csv_row(dp.omega, o, o.symmetric ? 0 : 1));

    nlohmann::json summary;
    summary["command"] = "orbit";
    summary["omega"] = dp.omega;
    summary["orbit_count"] = orbits.size();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& o : orbits) arr.push_back(cmd_detail::orbit_json(o, dp));
    summary["orbits"] = arr;
    return summary;
}

/// `branch`: bifurcation diagram over the sweep range with CSV + marker JSON.
inline nlohmann::json run_branch(const ScenarioConfig& cfg, const std::string& out_dir,
                                 unsigned /*jobs*/) {
    if (!cfg.sweep)
        throw std::invalid_argument("branch: config.sweep is required");
    const DimlessParams dp = cfg.dimless();
    ContinuationOptions opts;
    opts.integ = cfg.integ;
    opts.symmetric_points = std::max(2, cfg.sweep->points);
    const Branch diagram =
        bifurcation_diagram(dp, cfg.sweep->param, cfg.sweep->from, cfg.sweep->to, opts);

    CsvWriter csv(cmd_detail::join_path(out_dir, "branch.csv"), cmd_detail::kBranchHeader);
    for (const auto& pt : diagram.points)
        csv.row(cmd_detail::orbit_csv_row(pt.param, pt.orbit, pt.branch_id));

    nlohmann::json markers = nlohmann::json::array();
    for (const auto& mk : diagram.markers) {
        markers.push_back({{"kind", to_string(mk.kind)},
                           {"param", to_string(cfg.sweep->param)},
                           {"value", mk.param}});
    }
    {
        std::ofstream out(cmd_detail::join_path(out_dir, "bifurcations.json"));
        out << markers.dump(2) << '\n';
    }

    nlohmann::json summary;
    summary["command"] = "branch";
    summary["param"] = to_string(cfg.sweep->param);
    summary["points"] = diagram.points.size();
    summary["bifurcations"] = markers;
    return summary;
}

/// `stability-curve`: Poincare bisection, numeric HB and B9 fixture roots over
/// a delta grid (Fig. 10 style triple).
inline nlohmann::json run_stability_curve(const ScenarioConfig& cfg, const std::string& out_dir,
                                          unsigned jobs) {
    if (!cfg.sweep || cfg.sweep->param != SweepParam::delta)
        throw std::invalid_argument("stability-curve: config.sweep over delta is required");
    const DimlessParams dp = cfg.dimless();
    const int n = cfg.sweep->points;

    struct Row {
        double delta = 0.0;
        double omega_p = 0.0, omega_hb = 0.0, omega_b9 = 0.0;
        bool ok_p = false, ok_hb = false, ok_b9 = false;
        std::string error;
    };
    std::vector<Row> rows(n);

    parallel_for(n, jobs, [&](std::size_t i) {
        Row& r = rows[i];
        r.delta = cfg.sweep->from + (cfg.sweep->to - cfg.sweep->from) * double(i) / (n - 1);
        double ref = 7.0;
        try {
            r.omega_b9 = pitchfork_frequency_asymptotic(r.delta, dp, AsymptoticSource::B9_fixture,
                                                        7.0 * std::pow(0.1 / r.delta, 0.8));
            r.ok_b9 = true;
            ref = r.omega_b9;
        } catch (const std::exception& e) {
            r.error += std::string("b9: ") + e.what() + "; ";
        }
        try {
            r.omega_hb = pitchfork_frequency_hb(r.delta, dp, ref);
            r.ok_hb = true;
            if (r.ok_b9) {
                // re-select the fixture root nearest the HB solution
                r.omega_b9 =
                    pitchfork_frequency_asymptotic(r.delta, dp, AsymptoticSource::B9_fixture, r.omega_hb);
            }
        } catch (const std::exception& e) {
            r.error += std::string("hb: ") + e.what() + "; ";
        }
        try {
            const double guess = r.ok_hb ? r.omega_hb : ref;
            double lo = std::max(0.8, 0.7 * guess), hi = 1.45 * guess;
            r.omega_p = stability_transition_omega(r.delta, dp, lo, hi, cfg.integ);
            r.ok_p = true;
        } catch (const std::exception& e) {
            r.error += std::string("poincare: ") + e.what() + "; ";
        }
    });

    CsvWriter csv(cmd_detail::join_path(out_dir, "stability_curve.csv"),
                  "delta,omega_poincare,omega_hb,omega_asymptotic,source");
    for (const auto& r : rows) {
        csv.row(std::vector<std::string>{format_double(r.delta),
                                         r.ok_p ? format_double(r.omega_p) : "",
                                         r.ok_hb ? format_double(r.omega_hb) : "",
                                         r.ok_b9 ? format_double(r.omega_b9) : "", "B9_fixture"});
    }

    nlohmann::json curve = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json jr;
        jr["delta"] = r.delta;
        if (r.ok_p) jr["omega_poincare"] = r.omega_p;
        if (r.ok_hb) jr["omega_hb"] = r.omega_hb;
        if (r.ok_b9) jr["omega_asymptotic"] = r.omega_b9;
        if (!r.error.empty()) jr["error"] = r.error;
        curve.push_back(jr);
    }
    nlohmann::json summary;
    summary["command"] = "stability-curve";
    summary["curve"] = curve;
    return summary;
}

/// `asymptotics`: closed-form sweep export (mean speed, optimal COM).
inline nlohmann::json run_asymptotics(const ScenarioConfig& cfg, const std::string& out_dir,
                                      unsigned /*jobs*/) {
    if (!cfg.sweep)
        throw std::invalid_argument("asymptotics: config.sweep is required");
    const DimlessParams base = cfg.dimless();
    const int n = cfg.sweep->points;

    CsvWriter csv(cmd_detail::join_path(out_dir, "asymptotics.csv"),
                  "omega,delta,v_bar_asym,delta_opt,v_bar_max");
    for (int i = 0; i < n; ++i) {
        const double p = cfg.sweep->from + (cfg.sweep->to - cfg.sweep->from) * double(i) / (n - 1);
        DimlessParams dp = with_param(base, cfg.sweep->param, p);
        const double vb = mean_speed_asymptotic(dp);
        const OptimalDelta opt = optimal_delta(dp);
        csv.row(std::vector<double>{dp.omega, dp.delta, vb, opt.delta_opt, opt.v_bar_max});
    }

    const OptimalDelta opt = optimal_delta(base);
    nlohmann::json summary;
    summary["command"] = "asymptotics";
    summary["v_bar_asym"] = mean_speed_asymptotic(base);
    summary["delta_opt"] = opt.delta_opt;
    summary["v_bar_max"] = opt.v_bar_max;
    summary["interior_optimum"] = opt.interior;
    return summary;
}

/// `hb`: harmonic-balance pitchfork curve (numeric HB + both asymptotic
/// sources) over a delta grid.
inline nlohmann::json run_hb(const ScenarioConfig& cfg, const std::string& out_dir, unsigned jobs) {
    if (!cfg.sweep || cfg.sweep->param != SweepParam::delta)
        throw std::invalid_argument("hb: config.sweep over delta is required");
    const DimlessParams dp = cfg.dimless();
    const int n = cfg.sweep->points;

    struct Row {
        double delta = 0.0, omega_hb = 0.0, omega_b9 = 0.0, omega_semi = 0.0;
        bool ok_hb = false, ok_b9 = false, ok_semi = false;
        std::string error;
    };
    std::vector<Row> rows(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        Row& r = rows[i];
        r.delta = cfg.sweep->from + (cfg.sweep->to - cfg.sweep->from) * double(i) / (n - 1);
        double ref = 7.0 * std::pow(0.1 / r.delta, 0.8);
        try {
            r.omega_b9 =
                pitchfork_frequency_asymptotic(r.delta, dp, AsymptoticSource::B9_fixture, ref);
            r.ok_b9 = true;
            ref = r.omega_b9;
        } catch (const std::exception& e) {
            r.error += std::string("b9: ") + e.what() + "; ";
        }
        try {
            r.omega_hb = pitchfork_frequency_hb(r.delta, dp, ref);
            r.ok_hb = true;
            if (r.ok_b9)
                r.omega_b9 = pitchfork_frequency_asymptotic(r.delta, dp,
                                                            AsymptoticSource::B9_fixture, r.omega_hb);
        } catch (const std::exception& e) {
            r.error += std::string("hb: ") + e.what() + "; ";
        }
        try {
            r.omega_semi = pitchfork_frequency_asymptotic(
                r.delta, dp, AsymptoticSource::semi_numeric, r.ok_hb ? r.omega_hb : ref);
            r.ok_semi = true;
        } catch (const std::exception& e) {
            r.error += std::string("semi: ") + e.what() + "; ";
        }
    });

    CsvWriter csv(cmd_detail::join_path(out_dir, "hb_curve.csv"),
                  "delta,omega_hb,omega_asymptotic,source,omega_semi_numeric");
    for (const auto& r : rows)
        csv.row(std::vector<std::string>{format_double(r.delta),
                                         r.ok_hb ? format_double(r.omega_hb) : "",
                                         r.ok_b9 ? format_double(r.omega_b9) : "", "B9_fixture",
                                         r.ok_semi ? format_double(r.omega_semi) : ""});

    nlohmann::json curve = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json jr;
        jr["delta"] = r.delta;
        if (r.ok_hb) jr["omega_hb"] = r.omega_hb;
        if (r.ok_b9) jr["omega_b9"] = r.omega_b9;
        if (r.ok_semi) jr["omega_semi_numeric"] = r.omega_semi;
        if (!r.error.empty()) jr["error"] = r.error;
        curve.push_back(jr);
    }
    nlohmann::json summary;
    summary["command"] = "hb";
    summary["curve"] = curve;
    return summary;
}

} // namespace raps
