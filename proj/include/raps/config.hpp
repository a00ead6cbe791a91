#pragma once

// Scenario configuration: JSON parsing with path-qualified diagnostics.
// Frequencies may be given dimensionally (Omega) or dimensionlessly (omega)
// but exactly one must be present; everything is normalized to omega.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "raps/continuation.hpp"
#include "raps/integrator.hpp"
#include "raps/model.hpp"

namespace raps {

struct SweepSpec {
    SweepParam param = SweepParam::omega;
    double from = 0.0;
    double to = 0.0;
    int points = 2;
};

struct ScenarioConfig {
    PhysicalParams params;
    double amplitude = 1.0;   ///< actuation amplitude actually used
    double omega = 0.0;       ///< dimensionless frequency
    double Omega = 0.0;       ///< dimensional frequency [rad/s]
    double t_end = -1.0;      ///< dimensionless; < 0 means the 200-period default
    IntegratorConfig integ{};
    std::optional<SweepSpec> sweep;
    std::vector<ReducedState> seeds;

    DimlessParams dimless() const {
        DimlessParams dp = nondimensionalize(params, Omega);
        dp.A = amplitude;
        return dp;
    }

    double sim_t_end() const { return t_end > 0.0 ? t_end : 200.0 * 2.0 * M_PI / omega; }
};

namespace config_detail {

inline void reject_unknown(const nlohmann::json& j, const char* path,
                           std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known)
            throw std::invalid_argument(std::string(path) + ": unknown key `" + it.key() + "`");
    }
}

inline double number_at(const nlohmann::json& j, const char* path, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string(path) + "." + key + ": missing required key");
    if (!j.at(key).is_number())
        throw std::invalid_argument(std::string(path) + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

} // namespace config_detail

inline ScenarioConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config: expected a JSON object");
    config_detail::reject_unknown(j, "config", {"params", "actuation", "sim", "sweep", "seeds"});

    ScenarioConfig cfg;
    if (!j.contains("params"))
        throw std::invalid_argument("config.params: missing required key");
    try {
        cfg.params = physical_params_from_json(j.at("params"));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("config.") + e.what());
    }

    if (!j.contains("actuation"))
        throw std::invalid_argument("config.actuation: missing required key");
    const json& act = j.at("actuation");
    if (!act.is_object())
        throw std::invalid_argument("config.actuation: expected a JSON object");
    config_detail::reject_unknown(act, "config.actuation", {"A", "Omega", "omega"});
    const bool has_dim = act.contains("Omega");
    const bool has_dimless = act.contains("omega");
    if (has_dim == has_dimless)
        throw std::invalid_argument(
            "config.actuation: ambiguous frequency (give exactly one of Omega, omega)");
    const double t_c = cfg.params.m_r / cfg.params.c;
    if (has_dim) {
        cfg.Omega = config_detail::number_at(act, "config.actuation", "Omega");
        cfg.omega = t_c * cfg.Omega;
    } else {
        cfg.omega = config_detail::number_at(act, "config.actuation", "omega");
        cfg.Omega = cfg.omega / t_c;
    }
    if (!(cfg.omega > 0.0))
        throw std::invalid_argument("config.actuation: frequency must be positive");
    cfg.amplitude = cfg.params.A;
    if (act.contains("A")) {
        if (!act.at("A").is_number())
            throw std::invalid_argument("config.actuation.A: expected a number");
        cfg.amplitude = act.at("A").get<double>();
        if (!(cfg.amplitude >= 0.0))
            throw std::invalid_argument("config.actuation.A: out of range (must be >= 0)");
    }

    if (j.contains("sim")) {
        const json& sim = j.at("sim");
        if (!sim.is_object())
            throw std::invalid_argument("config.sim: expected a JSON object");
        config_detail::reject_unknown(sim, "config.sim", {"t_end", "rtol", "atol"});
        if (sim.contains("t_end")) {
            cfg.t_end = sim.at("t_end").get<double>();
            if (!(cfg.t_end > 0.0))
                throw std::invalid_argument("config.sim.t_end: out of range (must be > 0)");
        }
        if (sim.contains("rtol")) {
            cfg.integ.rtol = sim.at("rtol").get<double>();
            if (!(cfg.integ.rtol > 0.0) || cfg.integ.rtol > 1e-3)
                throw std::invalid_argument("config.sim.rtol: out of range (must be in (0, 1e-3])");
        }
        if (sim.contains("atol")) {
            cfg.integ.atol = sim.at("atol").get<double>();
            if (!(cfg.integ.atol > 0.0))
                throw std::invalid_argument("config.sim.atol: out of range (must be > 0)");
        }
    }

    if (j.contains("sweep")) {
        const json& sw = j.at("sweep");
        if (!sw.is_object())
            throw std::invalid_argument("config.sweep: expected a JSON object");
        config_detail::reject_unknown(sw, "config.sweep", {"param", "from", "to", "points"});
        SweepSpec spec;
        if (!sw.contains("param"))
            throw std::invalid_argument("config.sweep.param: missing required key");
        const std::string pname = sw.at("param").get<std::string>();
        if (pname == "omega")
            spec.param = SweepParam::omega;
        else if (pname == "delta")
            spec.param = SweepParam::delta;
        else
            throw std::invalid_argument("config.sweep.param: must be `omega` or `delta`");
        spec.from = config_detail::number_at(sw, "config.sweep", "from");
        spec.to = config_detail::number_at(sw, "config.sweep", "to");
        if (!(spec.to > spec.from))
            throw std::invalid_argument("config.sweep: bounds must be ordered (from < to)");
        if (!sw.contains("points"))
            throw std::invalid_argument("config.sweep.points: missing required key");
        spec.points = sw.at("points").get<int>();
        if (spec.points < 2)
            throw std::invalid_argument("config.sweep.points: out of range (must be >= 2)");
        cfg.sweep = spec;
    }

    if (j.contains("seeds")) {
        const json& seeds = j.at("seeds");
        if (!seeds.is_array())
            throw std::invalid_argument("config.seeds: expected an array of [phi, sigma, v]");
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const json& s = seeds[i];
            if (!s.is_array() || s.size() != 3)
                throw std::invalid_argument("config.seeds[" + std::to_string(i) +
                                            "]: expected [phi, sigma, v]");
            cfg.seeds.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
        }
    }

    return cfg;
}

} // namespace raps
