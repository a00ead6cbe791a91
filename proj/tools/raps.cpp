// Command-line front end: each subcommand reproduces one analysis family
// (time simulation, orbit census, bifurcation branches, stability curves,
// asymptotics, harmonic balance) and emits CSV/JSON artifacts for external
// plotting.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "raps/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = ".";
    unsigned jobs = raps::default_jobs();
    std::string seed_set;
    bool dry_run = false;
};

void apply_seed_set(raps::ScenarioConfig& cfg, const std::string& name) {
    if (name.empty()) return;
    cfg.seeds.clear();
    if (name == "origin") {
        cfg.seeds.push_back({0.0, 0.0, 0.0});
    } else if (name == "default") {
        cfg.seeds = {{0.0, 0.0, 0.0},
                     {1.0, 0.0, 0.0},
                     {-1.0, 0.0, 0.0},
                     {1.2, 0.0, 0.05},
                     {-1.2, 0.0, 0.05}};
    } else {
        throw std::invalid_argument("unknown --seed-set `" + name + "` (origin, default)");
    }
}

int run(const std::string& name, const GlobalArgs& args) {
    raps::ScenarioConfig cfg = raps::parse_config(read_file(args.config_path));
    apply_seed_set(cfg, args.seed_set);

    if (args.dry_run) {
        nlohmann::json j;
        j["command"] = name;
        j["ok"] = true;
        j["dry_run"] = true;
        j["omega"] = cfg.omega;
        std::cout << j.dump(2) << std::endl;
        return 0;
    }

    std::filesystem::create_directories(args.out_dir);
    raps::log_info("running `" + name + "` -> " + args.out_dir);

    nlohmann::json summary;
    if (name == "simulate")
        summary = raps::run_simulate(cfg, args.out_dir, args.jobs);
    else if (name == "orbit")
        summary = raps::run_orbit(cfg, args.out_dir, args.jobs);
    else if (name == "branch")
        summary = raps::run_branch(cfg, args.out_dir, args.jobs);
    else if (name == "stability-curve")
        summary = raps::run_stability_curve(cfg, args.out_dir, args.jobs);
    else if (name == "asymptotics")
        summary = raps::run_asymptotics(cfg, args.out_dir, args.jobs);
    else if (name == "hb")
        summary = raps::run_hb(cfg, args.out_dir, args.jobs);
    else
        throw std::logic_error("unhandled subcommand " + name);

    std::cout << summary.dump(2) << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAPS Twistcar simulation and bifurcation-analysis toolkit"};
    app.require_subcommand(1);

    GlobalArgs args;
    const char* names[] = {"simulate", "orbit", "branch", "stability-curve", "asymptotics", "hb"};
    const char* descs[] = {
        "integrate the reduced dynamics and report steady-state means",
        "census of periodic orbits (stable and unstable) at fixed parameters",
        "continuation branch diagram with pitchfork/fold markers",
        "stability transition curve: Poincare bisection vs HB vs polynomial roots",
        "closed-form mean-speed and optimal-COM sweep",
        "harmonic-balance pitchfork curve over delta"};
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", args.config_path, "scenario config JSON")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args.out_dir, "output directory (default: .)");
        sub->add_option("--jobs", args.jobs, "worker threads for sweeps");
        sub->add_option("--seed-set", args.seed_set, "named seed set: origin, default");
        sub->add_flag("--dry-run", args.dry_run, "validate the config without computing");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run(name, args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "raps " << name << ": config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "raps " << name << ": " << e.what() << std::endl;
        return 1;
    }
}
