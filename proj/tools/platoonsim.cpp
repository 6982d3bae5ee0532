// platoonsim: simulation, analysis and trajectory export for platoon-forming
// intersections.
//
// Exit codes:
//   0  success
//   1  usage error
//   2  configuration or I/O error
//   3  unstable load (rho >= 1 without --transient)
//   4  trajectory planning failed for at least one vehicle (files still written)
//   5  any other library error

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "platoon/config.hpp"
#include "platoon/output.hpp"
#include "platoon/polling.hpp"
#include "platoon/sim.hpp"
#include "platoon/spa.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace {

enum Exit { Ok = 0, Usage = 1, BadConfig = 2, Unstable = 3, TrajectoryFailure = 4, Other = 5 };

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> horizon;
    std::string rho;
    std::string pfa;
    std::string spa = "min-distance";
    bool asymmetric = false;
    bool transient = false;
    bool vehicle_log = false;
    double sample_dt = 0.1;
};

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, sep);) {
        parts.push_back(item);
    }
    return parts;
}

double parse_double(const std::string& text, const char* what)
{
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::ConfigError, fmt::format("bad {} '{}'", what, text));
    }
    return value;
}

/// "A:B:STEP" or a single value.
std::vector<double> parse_rho_grid(const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.size() == 1) {
        return {parse_double(parts[0], "rho")};
    }
    if (parts.size() != 3) {
        throw Error(ErrorCode::ConfigError, fmt::format("--rho expects A:B:STEP, got '{}'", text));
    }
    const double from = parse_double(parts[0], "rho start");
    const double to = parse_double(parts[1], "rho end");
    const double step = parse_double(parts[2], "rho step");
    if (step <= 0.0 || to < from || from <= 0.0) {
        throw Error(ErrorCode::ConfigError, fmt::format("--rho '{}' is not an increasing positive grid", text));
    }
    std::vector<double> grid;
    for (long k = 0;; ++k) {
        const double x = from + static_cast<double>(k) * step;
        if (x > to + 1e-9 * step) {
            break;
        }
        grid.push_back(std::round(x * 1e12) / 1e12);
        if (grid.size() > 100000) {
            throw Error(ErrorCode::ConfigError, "--rho grid too large");
        }
    }
    return grid;
}

std::vector<PfaKind> parse_pfa_list(const std::string& text, int cap)
{
    std::vector<PfaKind> kinds;
    for (const auto& item : split(text, ',')) {
        try {
            kinds.push_back(parse_pfa(item, cap));
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, e.detail());
        }
    }
    if (kinds.empty()) {
        throw Error(ErrorCode::ConfigError, "--pfa list is empty");
    }
    return kinds;
}

int batch_cap(const ExperimentConfig& cfg) { return cfg.pfa.discipline == PfaKind::Discipline::Batch ? cfg.pfa.cap : 100; }

ExperimentConfig load(const Options& opt)
{
    auto cfg = load_config(opt.config);
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (opt.horizon) {
        cfg.horizon = *opt.horizon;
        cfg.warmup = -1;
    }
    if (opt.asymmetric) {
        if (cfg.params.lanes != 2) {
            throw Error(ErrorCode::ConfigError, "--asymmetric needs n = 2");
        }
        // rho_1 = 3 rho_2 at the configured total load
        const double rho = cfg.params.load();
        cfg.params.arrival_rate = {0.75 * rho / cfg.params.headway[0], 0.25 * rho / cfg.params.headway[1]};
    }
    return cfg;
}

SimConfig sim_config(const ExperimentConfig& cfg, const Options& opt)
{
    SimConfig sc;
    sc.params = cfg.params;
    sc.pfa = cfg.pfa;
    sc.horizon = cfg.horizon;
    sc.warmup = cfg.warmup;
    sc.seed = cfg.seed;
    sc.steady_state = !opt.transient;
    return sc;
}

fs::path output_dir(const Options& opt)
{
    const fs::path dir(opt.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, fmt::format("cannot create output directory '{}'", opt.out));
    }
    return dir;
}

int cmd_run(const Options& opt)
{
    auto cfg = load(opt);
    if (!opt.pfa.empty()) {
        const auto kinds = parse_pfa_list(opt.pfa, batch_cap(cfg));
        if (kinds.size() != 1) {
            throw Error(ErrorCode::ConfigError, "run takes a single --pfa");
        }
        cfg.pfa = kinds.front();
    }
    if (!opt.rho.empty()) {
        const auto grid = parse_rho_grid(opt.rho);
        if (grid.size() != 1) {
            throw Error(ErrorCode::ConfigError, "run takes a single --rho value");
        }
        cfg.params.arrival_rate = scale_rates(cfg.params, grid.front());
    }
    auto sc = sim_config(cfg, opt);
    validate_config(sc.params, sc.steady_state);
    const auto dir = output_dir(opt);

    SimStats stats;
    if (opt.vehicle_log) {
        const double offset = free_flow_offset(sc.params);
        write_atomic(dir / "vehicles.jsonl", [&](std::ostream& out) {
            sc.on_crossing = [&](const Vehicle& v) { write_vehicle_log_line(out, v, offset); };
            stats = run(sc);
        });
    } else {
        stats = run(sc);
    }

    const auto inp = polling_input(sc.params);
    const bool analytic = sc.pfa.discipline != PfaKind::Discipline::Batch && inp.rho() < 1.0;
    std::vector<std::optional<double>> approx;
    for (int lane = 1; lane <= inp.lanes(); ++lane) {
        approx.push_back(analytic ? std::optional(approx_mean_delay(inp, sc.pfa.discipline, lane)) : std::nullopt);
    }
    const auto approx_all = analytic ? std::optional(approx_mean_delay_all(inp, sc.pfa.discipline)) : std::nullopt;
    write_atomic(dir / "results.csv", [&](std::ostream& out) {
        out << kResultsHeader << '\n';
        write_results_rows(out, sc.params.load(), sc.pfa, stats, approx, approx_all, sc.seed);
    });
    std::cout << fmt::format("{} rho={} mean delay {} +- {} (n={}), fairness {}\n", sc.pfa.name(),
                             format_number(sc.params.load()), format_number(stats.all.mean),
                             format_number(stats.all.ci95), stats.all.count, format_number(stats.all.fairness()));
    return Ok;
}

int cmd_sweep(const Options& opt)
{
    const auto cfg = load(opt);
    const auto grid = parse_rho_grid(opt.rho.empty() ? "0.1:0.9:0.1" : opt.rho);
    const auto kinds = parse_pfa_list(opt.pfa.empty() ? "exhaustive,gated,batch" : opt.pfa, batch_cap(cfg));
    const auto sc = sim_config(cfg, opt);
    const auto dir = output_dir(opt);
    const auto points = sweep(sc, grid, kinds, sweep_threads());
    write_atomic(dir / "delay_sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, points, sc.seed); });
    write_atomic(dir / "delay_sweep_lanes.csv",
                 [&](std::ostream& out) { write_sweep_lanes_csv(out, points, sc.seed); });
    std::cout << fmt::format("{} sweep points written to {}\n", points.size(), (dir / "delay_sweep.csv").string());
    return Ok;
}

int cmd_approx(const Options& opt)
{
    const auto cfg = load(opt);
    const auto grid = parse_rho_grid(opt.rho.empty() ? "0.1:0.9:0.1" : opt.rho);
    const auto kinds = parse_pfa_list(opt.pfa.empty() ? "exhaustive,gated" : opt.pfa, batch_cap(cfg));
    validate_config(cfg.params, false);
    const auto inp = polling_input(cfg.params);
    const auto dir = output_dir(opt);
    write_atomic(dir / "approx.csv", [&](std::ostream& out) { write_approx_csv(out, inp, grid, kinds); });
    std::cout << fmt::format("approximation written to {}\n", (dir / "approx.csv").string());
    return Ok;
}

int cmd_traj(const Options& opt)
{
    auto cfg = load(opt);
    if (!opt.pfa.empty()) {
        const auto kinds = parse_pfa_list(opt.pfa, batch_cap(cfg));
        if (kinds.size() != 1) {
            throw Error(ErrorCode::ConfigError, "traj takes a single --pfa");
        }
        cfg.pfa = kinds.front();
    }
    if (cfg.arrivals.empty()) {
        throw Error(ErrorCode::ConfigError, "traj needs a non-empty 'arrivals' list in the config");
    }
    if (!(opt.sample_dt > 0.0)) {
        throw Error(ErrorCode::ConfigError, "--dt must be positive");
    }
    SpaKind spa{};
    try {
        spa = parse_spa(opt.spa);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.detail());
    }
    const auto& p = cfg.params;
    const auto crossed = schedule_scripted(p, cfg.pfa, cfg.arrivals);
    std::vector<double> spa_entry;
    for (const auto& v : crossed) {
        spa_entry.push_back(v.earliest - p.region_spa / p.v_max);
    }
    const auto plans = plan_schedule(crossed, spa_entry, spa, p);
    const auto dir = output_dir(opt);
    write_atomic(dir / "trajectories.csv", [&](std::ostream& out) { write_segments_csv(out, plans); });
    write_atomic(dir / "trajectory_samples.csv",
                 [&](std::ostream& out) { write_samples_csv(out, plans, opt.sample_dt); });
    write_atomic(dir / "crossings.csv", [&](std::ostream& out) {
        out << "vehicle_id,lane,entry_t,a,c,delay,accel_cost,status\n";
        for (const auto& pv : plans) {
            const auto& v = pv.vehicle;
            out << fmt::format("{},{},{},{},{},{},{},{}\n", v.id, v.lane,
                               format_number(cfg.arrivals[static_cast<std::size_t>(v.id - 1)].t),
                               format_number(v.earliest), format_number(v.crossing), format_number(v.delay()),
                               pv.trajectory ? format_number(accel_cost(*pv.trajectory)) : std::string(),
                               pv.error ? to_string(*pv.error) : "ok");
        }
    });
    int failures = 0;
    for (const auto& pv : plans) {
        if (pv.error) {
            ++failures;
            std::cerr << fmt::format("platoonsim: {}: {}\n", to_string(*pv.error), pv.message);
        }
    }
    std::cout << fmt::format("{} vehicles planned with {}, {} failed\n", plans.size(), to_string(spa), failures);
    return failures > 0 ? TrajectoryFailure : Ok;
}

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::UnstableLoad: return Unstable;
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::NonPositiveParameter:
    case ErrorCode::SClearanceBelowB: return BadConfig;
    default: return Other;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Platoon-forming intersection simulator and analysis"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration file")->required();
        sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "Override the configured seed");
        sub->add_flag("--asymmetric", opt.asymmetric, "Two lanes with rho_1 = 3 rho_2 at the same total load");
    };
    auto* run_cmd = app.add_subcommand("run", "One simulation: results.csv (and vehicles.jsonl)");
    add_common(run_cmd);
    run_cmd->add_option("--pfa", opt.pfa, "exhaustive | gated | batch[:cap]");
    run_cmd->add_option("--rho", opt.rho, "Scale the arrival rates to this total load");
    run_cmd->add_option("--horizon", opt.horizon, "Override horizon_vehicles (warm-up back to 10%)");
    run_cmd->add_flag("--transient", opt.transient, "Allow rho >= 1");
    run_cmd->add_flag("--vehicle-log", opt.vehicle_log, "Write vehicles.jsonl");

    auto* sweep_cmd = app.add_subcommand("sweep", "Delay and fairness over a load grid: delay_sweep.csv");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--rho", opt.rho, "Load grid A:B:STEP")->default_str("0.1:0.9:0.1");
    sweep_cmd->add_option("--pfa", opt.pfa, "Comma-separated disciplines")->default_str("exhaustive,gated,batch");
    sweep_cmd->add_option("--horizon", opt.horizon, "Override horizon_vehicles (warm-up back to 10%)");
    sweep_cmd->add_flag("--transient", opt.transient, "Allow rho >= 1");

    auto* approx_cmd = app.add_subcommand("approx", "Analytic mean-delay approximation: approx.csv");
    add_common(approx_cmd);
    approx_cmd->add_option("--rho", opt.rho, "Load grid A:B:STEP")->default_str("0.1:0.9:0.1");
    approx_cmd->add_option("--pfa", opt.pfa, "Comma-separated disciplines")->default_str("exhaustive,gated");

    auto* traj_cmd = app.add_subcommand("traj", "Trajectories of a scripted scenario: trajectories.csv");
    add_common(traj_cmd);
    traj_cmd->add_option("--spa", opt.spa, "min-distance | min-accel")->capture_default_str();
    traj_cmd->add_option("--pfa", opt.pfa, "Override the configured discipline");
    traj_cmd->add_option("--dt", opt.sample_dt, "Sampling step of trajectory_samples.csv")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*run_cmd) {
            return cmd_run(opt);
        }
        if (*sweep_cmd) {
            return cmd_sweep(opt);
        }
        if (*approx_cmd) {
            return cmd_approx(opt);
        }
        return cmd_traj(opt);
    } catch (const Error& e) {
        std::cerr << "platoonsim: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "platoonsim: " << e.what() << '\n';
        return Other;
    }
}
