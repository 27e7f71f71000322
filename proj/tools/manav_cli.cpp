#include "manav/episode.hpp"
#include "manav/miqp.hpp"
#include "manav/plot.hpp"
#include "manav/scenario.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

manav::Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scenario file " + path);
    }
    return manav::read_scenario(in);
}

int cmd_gen_map(std::uint64_t seed, const manav::MapSpec& spec, const std::string& out) {
    const manav::Scenario s = manav::generate_map(seed, spec);
    if (out.empty()) {
        manav::write_scenario(std::cout, s);
        return 0;
    }
    std::ofstream os(out);
    if (!os) {
        throw std::runtime_error("cannot write " + out);
    }
    manav::write_scenario(os, s);
    return 0;
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed, const manav::EpisodeConfig& cfg,
            const std::string& out_dir) {
    const manav::Scenario scenario =
        scenario_path.empty() ? manav::generate_map(seed, {}) : load_scenario(scenario_path);
    const manav::EpisodeLog log = manav::run_episode(scenario, cfg);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        std::ofstream sc(dir / "scenario.json");
        manav::write_scenario(sc, scenario);
        std::ofstream lg(dir / "log.jsonl");
        manav::write_log(lg, log);
        manav::emit_plots(log, scenario, (dir / "episode.svg").string());
    }

    const char* outcome = log.outcome == manav::EpisodeOutcome::GoalReached ? "GoalReached"
                          : log.outcome == manav::EpisodeOutcome::Stuck     ? "Stuck"
                                                                            : "Timeout";
    std::cout << "outcome=" << outcome << " duration_s=" << log.duration
              << " plans=" << log.plans.size() << " replans=" << log.replans.size();
    if (!log.error.empty()) {
        std::cout << " error=\"" << log.error << '"';
    }
    std::cout << '\n';
    return log.outcome == manav::EpisodeOutcome::GoalReached ? 0 : 1;
}

int cmd_plot(const std::string& log_path, const std::string& scenario_path,
             const std::string& out) {
    std::ifstream in(log_path);
    if (!in) {
        throw std::runtime_error("cannot open log file " + log_path);
    }
    const manav::EpisodeLog log = manav::read_log(in);
    manav::emit_plots(log, load_scenario(scenario_path), out);
    return 0;
}

int cmd_solve(const std::string& problem_path, double j_max, bool trace) {
    std::ifstream in(problem_path);
    if (!in) {
        throw std::runtime_error("cannot open problem file " + problem_path);
    }
    const manav::MIQProblem problem = manav::read_problem(in);
    manav::MIQPOptions options;
    if (trace) {
        options.trace = &std::cerr;
    }
    const manav::SolveOutcome out = manav::solve(problem, j_max, options);
    const char* status = nullptr;
    int code = 0;
    switch (out.status) {
        case manav::MIQPStatus::Optimal: status = "Optimal"; code = 0; break;
        case manav::MIQPStatus::BoundExceeded: status = "BoundExceeded"; code = 2; break;
        case manav::MIQPStatus::InfeasibleCertified: status = "InfeasibleCertified"; code = 3; break;
        default: status = "IterationLimit"; code = 4; break;
    }
    std::cout << "status=" << status << " iterations=" << out.iterations
              << " j_minus=" << out.j_minus << " j_plus=" << out.j_plus << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Medial-axis navigation with mixed-integer MPC"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::string scenario_path;
    std::string out_path;
    std::string out_dir;
    std::string log_path;
    std::string problem_path;
    bool trace = false;
    manav::MapSpec map_spec;
    manav::EpisodeConfig episode_cfg;

    CLI::App* gen = app.add_subcommand("gen-map", "Generate a random scenario file");
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--mapped", map_spec.mapped_count, "Mapped obstacle count");
    gen->add_option("--unmapped", map_spec.unmapped_count, "Unmapped obstacle count");
    gen->add_option("--out", out_path, "Output file (stdout when omitted)");

    CLI::App* run = app.add_subcommand("run", "Run a closed-loop episode");
    run->add_option("--scenario", scenario_path, "Scenario file (generated from --seed otherwise)");
    run->add_option("--seed", seed, "RNG seed for a generated scenario");
    run->add_option("--out-dir", out_dir, "Directory for scenario.json, log.jsonl, episode.svg");
    run->add_option("--time-limit", episode_cfg.time_limit, "Simulated time limit, seconds");
    run->add_option("--j-max", episode_cfg.mpc.j_max, "Re-plan objective threshold");
    run->add_option("--horizon", episode_cfg.mpc.N, "MPC horizon steps");

    CLI::App* plot = app.add_subcommand("plot", "Render an episode log as SVG");
    plot->add_option("--log", log_path, "Episode log (JSONL)")->required();
    plot->add_option("--scenario", scenario_path, "Scenario file")->required();
    plot->add_option("--out", out_path, "Output SVG path")->required();

    CLI::App* solve = app.add_subcommand("solve", "Solve a mixed-integer QP fixture");
    double j_max = 1000.0;
    solve->add_option("--problem", problem_path, "Problem file (JSON)")->required();
    solve->add_option("--j-max", j_max, "Bound-exceeded threshold");
    solve->add_flag("--trace", trace, "Emit per-iteration records to stderr");

    CLI11_PARSE(app, argc, argv);
    try {
        if (gen->parsed()) {
            return cmd_gen_map(seed, map_spec, out_path);
        }
        if (run->parsed()) {
            return cmd_run(scenario_path, seed, episode_cfg, out_dir);
        }
        if (plot->parsed()) {
            return cmd_plot(log_path, scenario_path, out_path);
        }
        return cmd_solve(problem_path, j_max, trace);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 70;
    }
}
