#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gvp/harness.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> engine, backend, domain, out_dir;
    std::optional<double> p;
    std::optional<int> budget, workers, max_iterations;
    std::vector<std::string> levels;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON run config");
    cmd->add_option("--seed", o.seed, "root seed");
    cmd->add_option("--engine", o.engine, "bfs or mcts");
    cmd->add_option("--backend", o.backend, "net or tabular");
    cmd->add_option("--domain", o.domain, "sokoban, npuzzle or grid");
    cmd->add_option("--p", o.p, "fraction of GVI samples per batch");
    cmd->add_option("--budget", o.budget, "node expansions per search run");
    cmd->add_option("--workers", o.workers, "search threads, 0 = all cores");
    cmd->add_option("--max-iterations", o.max_iterations, "curriculum iteration cap");
    cmd->add_option("--out-dir", o.out_dir, "run directory");
    cmd->add_option("--levels", o.levels, "level files or directories");
}

gvp::RunConfig resolve(const Overrides& o) try {
    auto cfg = o.config.empty() ? gvp::RunConfig{} : gvp::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.engine) cfg.engine = gvp::parse_engine(*o.engine);
    if (o.backend) cfg.backend = gvp::parse_backend(*o.backend);
    if (o.domain) cfg.domain = gvp::parse_domain(*o.domain);
    if (o.p) cfg.p = *o.p;
    if (o.budget) cfg.budget = *o.budget;
    if (o.workers) cfg.workers = *o.workers;
    if (o.max_iterations) cfg.max_iterations = *o.max_iterations;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (!o.levels.empty()) cfg.levels = o.levels;
    gvp::validate(cfg);
    return cfg;
} catch (const gvp::ConfigError&) {
    throw;
} catch (const gvp::Error& e) {
    throw gvp::ConfigError(e.what());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned search heuristics trained with graph value iteration"};
    app.require_subcommand(1);
    Overrides o;
    std::string plans;

    auto* solve = app.add_subcommand("solve", "train on a level set until no new level is solved");
    auto* grid = app.add_subcommand("grid-demo", "single-board grid curriculum with per-iteration frames");
    auto* quality = app.add_subcommand("quality", "N-puzzle plan quality against exact optima");
    auto* ablate = app.add_subcommand("ablate", "matched-seed runs over several values of p");
    auto* validate = app.add_subcommand("validate", "replay a plans file");
    auto* oracle = app.add_subcommand("oracle", "exact shortest plan lengths");
    for (auto* cmd : {solve, grid, quality, ablate, validate, oracle}) add_common(cmd, o);
    validate->add_option("--plans", plans, "plans file (id<TAB>plan)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::ostream* log = &std::cerr;
    try {
        const auto cfg = resolve(o);
        if (solve->parsed()) {
            const auto r = gvp::cmd_solve(cfg, log);
            std::printf("solved %zu/%zu in %d iterations; run directory %s\n", r.run.pool.solved_count(),
                        r.run.pool.size(), r.run.summary.iterations, cfg.out_dir.c_str());
        } else if (grid->parsed()) {
            const auto r = gvp::cmd_grid_demo(cfg, log);
            std::printf("first solve: %d; re-solved %d/%d follow-up iterations; iteration 1 connected: %s\n",
                        r.first_solve, r.resolved, r.followups, r.iteration1_connected ? "yes" : "no");
        } else if (quality->parsed()) {
            const auto r = gvp::cmd_quality(cfg, log);
            std::printf("relaxation,solved,instances,percent\n");
            for (std::size_t t = 0; t < gvp::kRelaxations.size(); ++t)
                std::printf("+%d,%zu,%zu,%.2f\n", gvp::kRelaxations[t], r.within[t], r.instances, r.percent(r.within[t]));
            std::printf("any,%zu,%zu,%.2f\n", r.solved, r.instances, r.percent(r.solved));
            std::printf("oracle excluded: %zu\n", r.excluded);
        } else if (ablate->parsed()) {
            std::printf("p,instances,solved,iterations,plan_samples,gvi_samples\n");
            for (const auto& r : gvp::cmd_ablate(cfg, log))
                std::printf("%g,%zu,%zu,%d,%zu,%zu\n", r.p, r.instances, r.solved, r.iterations, r.plan_samples,
                            r.gvi_samples);
        } else if (validate->parsed()) {
            const auto r = gvp::cmd_validate(cfg, plans);
            for (const auto& f : r.failures) std::printf("INVALID %s: %s\n", f.id.c_str(), f.reason.c_str());
            std::printf("%zu plans checked, %zu invalid\n", r.checked, r.failures.size());
            return r.ok() ? 0 : 2;
        } else if (oracle->parsed()) {
            std::printf("instance_id,optimal_length,solver,nodes\n");
            for (const auto& r : gvp::cmd_oracle(cfg, nullptr))
                std::printf("%s,%d,%s,%lld\n", r.instance_id.c_str(), r.optimal_length,
                            std::string(gvp::to_string(r.solver)).c_str(), static_cast<long long>(r.nodes));
        }
    } catch (const gvp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const gvp::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const gvp::PlanError& e) {
        std::cerr << "invalid plan: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
