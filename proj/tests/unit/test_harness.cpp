#include <doctest.h>

#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gvp/harness.hpp"
#include "gvp/npuzzle.hpp"

using namespace gvp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("gvp_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Distances from the goal over the whole 8-puzzle state space.
std::unordered_map<State, int, StateHash> enumerate_8puzzle() {
    const auto goal = make_npuzzle_goal_instance(3);
    std::unordered_map<State, int, StateHash> dist{{goal.start, 0}};
    std::deque<State> todo{goal.start};
    while (!todo.empty()) {
        const auto s = todo.front();
        todo.pop_front();
        for (const auto& t : successors(s, goal))
            if (dist.emplace(t.next, dist[s] + 1).second) todo.push_back(t.next);
    }
    return dist;
}

RunConfig small_puzzle_config(const fs::path& out) {
    RunConfig cfg;
    cfg.domain = DomainKind::npuzzle;
    cfg.quality_per_k = 4;
    cfg.quality_k_max = 6;
    cfg.batch_instances = 8;
    cfg.train_steps = 4;
    cfg.train_batch = 32;
    cfg.hidden = 32;
    cfg.budget = 100;
    cfg.max_iterations = 15;
    cfg.workers = 2;
    cfg.checkpoint_every = 5;
    cfg.out_dir = out.string();
    return cfg;
}

}  // namespace

TEST_CASE("config round trip") {
    RunConfig cfg;
    CHECK(config_from_json(to_json(cfg)) == cfg);
    cfg.domain = DomainKind::grid;
    cfg.engine = Engine::mcts;
    cfg.backend = Backend::tabular;
    cfg.p = 0.25;
    cfg.seed = 0xfedcba9876543210ULL;
    cfg.levels = {"a.xsb", "dir"};
    cfg.grid = GridSpec{7, 9, {1, 2}, {6, 8}};
    cfg.ablate_p = {0.0, 1.0};
    cfg.learning_rate = 0.123456789012345;
    CHECK(config_from_json(to_json(cfg)) == cfg);

    const auto dir = scratch("config");
    save_config(cfg, dir / "c.json");
    CHECK(load_config(dir / "c.json") == cfg);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(config_from_json("{\"bogus\": 1}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{\"p\": 1.5}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{\"budget\": 0}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{\"engine\": \"dfs\"}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{\"seed\": -1}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{\"grid\": {\"height\": 5, \"width\": 5, \"goal\": [5, 0]}}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{"), ConfigError);
    CHECK(config_from_json("{}") == RunConfig{});
}

TEST_CASE("shipped configs load") {
    for (const char* name : {"grid-demo", "npuzzle-quality", "npuzzle-ablate", "sokoban-microban"})
        CHECK_NOTHROW(load_config(fs::path(GVP_SOURCE_DIR) / "configs" / (std::string(name) + ".json")));
}

TEST_CASE("oracle") {
    CHECK(oracle_optimal(make_npuzzle_goal_instance(3)).optimal_length == 0);
    CHECK(oracle_optimal(make_grid_instance(GridSpec{})).optimal_length == 98);
    CHECK(oracle_optimal(make_grid_instance(GridSpec{5, 5, {2, 2}, {2, 2}})).optimal_length == 0);

    const auto goal = make_npuzzle_goal_instance(3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int len = oracle_optimal(scramble(goal, 1, seed)).optimal_length;
        CHECK((len == 0 || len == 1));
    }
    CHECK_THROWS_AS(oracle_optimal(scramble(goal, 40, 3), 10), OracleLimitError);
    CHECK_THROWS_AS(oracle_optimal(make_npuzzle_instance({0, 2, 1, 3, 4, 5, 6, 7, 8}, "odd")), Error);
}

TEST_CASE("oracle agrees with exhaustive enumeration") {
    const auto dist = enumerate_8puzzle();
    CHECK(dist.size() == 181440);
    int deepest = 0;
    for (const auto& [s, d] : dist) deepest = std::max(deepest, d);
    CHECK(deepest == 31);
    int hardest = 0, sampled = 0;
    for (const auto& [s, d] : dist) {
        const bool pick = d == deepest || (s.hash() % 2000 == 0);
        if (!pick) continue;
        auto values = std::vector<State::value_type>(s.values().begin(), s.values().end());
        const auto r = oracle_optimal(make_npuzzle_instance(values, "x"));
        CHECK(r.optimal_length == d);
        CHECK(r.solver == OracleSolver::ida_star);
        hardest += d == deepest;
        ++sampled;
    }
    CHECK(hardest >= 1);
    CHECK(sampled > 50);
}

TEST_CASE("plans file validation") {
    const auto dir = scratch("validate");
    const auto goal = make_npuzzle_goal_instance(3);
    std::vector<Instance> insts;
    for (int i = 0; i < 3; ++i) {
        auto inst = scramble(goal, 8, static_cast<std::uint64_t>(i) + 1);
        inst.id = "i" + std::to_string(i);
        insts.push_back(inst);
    }
    TaskPool pool(insts);
    std::vector<std::size_t> idx{0, 1, 2};
    std::vector<SearchOutcome> outs;
    for (const auto& inst : insts) outs.push_back(bfs_run(inst, ManhattanHeuristic{}, 10000, 1.0));
    update_pool(pool, idx, outs);
    write_plans(dir / "plans.tsv", pool);
    auto entries = read_plans(dir / "plans.tsv");
    REQUIRE(entries.size() == 3);
    CHECK(validate_plans(entries, insts).ok());

    SUBCASE("corrupted action character") {
        entries[1].text[0] = 'X';
        const auto r = validate_plans(entries, insts);
        REQUIRE(r.failures.size() == 1);
        CHECK(r.failures[0].id == "i1");
    }
    SUBCASE("plan ending off the goal") {
        entries[2].text.pop_back();
        const auto r = validate_plans(entries, insts);
        REQUIRE(r.failures.size() == 1);
        CHECK(r.failures[0].id == "i2");
    }
    SUBCASE("unknown instance") {
        entries[0].id = "nope";
        CHECK(validate_plans(entries, insts).failures.size() == 1);
    }
}

TEST_CASE("connected_from") {
    GridSpec g{3, 3, {0, 0}, {2, 2}};
    std::vector<std::uint8_t> mask{1, 1, 0, 0, 1, 0, 0, 1, 1};
    CHECK(connected_from(g, mask, {0, 0}));
    mask[2] = 1;  // touches (0,1)
    CHECK(connected_from(g, mask, {0, 0}));
    mask = {1, 0, 1, 0, 0, 0, 0, 0, 0};
    CHECK_FALSE(connected_from(g, mask, {0, 0}));
    mask = {0, 1, 0, 0, 0, 0, 0, 0, 0};
    CHECK_FALSE(connected_from(g, mask, {0, 0}));
}

TEST_CASE("solve writes a complete, reproducible run directory") {
    const auto a = scratch("solve_a"), b = scratch("solve_b");
    auto cfg = small_puzzle_config(a);
    const auto ra = cmd_solve(cfg);
    cfg.out_dir = b.string();
    cmd_solve(cfg);

    for (const char* f : {"config.json", "metrics.csv", "runs.jsonl", "plans.tsv", "summary.json",
                          "checkpoints/final.bin", "checkpoints/iter_0005.bin"})
        CHECK(fs::exists(a / f));
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
    CHECK(slurp(a / "plans.tsv") == slurp(b / "plans.tsv"));
    CHECK(load_config(a / "config.json").out_dir == a.string());

    const auto rows = read_csv(a / "metrics.csv");
    REQUIRE(rows.size() == static_cast<std::size_t>(ra.run.summary.iterations) + 1);
    CHECK(rows[0].size() == 18);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stoi(rows[i][0]) == static_cast<int>(i));

    const auto entries = read_plans(a / "plans.tsv");
    CHECK(entries.size() == ra.run.pool.solved_count());
    CHECK(validate_plans(entries, ra.run.pool.instances()).ok());

    auto final = Estimator::load(a / "checkpoints" / "final.bin");
    CHECK(final.digest() == ra.run.final_digest);

    cfg.domain = DomainKind::sokoban;
    cfg.levels = {(a / "missing").string()};
    CHECK_THROWS_AS(cmd_solve(cfg), ConfigError);
}

TEST_CASE("level selection") {
    RunConfig cfg;
    cfg.levels = {std::string(GVP_DATA_DIR) + "/levels"};
    cfg.first_level = 3;
    cfg.last_level = 5;
    const auto loaded = load_instances(cfg);
    REQUIRE(loaded.instances.size() == 3);
    CHECK(loaded.instances[0].id == "microban:3");
    CHECK(loaded.errors.empty());
}

TEST_CASE("grid demo on a small board") {
    const auto dir = scratch("grid");
    RunConfig cfg;
    cfg.domain = DomainKind::grid;
    cfg.backend = Backend::tabular;
    cfg.grid = GridSpec{10, 10, {0, 0}, {9, 9}};
    cfg.budget = 40;
    cfg.init_range = 10.0;
    cfg.learning_rate = 0.3;
    cfg.workers = 1;
    cfg.grid_max_iterations = 100;
    cfg.grid_followup = 3;
    cfg.out_dir = dir.string();
    const auto r = cmd_grid_demo(cfg);
    CHECK(r.init_in_range);
    CHECK(r.iteration1_connected);
    CHECK(r.first_solve > 0);
    CHECK(r.followups == 3);
    CHECK(r.iterations == r.first_solve + 3);
    CHECK(fs::exists(dir / "frames" / "values_0000.txt"));
    CHECK(fs::exists(dir / "frames" / "expanded_0001.txt"));

    std::istringstream frame(slurp(dir / "frames" / "expanded_0001.txt"));
    std::string line;
    int lines = 0;
    while (std::getline(frame, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), ' ') == 9);
    }
    CHECK(lines == 10);

    cfg.backend = Backend::net;
    CHECK_THROWS_AS(cmd_grid_demo(cfg), ConfigError);
}

TEST_CASE("quality and ablate contracts") {
    const auto dir = scratch("quality");
    auto cfg = small_puzzle_config(dir);
    const auto q = cmd_quality(cfg);
    CHECK(q.instances + q.excluded == 24);
    CHECK(q.within[0] <= q.within[1]);
    CHECK(q.within[1] <= q.within[2]);
    CHECK(q.within[2] <= q.solved);
    CHECK(q.by_k[0].within[0] == q.by_k[0].instances);
    CHECK(fs::exists(dir / "quality.csv"));
    CHECK(read_csv(dir / "oracle.csv").size() == 25);

    cfg.out_dir = scratch("ablate").string();
    const auto rows = cmd_ablate(cfg);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].p == 1.0);
    CHECK(rows[2].plan_samples == 0);
    CHECK(rows[0].gvi_samples == 0);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "ablate.csv"));
}
