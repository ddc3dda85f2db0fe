#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "gvp/curriculum.hpp"
#include "gvp/grid.hpp"
#include "gvp/npuzzle.hpp"

using namespace gvp;

namespace {

std::vector<Instance> puzzle_pool(int count, int k, std::uint64_t seed) {
    auto goal = make_npuzzle_goal_instance(3);
    std::vector<Instance> out;
    for (int i = 0; i < count; ++i) {
        auto inst = scramble(goal, k, seed + static_cast<std::uint64_t>(i));
        inst.id = "p" + std::to_string(i);
        out.push_back(inst);
    }
    return out;
}

Estimator small_net(const std::vector<Instance>& pool, std::uint64_t seed = 1) {
    auto cfg = Estimator::net_config_for(pool);
    cfg.hidden = 32;
    cfg.seed = seed;
    return Estimator(cfg);
}

CurriculumConfig quick_config() {
    CurriculumConfig cfg;
    cfg.batch_instances = 4;
    cfg.train_steps = 4;
    cfg.train_batch = 32;
    cfg.search.budget = 50;
    return cfg;
}

}  // namespace

TEST_CASE("uniform weights sample uniformly") {
    TaskPool pool(puzzle_pool(5, 3, 1));
    std::mt19937_64 rng(3);
    std::vector<int> counts(5, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_instances(pool, 1, rng)[0]];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
    CHECK(chi2 < 18.467);  // chi-square, 4 degrees of freedom, p = 0.001
}

TEST_CASE("weighted sampling without replacement") {
    TaskPool pool(puzzle_pool(2, 3, 1));
    pool.records()[0].weight = 0.05;
    std::mt19937_64 rng(4);
    int low_first = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        auto pick = sample_instances(pool, 2, rng);
        REQUIRE(pick.size() == 2);
        CHECK(pick[0] != pick[1]);
        low_first += pick[0] == 0;
    }
    CHECK(static_cast<double>(low_first) / draws == doctest::Approx(0.05 / 1.05).epsilon(0.07));

    TaskPool five(puzzle_pool(5, 3, 1));
    auto all = sample_instances(five, 5, rng);
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(sample_instances(five, 50, rng).size() == 5);
    CHECK_THROWS_AS(sample_instances(TaskPool{}, 1, rng), Error);
}

TEST_CASE("update_pool") {
    auto insts = puzzle_pool(1, 6, 2);
    TaskPool pool(insts);
    auto shortest = bfs_run(insts[0], ManhattanHeuristic{}, 10000, 1.0);
    REQUIRE(shortest.solved);
    SearchOutcome longer = shortest;
    auto path = longer.plan->actions;
    // go back and forth once more at the start
    auto first = successors(insts[0].start, insts[0]).front();
    for (const auto& t : successors(first.next, insts[0]))
        if (t.next == insts[0].start) {
            longer.plan->actions.insert(longer.plan->actions.begin(), {first.action, t.action});
            break;
        }
    REQUIRE(is_valid_plan(*longer.plan, insts[0]));

    std::vector<std::size_t> idx{0};
    auto fresh = update_pool(pool, idx, std::span(&shortest, 1));
    CHECK(fresh == std::vector<std::size_t>{0});
    CHECK(pool.records()[0].weight == 0.5);
    CHECK(update_pool(pool, idx, std::span(&longer, 1)).empty());
    CHECK(pool.records()[0].best_plan->length() == shortest.plan->length());
    CHECK(pool.records()[0].weight == 0.25);

    for (int i = 0; i < 10; ++i) update_pool(pool, idx, std::span(&shortest, 1));
    CHECK(pool.records()[0].weight == 0.05);

    SearchOutcome failed;
    update_pool(pool, idx, std::span(&failed, 1));
    CHECK(pool.records()[0].weight == 1.0);
    CHECK(pool.records()[0].solved);

    SearchOutcome bogus = shortest;
    bogus.plan->actions.pop_back();
    CHECK_THROWS_AS(update_pool(pool, idx, std::span(&bogus, 1)), PlanError);
}

TEST_CASE("iteration on a trivially solvable pool") {
    std::vector<Instance> insts{make_npuzzle_goal_instance(3)};
    TaskPool pool(insts);
    auto est = small_net(insts);
    ReplayBuffer buffers;
    CurriculumRng rng(1);
    auto report = run_iteration(pool, est, buffers, quick_config(), rng, 1);
    CHECK(report.newly_solved == std::vector<std::string>{"goal"});
    CHECK(report.solved_total == 1);
    CHECK_FALSE(buffers.plan().empty());
}

TEST_CASE("failed attempts still train with p = 1") {
    auto insts = puzzle_pool(4, 30, 7);
    TaskPool pool(insts);
    auto est = small_net(insts);
    ReplayBuffer buffers;
    auto cfg = quick_config();
    cfg.p = 1.0;
    cfg.search.budget = 5;
    CurriculumRng rng(2);
    std::uint64_t digest = est.digest();
    for (int it = 1; it <= 3; ++it) {
        const auto gvi_before = buffers.gvi_inserted();
        auto report = run_iteration(pool, est, buffers, cfg, rng, it);
        CHECK(report.newly_solved.empty());
        CHECK(buffers.plan().empty());
        CHECK(buffers.gvi_inserted() > gvi_before);
        CHECK(report.train_steps == cfg.train_steps);
        CHECK(report.train.plan_samples == 0);
        CHECK(report.estimator_digest != digest);
        digest = report.estimator_digest;
    }
}

TEST_CASE("p = 0 records no gvi samples") {
    auto insts = puzzle_pool(4, 30, 7);
    TaskPool pool(insts);
    auto est = small_net(insts);
    ReplayBuffer buffers;
    auto cfg = quick_config();
    cfg.p = 0.0;
    cfg.search.budget = 5;
    CurriculumRng rng(2);
    auto report = run_iteration(pool, est, buffers, cfg, rng, 1);
    CHECK(buffers.gvi_inserted() == 0);
    CHECK(report.train_steps == 0);
}

TEST_CASE("iterations are deterministic across worker counts") {
    auto insts = puzzle_pool(12, 12, 3);
    auto run = [&](int workers) {
        TaskPool pool(insts);
        auto est = small_net(insts, 5);
        ReplayBuffer buffers;
        auto cfg = quick_config();
        cfg.workers = workers;
        cfg.search.budget = 100;
        CurriculumRng rng(9);
        std::vector<std::tuple<std::vector<std::string>, std::vector<std::string>, std::int64_t, std::uint64_t>> out;
        for (int it = 1; it <= 5; ++it) {
            auto r = run_iteration(pool, est, buffers, cfg, rng, it);
            out.emplace_back(r.attempted, r.newly_solved, r.counters.expanded, r.estimator_digest);
        }
        return out;
    };
    const auto a = run(1);
    CHECK(a == run(1));
    CHECK(a == run(3));
}

TEST_CASE("run_until_stall") {
    SUBCASE("everything solved at once") {
        auto goal = make_npuzzle_goal_instance(3);
        std::vector<Instance> insts;
        for (int k = 0; k < 3; ++k) {
            auto inst = scramble(goal, 1, static_cast<std::uint64_t>(k));
            inst.id = "i" + std::to_string(k);
            insts.push_back(inst);
        }
        TaskPool pool(insts);
        auto est = small_net(insts);
        ReplayBuffer buffers;
        CurriculumRng rng(1);
        auto summary = run_until_stall(pool, est, buffers, quick_config(), rng);
        CHECK(summary.reports.front().newly_solved.size() == 3);
        CHECK(summary.iterations == 11);
        CHECK(summary.stalled);
    }
    SUBCASE("nothing solvable") {
        auto insts = puzzle_pool(3, 40, 11);
        TaskPool pool(insts);
        auto est = small_net(insts);
        ReplayBuffer buffers;
        auto cfg = quick_config();
        cfg.search.budget = 2;
        CurriculumRng rng(1);
        auto summary = run_until_stall(pool, est, buffers, cfg, rng);
        CHECK(summary.iterations == 10);
        CHECK(pool.solved_count() == 0);
    }
    SUBCASE("solved set and plans only improve") {
        auto goal = make_npuzzle_goal_instance(3);
        std::vector<Instance> insts;
        for (int i = 0; i < 16; ++i) {
            auto inst = scramble(goal, 4 + 2 * i, static_cast<std::uint64_t>(i) + 50);
            inst.id = "m" + std::to_string(i);
            insts.push_back(inst);
        }
        TaskPool pool(insts);
        auto est = small_net(insts);
        ReplayBuffer buffers;
        auto cfg = quick_config();
        cfg.search.budget = 200;
        cfg.max_iterations = 30;
        CurriculumRng rng(4);
        std::set<std::string> solved;
        std::map<std::string, std::size_t> lengths;
        run_until_stall(pool, est, buffers, cfg, rng, [&](const IterationReport&, const TaskPool& p, const Estimator&) {
            for (const auto& rec : p.records()) {
                if (solved.count(rec.instance.id)) CHECK(rec.solved);
                if (!rec.solved) continue;
                solved.insert(rec.instance.id);
                const auto len = rec.best_plan->length();
                if (lengths.count(rec.instance.id)) CHECK(len <= lengths[rec.instance.id]);
                lengths[rec.instance.id] = len;
            }
        });
        CHECK_FALSE(solved.empty());
        for (const auto& rec : pool.records())
            if (rec.solved) CHECK(is_valid_plan(*rec.best_plan, rec.instance));
    }
    SUBCASE("grid with a tabular estimator") {
        TaskPool pool({make_grid_instance(GridSpec{})});
        EstimatorConfig ecfg;
        ecfg.backend = Backend::tabular;
        ecfg.learning_rate = 0.3;
        ecfg.seed = 3;
        Estimator est(ecfg);
        ReplayBuffer buffers(200000, 300);
        CurriculumConfig cfg;
        cfg.batch_instances = 1;
        cfg.search.budget = 300;
        cfg.stall_window = 200;  // the first solve needs tens of iterations
        cfg.max_iterations = 1000;
        CurriculumRng rng(3);
        auto summary = run_until_stall(pool, est, buffers, cfg, rng);
        CHECK(summary.stalled);
        CHECK(pool.records()[0].solved);
        CHECK(is_valid_plan(*pool.records()[0].best_plan, pool.records()[0].instance));
    }
}
