#include <doctest.h>

#include <cmath>
#include <deque>
#include <random>
#include <unordered_map>

#include "gvp/grid.hpp"
#include "gvp/npuzzle.hpp"
#include "gvp/search.hpp"
#include "gvp/sokoban.hpp"

using namespace gvp;

namespace {

/// Breadth-first distance from the start to the nearest goal (test oracle).
int breadth_first_distance(const Instance& inst) {
    std::unordered_map<State, int, StateHash> dist{{inst.start, 0}};
    std::deque<State> queue{inst.start};
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        if (inst.rules->is_goal(s)) return dist[s];
        for (auto& t : inst.rules->successors(s)) {
            if (dist.emplace(t.next, dist[s] + 1).second) queue.push_back(t.next);
        }
    }
    return -1;
}

/// Arbitrary deterministic non-negative values keyed by state hash.
class HashHeuristic final : public Heuristic {
public:
    explicit HashHeuristic(double scale) : scale_(scale) {}
    void evaluate_batch(std::span<const State> states, const Instance&, std::span<double> out) const override {
        for (std::size_t i = 0; i < states.size(); ++i) {
            out[i] = scale_ * static_cast<double>(mix64(states[i].hash()) % 1000) / 1000.0;
        }
    }

private:
    double scale_;
};

void check_counters(const SearchOutcome& out) {
    REQUIRE(out.graphs.size() == 1);
    const auto& g = out.graphs[0];
    g.validate();
    const auto deg = g.out_degrees();
    std::int64_t closed_out = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.nodes()[i].status == NodeStatus::closed) closed_out += static_cast<std::int64_t>(deg[i]);
        else CHECK(deg[i] == 0);
    }
    CHECK(out.counters.generated == closed_out);
    CHECK(out.counters.unique_states == static_cast<std::int64_t>(g.size()));
}

}  // namespace

TEST_CASE("evaluate_f") {
    SearchNode n;
    n.g = 7;
    n.h = 4;
    CHECK(evaluate_f(n, 2.0) == 15.0);
    CHECK(evaluate_f(n) == 15.0);
    n.g = 0;
    n.h = 0;
    CHECK(evaluate_f(n) == 0.0);
    n.g = 3;
    n.h = 2.5;
    CHECK(evaluate_f(n, 1.0) == 5.5);
}

TEST_CASE("bfs on a goal start expands once") {
    auto goal = make_npuzzle_goal_instance(3);
    auto out = bfs_run(goal, ZeroHeuristic{}, 10);
    CHECK(out.solved);
    REQUIRE(out.plan);
    CHECK(out.plan->length() == 0);
    CHECK(out.counters.expanded == 1);
    CHECK(out.graphs[0].node(0).status == NodeStatus::goal);
}

TEST_CASE("bfs with budget 1 leaves the successors open") {
    auto inst = scramble(make_npuzzle_goal_instance(3), 12, 99);
    REQUIRE_FALSE(is_goal(inst.start, inst));
    auto out = bfs_run(inst, ZeroHeuristic{}, 1);
    CHECK_FALSE(out.solved);
    CHECK(out.counters.expanded == 1);
    CHECK(out.graphs[0].open_set().size() == successors(inst.start, inst).size());
    CHECK_THROWS_AS(bfs_run(inst, ZeroHeuristic{}, 0), Error);
}

TEST_CASE("uniform-cost bfs is optimal on 8-puzzle scrambles") {
    auto goal = make_npuzzle_goal_instance(3);
    for (int k = 0; k <= 10; ++k) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto inst = scramble(goal, k, seed * 31 + static_cast<std::uint64_t>(k));
            auto out = bfs_run(inst, ZeroHeuristic{}, 100000, 1.0);
            REQUIRE(out.solved);
            CHECK(static_cast<int>(out.plan->length()) == breadth_first_distance(inst));
            CHECK(is_valid_plan(*out.plan, inst));
            check_counters(out);
        }
    }
}

TEST_CASE("weighted bfs with an admissible heuristic stays within weight x optimal") {
    auto goal = make_npuzzle_goal_instance(3);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        auto inst = scramble(goal, 1 + static_cast<int>(rng() % 40), rng());
        auto out = bfs_run(inst, ManhattanHeuristic{}, 100000, 2.0);
        REQUIRE(out.solved);
        CHECK(static_cast<int>(out.plan->length()) <= 2 * breadth_first_distance(inst));
        CHECK(is_valid_plan(*out.plan, inst));
    }
}

TEST_CASE("bfs graphs are well formed under arbitrary heuristics") {
    std::mt19937_64 rng(7);
    auto goal = make_npuzzle_goal_instance(3);
    auto grid = make_grid_instance(GridSpec{12, 9, {0, 0}, {11, 8}});
    auto level = parse_xsb("########\n#@ $  .#\n#  $ . #\n#   ## #\n########");
    for (int trial = 0; trial < 60; ++trial) {
        const Instance* base = trial % 3 == 0 ? &goal : (trial % 3 == 1 ? &grid : &level);
        Instance inst = base->domain() == DomainKind::sokoban ? *base : scramble(*base, 30, rng());
        HashHeuristic h(static_cast<double>(rng() % 20));
        const int budget = 1 + static_cast<int>(rng() % 300);
        const double weight = (rng() % 2) ? 2.0 : 0.5;
        auto out = bfs_run(inst, h, budget, weight);
        check_counters(out);
        CHECK(out.counters.expanded <= budget);
        // A reopened parent may leave its children with a stale (larger) g.
        const auto& g = out.graphs[0];
        for (std::size_t i = 0; i < g.size(); ++i) {
            int chain = 0;
            for (NodeId cur = static_cast<NodeId>(i); g.node(cur).parent != kNoNode; cur = g.node(cur).parent) ++chain;
            CHECK(chain <= g.nodes()[i].g);
        }
        if (out.solved) CHECK(is_valid_plan(*out.plan, inst));
    }
}

TEST_CASE("ucb selection") {
    MctsNode node;
    node.moves.resize(1);
    node.visits = {1};
    node.reward_sum = {0.5};
    CHECK(ucb_score(0.5, 1, 1) == doctest::Approx(0.5));
    CHECK(ucb_select(node) == 0);

    node.moves.resize(2);
    node.visits = {3, 0};
    node.reward_sum = {3.0, 0.0};
    CHECK(ucb_select(node) == 1);

    CHECK(ucb_score(0.0, 2.0, std::exp(2.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::isinf(ucb_score(1.0, 0.0, 5.0)));

    node.visits = {0, 0};
    CHECK(ucb_select(node) == 0);
    node.try_order = {1, 0};
    CHECK(ucb_select(node) == 1);
    MctsNode empty;
    CHECK_THROWS_AS(ucb_select(empty), Error);
}

TEST_CASE("leaf reward") {
    CHECK(leaf_reward(1.0) == 0.0);
    CHECK(leaf_reward(std::exp(1.0)) == doctest::Approx(-1.0));
    CHECK(leaf_reward(0.0) == doctest::Approx(6.907755278982137));
    CHECK(leaf_reward(-5.0) == leaf_reward(0.0));
}

TEST_CASE("mcts") {
    auto goal = make_npuzzle_goal_instance(3);
    SUBCASE("goal start") {
        auto out = mcts_run(goal, ZeroHeuristic{}, 100, 10);
        CHECK(out.solved);
        CHECK(out.plan->length() == 0);
        CHECK(out.counters.expanded == 1);
        CHECK(out.counters.unique_states == 1);
    }
    SUBCASE("solves easy scrambles and is deterministic") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto inst = scramble(goal, 8, seed);
            auto a = mcts_run(inst, ManhattanHeuristic{}, 100, 200, 17);
            auto b = mcts_run(inst, ManhattanHeuristic{}, 100, 200, 17);
            REQUIRE(a.solved);
            CHECK(is_valid_plan(*a.plan, inst));
            CHECK(a.plan->actions == b.plan->actions);
            CHECK(a.counters.expanded == b.counters.expanded);
            CHECK(a.counters.unique_states == b.counters.unique_states);
            CHECK(a.counters.expanded > a.counters.unique_states);
            check_counters(a);
        }
    }
    SUBCASE("dead end fails") {
        auto stuck = parse_xsb("#####\n#@ .#\n##$##\n #.# \n #$# \n ### ");
        auto out = mcts_run(stuck, ZeroHeuristic{}, 10, 50);
        CHECK_FALSE(out.solved);
        check_counters(out);
    }
    SUBCASE("graph well formed on sokoban") {
        auto level = parse_xsb("########\n#@ $  .#\n#  $ . #\n#   ## #\n########");
        auto out = mcts_run(level, HashHeuristic(5.0), 20, 30, 3, true);
        check_counters(out);
        CHECK(out.counters.expanded >= out.counters.unique_states);
    }
}

TEST_CASE("restart loop") {
    auto goal = make_npuzzle_goal_instance(3);
    auto inst = scramble(goal, 25, 5);
    SearchConfig cfg;
    cfg.budget = 5;
    cfg.runs = 1;
    auto single = bfs_run(inst, ManhattanHeuristic{}, 5);
    auto looped = restart_loop(inst, ManhattanHeuristic{}, cfg);
    CHECK(looped.solved == single.solved);
    CHECK(looped.counters.expanded == single.counters.expanded);
    CHECK(looped.graphs.size() == 1);

    cfg.runs = 4;
    auto failed = restart_loop(inst, ManhattanHeuristic{}, cfg);
    CHECK_FALSE(failed.solved);
    CHECK(failed.graphs.size() == 4);

    cfg.budget = 100000;
    auto solved = restart_loop(inst, ManhattanHeuristic{}, cfg);
    CHECK(solved.solved);
    CHECK(solved.graphs.size() == 1);

    cfg.engine = Engine::mcts;
    cfg.runs = 2;
    cfg.sims_per_move = 50;
    cfg.move_cap = 3;
    auto m = restart_loop(scramble(goal, 20, 9), ManhattanHeuristic{}, cfg);
    if (!m.solved) CHECK(m.graphs.size() == 2);
}

TEST_CASE("remove_cycles keeps plans valid") {
    auto goal = make_npuzzle_goal_instance(3);
    auto inst = scramble(goal, 1, 4);
    auto moves = successors(inst.start, inst);
    Plan loop{inst.id, {}};
    // go somewhere and come back, then finish
    const auto& out = moves[0];
    loop.actions.push_back(out.action);
    for (const auto& t : successors(out.next, inst))
        if (t.next == inst.start) loop.actions.push_back(t.action);
    for (const auto& t : moves)
        if (is_goal(t.next, inst)) loop.actions.push_back(t.action);
    REQUIRE(is_valid_plan(loop, inst));
    auto shorter = remove_cycles(loop, inst);
    CHECK(shorter.length() == 1);
    CHECK(is_valid_plan(shorter, inst));
}
