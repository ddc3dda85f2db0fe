#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gvp/heuristic.hpp"
#include "gvp/search_graph.hpp"

namespace gvp {

enum class Engine : std::uint8_t { bfs, mcts };

std::string_view to_string(Engine engine);
Engine parse_engine(std::string_view name);

struct SearchCounters {
    std::int64_t expanded = 0;
    std::int64_t generated = 0;
    std::int64_t unique_states = 0;
    std::int64_t duplicate_hits = 0;
    double wall_time_ms = 0.0;

    SearchCounters& operator+=(const SearchCounters& other);
};

struct SearchOutcome {
    bool solved = false;
    std::optional<Plan> plan;
    /// One graph per run; a restart loop returns the graphs of every run it made.
    std::vector<SearchGraph> graphs;
    SearchCounters counters;
};

/// Open-list order among equal (f, h): insertion order, or a random key for
/// restarted runs.
enum class TieBreak : std::uint8_t { fifo, random };

struct SearchConfig {
    Engine engine = Engine::bfs;
    int budget = 500;  // expansions per best-first run
    double weight = 2.0;
    int sims_per_move = 100;
    int move_cap = 0;  // 0: max(500, 2 × best known plan length or h(start))
    int runs = 1;
    std::uint64_t seed = 0;
    int best_known_length = -1;
};

inline double evaluate_f(const SearchNode& node, double weight = 2.0) {
    return static_cast<double>(node.g) + weight * node.h;
}

/// Best-first search with f = g + weight·h and node reopening. Expands at
/// most `budget` nodes; the goal test happens at expansion.
SearchOutcome bfs_run(const Instance& inst, const Heuristic& h, int budget, double weight = 2.0,
                      TieBreak tie_break = TieBreak::fifo, std::uint64_t seed = 0);

/// Node of the MCTS tree. Statistics are per action, parallel to `moves`.
struct MctsNode {
    State state;
    double h = 0.0;
    bool goal = false;
    bool expanded = false;
    int depth = 0;
    std::vector<Transition> moves;
    std::vector<std::int32_t> children;
    std::vector<std::int64_t> visits;
    std::vector<double> reward_sum;
    /// Order in which unvisited actions are tried; empty means enumeration order.
    std::vector<std::uint32_t> try_order;

    double q(std::size_t a) const {
        return visits[a] ? reward_sum[a] / static_cast<double>(visits[a]) : 0.0;
    }
    std::int64_t total_visits() const;
};

inline constexpr double kRewardFloor = 1e-3;

/// U(s, a) = Q(s, a) + sqrt(2 ln ΣN / N(s, a)); +inf when N(s, a) == 0.
double ucb_score(double q, double visits, double total_visits);
/// Index of the action maximizing ucb_score; ties go to the earlier action.
std::size_t ucb_select(const MctsNode& node);
/// -log(max(h, 1e-3)).
double leaf_reward(double h);

SearchOutcome mcts_run(const Instance& inst, const Heuristic& h, int sims_per_move, int move_cap,
                       std::uint64_t seed = 0, bool shuffle_untried = false);

/// Up to `cfg.runs` independent runs with fresh graphs; stops at the first
/// solve. Runs after the first draw their tie-breaking from per-run seeds.
SearchOutcome restart_loop(const Instance& inst, const Heuristic& h, const SearchConfig& cfg);

/// Removes state cycles from a plan; the result replays to the same goal.
Plan remove_cycles(const Plan& plan, const Instance& inst);

}  // namespace gvp
