#include "gvp/search.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace gvp {

std::string_view to_string(Engine engine) { return engine == Engine::bfs ? "bfs" : "mcts"; }

Engine parse_engine(std::string_view name) {
    if (name == "bfs") return Engine::bfs;
    if (name == "mcts") return Engine::mcts;
    throw Error("unknown engine '" + std::string(name) + "'");
}

SearchCounters& SearchCounters::operator+=(const SearchCounters& other) {
    expanded += other.expanded;
    generated += other.generated;
    unique_states += other.unique_states;
    duplicate_hits += other.duplicate_hits;
    wall_time_ms += other.wall_time_ms;
    return *this;
}

std::int64_t MctsNode::total_visits() const {
    std::int64_t total = 0;
    for (auto v : visits) total += v;
    return total;
}

double ucb_score(double q, double visits, double total_visits) {
    if (visits <= 0.0) return std::numeric_limits<double>::infinity();
    return q + std::sqrt(2.0 * std::log(total_visits) / visits);
}

std::size_t ucb_select(const MctsNode& node) {
    if (node.moves.empty()) throw Error("ucb_select: node has no actions");
    const auto total = static_cast<double>(node.total_visits());
    const std::size_t n = node.moves.size();
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = node.try_order.empty() ? k : node.try_order[k];
        const double score = ucb_score(node.q(a), static_cast<double>(node.visits[a]), total);
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

double leaf_reward(double h) { return -std::log(std::max(h, kRewardFloor)); }

SearchOutcome restart_loop(const Instance& inst, const Heuristic& h, const SearchConfig& cfg) {
    if (cfg.runs < 1) throw Error("restart_loop: runs must be at least 1");
    SearchOutcome out;
    for (int r = 0; r < cfg.runs; ++r) {
        const std::uint64_t run_seed = mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(r)));
        SearchOutcome run;
        if (cfg.engine == Engine::bfs) {
            run = bfs_run(inst, h, cfg.budget, cfg.weight, r == 0 ? TieBreak::fifo : TieBreak::random, run_seed);
        } else {
            int cap = cfg.move_cap;
            if (cap <= 0) {
                const double scale = cfg.best_known_length >= 0 ? cfg.best_known_length : h.evaluate(inst.start, inst);
                cap = std::max(500, static_cast<int>(std::ceil(2.0 * scale)));
            }
            run = mcts_run(inst, h, cfg.sims_per_move, cap, run_seed, r > 0);
        }
        out.counters += run.counters;
        for (auto& g : run.graphs) out.graphs.push_back(std::move(g));
        if (run.solved) {
            out.solved = true;
            out.plan = std::move(run.plan);
            break;
        }
    }
    return out;
}

Plan remove_cycles(const Plan& plan, const Instance& inst) {
    std::vector<State> states{inst.start};
    std::vector<Action> actions;
    std::unordered_map<State, std::size_t, StateHash> position{{inst.start, 0}};
    for (const auto& a : plan.actions) {
        auto next = inst.rules->apply(states.back(), a);
        if (!next) throw PlanError(inst.id + ": cannot shorten an invalid plan");
        auto it = position.find(*next);
        if (it != position.end()) {
            for (std::size_t i = it->second + 1; i < states.size(); ++i) position.erase(states[i]);
            states.resize(it->second + 1);
            actions.resize(it->second);
        } else {
            position.emplace(*next, states.size());
            states.push_back(std::move(*next));
            actions.push_back(a);
        }
    }
    return Plan{plan.instance_id, std::move(actions)};
}

}  // namespace gvp
