#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "gvp/search.hpp"

namespace gvp {
namespace {

/// One MCTS episode: a tree of per-path nodes over a transposition table of
/// estimator outputs, mirrored into a SearchGraph keyed by state.
class MctsEpisode {
public:
    MctsEpisode(const Instance& inst, const Heuristic& heuristic, std::uint64_t seed, bool shuffle_untried,
                SearchOutcome& out)
        : inst_(inst),
          rules_(*inst.rules),
          heuristic_(heuristic),
          rng_(seed),
          shuffle_(shuffle_untried),
          graph_(out.graphs.emplace_back()),
          counters_(out.counters) {}

    std::int32_t make_node(const State& s, int depth, std::int32_t parent, const Action& via) {
        MctsNode node;
        node.state = s;
        node.depth = depth;
        auto cached = h_cache_.find(s);
        if (cached == h_cache_.end()) {
            const double h = std::max(0.0, heuristic_.evaluate(s, inst_));
            cached = h_cache_.emplace(s, h).first;
        }
        node.h = cached->second;
        node.goal = rules_.is_goal(s);

        NodeId gid = graph_.find(s);
        if (gid == kNoNode) {
            SearchNode g;
            g.state = s;
            g.g = depth;
            g.h = node.h;
            g.parent = parent >= 0 ? graph_ids_[static_cast<std::size_t>(parent)] : kNoNode;
            g.via = via;
            g.is_goal = node.goal;
            g.status = node.goal ? NodeStatus::goal : NodeStatus::open;
            gid = graph_.add_node(std::move(g));
        } else if (depth < graph_.node(gid).g) {
            auto& g = graph_.node(gid);
            g.g = depth;
            g.parent = graph_ids_[static_cast<std::size_t>(parent)];
            g.via = via;
        }
        if (parent >= 0) {
            const auto from = graph_ids_[static_cast<std::size_t>(parent)];
            const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
                             static_cast<std::uint32_t>(gid);
            if (edges_.insert(key).second) graph_.add_edge(from, gid);
        }
        tree_.push_back(std::move(node));
        graph_ids_.push_back(gid);
        return static_cast<std::int32_t>(tree_.size() - 1);
    }

    void expand(std::int32_t idx) {
        MctsNode& node = tree_[static_cast<std::size_t>(idx)];
        node.moves = rules_.successors(node.state);
        node.children.assign(node.moves.size(), -1);
        node.visits.assign(node.moves.size(), 0);
        node.reward_sum.assign(node.moves.size(), 0.0);
        if (shuffle_) {
            node.try_order.resize(node.moves.size());
            std::iota(node.try_order.begin(), node.try_order.end(), 0u);
            std::shuffle(node.try_order.begin(), node.try_order.end(), rng_);
        }
        node.expanded = true;
        graph_.node(graph_ids_[static_cast<std::size_t>(idx)]).status = NodeStatus::closed;
    }

    void simulate(std::int32_t root) {
        path_.clear();
        std::int32_t cur = root;
        ++counters_.expanded;
        double reward = 0.0;
        for (;;) {
            if (tree_[static_cast<std::size_t>(cur)].goal) {
                reward = leaf_reward(0.0);
                break;
            }
            if (!tree_[static_cast<std::size_t>(cur)].expanded) expand(cur);
            const MctsNode& node = tree_[static_cast<std::size_t>(cur)];
            if (node.moves.empty()) {
                reward = leaf_reward(node.h);
                break;
            }
            const std::size_t a = ucb_select(node);
            path_.emplace_back(cur, a);
            ++counters_.expanded;
            std::int32_t child = node.children[a];
            if (child < 0) {
                const State next = node.moves[a].next;
                const Action via = node.moves[a].action;
                const int depth = node.depth + 1;
                child = make_node(next, depth, cur, via);
                tree_[static_cast<std::size_t>(cur)].children[a] = child;
                const MctsNode& leaf = tree_[static_cast<std::size_t>(child)];
                reward = leaf.goal ? leaf_reward(0.0) : leaf_reward(leaf.h);
                break;
            }
            cur = child;
        }
        for (const auto& [idx, a] : path_) {
            MctsNode& node = tree_[static_cast<std::size_t>(idx)];
            ++node.visits[a];
            node.reward_sum[a] += reward;
        }
    }

    MctsNode& node(std::int32_t idx) { return tree_[static_cast<std::size_t>(idx)]; }

    void finish() {
        counters_.unique_states = static_cast<std::int64_t>(graph_.size());
        counters_.generated = static_cast<std::int64_t>(graph_.edges().size());
        counters_.duplicate_hits = counters_.expanded - counters_.unique_states;
    }

private:
    const Instance& inst_;
    const Rules& rules_;
    const Heuristic& heuristic_;
    std::mt19937_64 rng_;
    bool shuffle_;
    SearchGraph& graph_;
    SearchCounters& counters_;
    std::vector<MctsNode> tree_;
    std::vector<NodeId> graph_ids_;
    std::unordered_map<State, double, StateHash> h_cache_;
    std::unordered_set<std::uint64_t> edges_;
    std::vector<std::pair<std::int32_t, std::size_t>> path_;
};

std::size_t commit_action(const MctsNode& node) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < node.moves.size(); ++a) {
        if (node.visits[a] > node.visits[best] ||
            (node.visits[a] == node.visits[best] && node.q(a) > node.q(best))) {
            best = a;
        }
    }
    return best;
}

}  // namespace

SearchOutcome mcts_run(const Instance& inst, const Heuristic& heuristic, int sims_per_move, int move_cap,
                       std::uint64_t seed, bool shuffle_untried) {
    if (sims_per_move < 1) throw Error("mcts: sims_per_move must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();
    inst.rules->check(inst.start);

    SearchOutcome out;
    MctsEpisode episode(inst, heuristic, seed, shuffle_untried, out);
    std::int32_t root = episode.make_node(inst.start, 0, -1, Action{});
    Plan plan{inst.id, {}};

    if (episode.node(root).goal) {
        out.counters.expanded = 1;
        out.solved = true;
    } else {
        for (int move = 0; move < move_cap; ++move) {
            if (!episode.node(root).expanded) episode.expand(root);
            if (episode.node(root).moves.empty()) break;  // dead end
            for (int sim = 0; sim < sims_per_move; ++sim) episode.simulate(root);
            const MctsNode& node = episode.node(root);
            const std::size_t a = commit_action(node);
            plan.actions.push_back(node.moves[a].action);
            root = node.children[a];
            if (episode.node(root).goal) {
                out.solved = true;
                break;
            }
        }
    }
    episode.finish();
    if (out.solved) out.plan = remove_cycles(plan, inst);
    out.counters.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace gvp
