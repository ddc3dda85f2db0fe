#include <algorithm>
#include <chrono>
#include <queue>
#include <random>

#include "gvp/search.hpp"

namespace gvp {
namespace {

struct OpenEntry {
    double f;
    double h;
    std::uint64_t tie;
    NodeId id;
    int g;
};

struct WorseEntry {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        if (a.h != b.h) return a.h > b.h;
        return a.tie > b.tie;
    }
};

double clamp_h(double h) { return h > 0.0 ? h : 0.0; }

Plan extract_plan(const SearchGraph& graph, NodeId goal, const std::string& id) {
    Plan plan{id, {}};
    for (NodeId cur = goal; graph.node(cur).parent != kNoNode; cur = graph.node(cur).parent) {
        plan.actions.push_back(graph.node(cur).via);
    }
    std::reverse(plan.actions.begin(), plan.actions.end());
    return plan;
}

}  // namespace

SearchOutcome bfs_run(const Instance& inst, const Heuristic& heuristic, int budget, double weight,
                      TieBreak tie_break, std::uint64_t seed) {
    if (budget < 1) throw Error("bfs: budget must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();
    const Rules& rules = *inst.rules;
    rules.check(inst.start);

    SearchOutcome out;
    SearchGraph& graph = out.graphs.emplace_back();
    SearchCounters& counters = out.counters;

    std::mt19937_64 rng(seed);
    std::uint64_t sequence = 0;
    auto next_tie = [&] { return tie_break == TieBreak::fifo ? sequence++ : rng(); };

    std::priority_queue<OpenEntry, std::vector<OpenEntry>, WorseEntry> open;
    {
        SearchNode root;
        root.state = inst.start;
        root.h = clamp_h(heuristic.evaluate(inst.start, inst));
        root.is_goal = rules.is_goal(inst.start);
        const NodeId id = graph.add_node(std::move(root));
        open.push({evaluate_f(graph.node(id), weight), graph.node(id).h, next_tie(), id, 0});
    }

    std::vector<State> fresh;
    std::vector<double> fresh_h;
    std::vector<NodeId> targets;

    while (!open.empty() && counters.expanded < budget) {
        const OpenEntry top = open.top();
        open.pop();
        if (top.g != graph.node(top.id).g) continue;  // superseded by a cheaper path

        ++counters.expanded;
        if (graph.node(top.id).is_goal) {
            graph.node(top.id).status = NodeStatus::goal;
            out.solved = true;
            out.plan = extract_plan(graph, top.id, inst.id);
            break;
        }

        const bool first_expansion = graph.node(top.id).status == NodeStatus::open;
        graph.node(top.id).status = NodeStatus::closed;
        const int child_g = graph.node(top.id).g + 1;
        auto moves = rules.successors(graph.node(top.id).state);

        fresh.clear();
        for (const auto& t : moves) {
            if (graph.find(t.next) == kNoNode &&
                std::find(fresh.begin(), fresh.end(), t.next) == fresh.end()) {
                fresh.push_back(t.next);
            }
        }
        fresh_h.assign(fresh.size(), 0.0);
        if (!fresh.empty()) heuristic.evaluate_batch(fresh, inst, fresh_h);

        targets.clear();
        for (const auto& t : moves) {
            NodeId child = graph.find(t.next);
            if (child == kNoNode) {
                const auto k = static_cast<std::size_t>(std::find(fresh.begin(), fresh.end(), t.next) - fresh.begin());
                SearchNode node;
                node.state = t.next;
                node.g = child_g;
                node.h = clamp_h(fresh_h[k]);
                node.parent = top.id;
                node.via = t.action;
                node.is_goal = rules.is_goal(t.next);
                child = graph.add_node(std::move(node));
                const auto& c = graph.node(child);
                open.push({evaluate_f(c, weight), c.h, next_tie(), child, c.g});
            } else {
                ++counters.duplicate_hits;
                auto& c = graph.node(child);
                if (child_g < c.g) {
                    c.g = child_g;
                    c.parent = top.id;
                    c.via = t.action;
                    open.push({evaluate_f(c, weight), c.h, next_tie(), child, c.g});
                }
            }
            targets.push_back(child);
        }
        if (first_expansion) {
            for (NodeId child : targets) graph.add_edge(top.id, child);
            counters.generated += static_cast<std::int64_t>(targets.size());
        }
    }

    counters.unique_states = static_cast<std::int64_t>(graph.size());
    counters.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace gvp
