#include "gvp/gvi.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

namespace gvp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct QueueEntry {
    double d;
    NodeId id;

    bool operator>(const QueueEntry& o) const { return d != o.d ? d > o.d : id > o.id; }
};

std::string_view status_name(NodeStatus s) {
    switch (s) {
        case NodeStatus::open: return "open";
        case NodeStatus::closed: return "closed";
        case NodeStatus::goal: return "goal";
    }
    return "?";
}

}  // namespace

std::vector<GviLabel> gvi_labels(const SearchGraph& graph, GviOptions options) {
    graph.validate();
    const std::size_t n = graph.size();
    const auto nodes = graph.nodes();

    // Incoming adjacency in CSR form.
    std::vector<std::size_t> start(n + 1, 0);
    for (const auto& e : graph.edges()) ++start[static_cast<std::size_t>(e.to) + 1];
    for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];
    std::vector<NodeId> incoming(graph.edges().size());
    {
        auto fill = start;
        for (const auto& e : graph.edges()) incoming[fill[static_cast<std::size_t>(e.to)]++] = e.from;
    }

    std::vector<double> d(n, kInf);
    std::vector<char> in_open(n, 0), done(n, 0);
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = nodes[i];
        if (node.is_goal) {
            d[i] = 0.0;
        } else if (node.status == NodeStatus::open) {
            d[i] = node.h;
            in_open[i] = 1;
        }
        if (d[i] < kInf) queue.push({d[i], static_cast<NodeId>(i)});
    }

    while (!queue.empty()) {
        const auto [dv, v] = queue.top();
        queue.pop();
        const auto vi = static_cast<std::size_t>(v);
        if (done[vi] || dv != d[vi]) continue;
        done[vi] = 1;
        const double relaxed = dv + 1.0;
        for (std::size_t k = start[vi]; k < start[vi + 1]; ++k) {
            const auto w = static_cast<std::size_t>(incoming[k]);
            if (done[w] || (options.freeze_open_labels && in_open[w])) continue;
            if (relaxed < d[w]) {
                d[w] = relaxed;
                queue.push({relaxed, incoming[k]});
            }
        }
    }

    std::vector<GviLabel> labels;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_open[i]) continue;
        GviLabel label;
        label.node = static_cast<NodeId>(i);
        label.state = nodes[i].state;
        label.dead_end = !(d[i] < kInf);
        label.d = label.dead_end ? 0.0 : d[i];
        labels.push_back(std::move(label));
    }
    return labels;
}

double dead_end_cap(std::span<const GviLabel> labels, const CapPolicy& policy) {
    double max_finite = -1.0;
    for (const auto& l : labels) {
        if (!l.dead_end) max_finite = std::max(max_finite, l.d);
    }
    if (max_finite < 0.0) return policy.floor;
    return std::max(policy.multiplier * max_finite, policy.floor);
}

std::vector<TrainingSample> to_training_samples(std::span<const GviLabel> labels, const CapPolicy& policy,
                                                std::shared_ptr<const Rules> rules) {
    std::vector<TrainingSample> out;
    if (labels.empty()) return out;
    const double cap = dead_end_cap(labels, policy);
    out.reserve(labels.size());
    for (const auto& l : labels) {
        if (l.dead_end && !(cap > 0.0)) continue;
        out.push_back({l.state, l.dead_end ? cap : l.d, SampleSource::gvi, rules});
    }
    return out;
}

std::vector<TrainingSample> plan_to_samples(const Plan& plan, std::span<const State> states,
                                            std::shared_ptr<const Rules> rules) {
    if (states.size() != plan.length() + 1) {
        throw Error("plan_to_samples: " + std::to_string(states.size()) + " states for a plan of length " +
                    std::to_string(plan.length()));
    }
    std::vector<TrainingSample> out;
    out.reserve(states.size());
    const auto n = plan.length();
    for (std::size_t i = 0; i < states.size(); ++i) {
        out.push_back({states[i], static_cast<double>(n - i), SampleSource::plan, rules});
    }
    return out;
}

void write_gvi_dump(std::ostream& os, const SearchGraph& graph, std::span<const GviLabel> labels) {
    std::vector<const GviLabel*> by_node(graph.size(), nullptr);
    for (const auto& l : labels) by_node.at(static_cast<std::size_t>(l.node)) = &l;
    char hash[17];
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto& node = graph.nodes()[i];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(node.state.hash()));
        os << "node " << i << ' ' << hash << ' ' << status_name(node.status) << ' ';
        if (!by_node[i]) os << "open";
        else if (by_node[i]->dead_end) os << "dead";
        else os << by_node[i]->d;
        os << '\n';
    }
    for (const auto& e : graph.edges()) os << "edge " << e.from << ' ' << e.to << '\n';
}

}  // namespace gvp
