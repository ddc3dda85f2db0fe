#include "gvp/search_graph.hpp"

#include <string>

namespace gvp {

NodeId SearchGraph::find(const State& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? kNoNode : it->second;
}

NodeId SearchGraph::add_node(SearchNode node) {
    const auto id = static_cast<NodeId>(nodes_.size());
    auto [it, inserted] = index_.emplace(node.state, id);
    if (!inserted) throw Error("search graph: duplicate state " + node.state.to_string());
    nodes_.push_back(std::move(node));
    return id;
}

void SearchGraph::add_edge(NodeId from, NodeId to) { edges_.push_back({from, to}); }

std::vector<NodeId> SearchGraph::open_set() const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].status == NodeStatus::open) out.push_back(static_cast<NodeId>(i));
    }
    return out;
}

std::vector<std::size_t> SearchGraph::out_degrees() const {
    std::vector<std::size_t> deg(nodes_.size(), 0);
    for (const auto& e : edges_) ++deg[static_cast<std::size_t>(e.from)];
    return deg;
}

void SearchGraph::validate() const {
    const auto n = static_cast<NodeId>(nodes_.size());
    if (index_.size() != nodes_.size()) throw Error("search graph: index and node table disagree");
    for (NodeId id = 0; id < n; ++id) {
        const auto& node = nodes_[static_cast<std::size_t>(id)];
        if (find(node.state) != id) throw Error("search graph: state of node " + std::to_string(id) + " not indexed");
        if (node.status == NodeStatus::goal && !node.is_goal) {
            throw Error("search graph: node " + std::to_string(id) + " has goal status but is not a goal");
        }
        if (!(node.h >= 0.0)) throw Error("search graph: negative or NaN h at node " + std::to_string(id));
        NodeId cur = id;
        for (NodeId steps = 0; nodes_[static_cast<std::size_t>(cur)].parent != kNoNode; ++steps) {
            cur = nodes_[static_cast<std::size_t>(cur)].parent;
            if (cur < 0 || cur >= n || steps > n) throw Error("search graph: broken parent chain at node " + std::to_string(id));
        }
        if (nodes_[static_cast<std::size_t>(cur)].g != 0) throw Error("search graph: root with g != 0");
    }
    for (const auto& e : edges_) {
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) throw Error("search graph: edge out of range");
        if (nodes_[static_cast<std::size_t>(e.from)].status != NodeStatus::closed) {
            throw Error("search graph: edge leaves non-closed node " + std::to_string(e.from));
        }
    }
}

}  // namespace gvp
