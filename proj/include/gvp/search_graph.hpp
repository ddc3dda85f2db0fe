#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "gvp/domain.hpp"

namespace gvp {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// open: generated, never expanded. closed: expanded. goal: goal state
/// reached by the search (never expanded).
enum class NodeStatus : std::uint8_t { open, closed, goal };

struct SearchNode {
    State state;
    int g = 0;
    double h = 0.0;  // estimator output at creation, clamped to >= 0
    NodeId parent = kNoNode;
    Action via{};
    NodeStatus status = NodeStatus::open;
    bool is_goal = false;
};

struct SearchEdge {
    NodeId from = kNoNode;
    NodeId to = kNoNode;
};

/// Every node and expansion edge produced by one search run.
class SearchGraph {
public:
    NodeId find(const State& s) const;
    /// Adds a node for a state not yet in the graph.
    NodeId add_node(SearchNode node);
    void add_edge(NodeId from, NodeId to);

    SearchNode& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
    const SearchNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    std::span<const SearchNode> nodes() const noexcept { return nodes_; }
    std::span<const SearchEdge> edges() const noexcept { return edges_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    std::vector<NodeId> open_set() const;
    std::vector<std::size_t> out_degrees() const;

    /// Throws Error unless: every edge leaves a closed node, open and goal
    /// nodes have no outgoing edges, states are unique, goal status implies a
    /// goal state, parent chains end at a g == 0 root.
    void validate() const;

private:
    std::vector<SearchNode> nodes_;
    std::vector<SearchEdge> edges_;
    std::unordered_map<State, NodeId, StateHash> index_;
};

}  // namespace gvp
