#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "gvp/search_graph.hpp"

namespace gvp {

struct GviLabel {
    NodeId node = kNoNode;
    State state;
    double d = 0.0;          // meaningless when dead_end
    bool dead_end = false;   // closed node that reaches no goal or open node
    std::int32_t graph = 0;  // index of the source graph within its batch
};

struct GviOptions {
    /// Keep open-node potentials at h during the pass. Open nodes have no
    /// outgoing edges in a well-formed graph, so both settings agree there.
    bool freeze_open_labels = false;
};

/// Value iteration over a recorded graph: goals start at 0, open nodes at
/// their cached h, closed nodes at infinity; labels propagate backwards along
/// unit-cost edges. Returns every node outside the open set, in node order.
std::vector<GviLabel> gvi_labels(const SearchGraph& graph, GviOptions options = {});

enum class SampleSource : std::uint8_t { plan, gvi };

struct TrainingSample {
    State state;
    double target = 0.0;
    SampleSource source = SampleSource::plan;
    /// Rules of the instance the state belongs to; needed to encode it.
    std::shared_ptr<const Rules> rules;
};

/// Target for dead-end labels: max(multiplier × largest finite label of the
/// same graph, floor). A graph without finite labels uses the floor; when
/// that is not positive its dead ends produce no samples.
struct CapPolicy {
    double multiplier = 2.0;
    double floor = 0.0;
};

double dead_end_cap(std::span<const GviLabel> labels, const CapPolicy& policy);

std::vector<TrainingSample> to_training_samples(std::span<const GviLabel> labels, const CapPolicy& policy,
                                                std::shared_ptr<const Rules> rules = nullptr);

/// Sample i of an n-step plan gets target n - i. `states` is the replay
/// s_0..s_n of the plan.
std::vector<TrainingSample> plan_to_samples(const Plan& plan, std::span<const State> states,
                                            std::shared_ptr<const Rules> rules = nullptr);

/// Line-oriented dump: "node <id> <hash> <status> <d|dead|open>" per node,
/// then "edge <from> <to>" per edge.
void write_gvi_dump(std::ostream& os, const SearchGraph& graph, std::span<const GviLabel> labels);

}  // namespace gvp
