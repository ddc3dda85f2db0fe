#include "gvp/heuristic.hpp"

#include <algorithm>
#include <cstdlib>

#include "gvp/grid.hpp"
#include "gvp/npuzzle.hpp"

namespace gvp {

void ZeroHeuristic::evaluate_batch(std::span<const State>, const Instance&, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
}

void ManhattanHeuristic::evaluate_batch(std::span<const State> states, const Instance& inst,
                                        std::span<double> out) const {
    if (const auto* puzzle = dynamic_cast<const NPuzzleRules*>(inst.rules.get())) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            out[i] = npuzzle_manhattan(states[i], puzzle->side());
        }
        return;
    }
    if (const auto* grid = dynamic_cast<const GridRules*>(inst.rules.get())) {
        const auto& goal = grid->spec().goal;
        for (std::size_t i = 0; i < states.size(); ++i) {
            out[i] = std::abs(states[i][0] - goal[0]) + std::abs(states[i][1] - goal[1]);
        }
        return;
    }
    throw Error("manhattan heuristic: unsupported domain " + std::string(to_string(inst.domain())));
}

}  // namespace gvp
