#pragma once

#include <span>

#include "gvp/domain.hpp"

namespace gvp {

/// Read-only distance-to-goal estimate used to guide search. Implementations
/// must be safe for concurrent calls and return values >= 0.
class Heuristic {
public:
    virtual ~Heuristic() = default;

    virtual void evaluate_batch(std::span<const State> states, const Instance& inst,
                                std::span<double> out) const = 0;

    double evaluate(const State& s, const Instance& inst) const {
        double v = 0.0;
        evaluate_batch(std::span<const State>(&s, 1), inst, std::span<double>(&v, 1));
        return v;
    }
};

class ZeroHeuristic final : public Heuristic {
public:
    void evaluate_batch(std::span<const State> states, const Instance&, std::span<double> out) const override;
};

/// Sum of tile distances for N-puzzle, distance to the goal cell for grid.
class ManhattanHeuristic final : public Heuristic {
public:
    void evaluate_batch(std::span<const State> states, const Instance& inst,
                        std::span<double> out) const override;
};

}  // namespace gvp
