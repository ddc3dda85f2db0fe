#pragma once

#include <string_view>

#include "gvp/domain.hpp"

namespace gvp {

/// Sliding-tile puzzle on a side×side board. A state lists the tile at every
/// cell in row-major order, 0 is the blank; the goal is the identity
/// permutation (blank in the top-left corner). Actions name the direction the
/// blank moves, with U decrementing the row.
class NPuzzleRules final : public Rules {
public:
    explicit NPuzzleRules(int side);

    int side() const noexcept { return side_; }
    int cells() const noexcept { return side_ * side_; }

    DomainKind kind() const override { return DomainKind::npuzzle; }
    void check(const State& s) const override;
    std::vector<Transition> successors(const State& s) const override;
    bool is_goal(const State& s) const override;
    bool reversible() const override { return true; }

    EncodingShape shape() const override { return {side_, side_}; }
    std::size_t encoding_size(EncodingShape shape) const override;
    void encode(const State& s, EncodingShape shape, std::span<float> out) const override;

    std::string render(const State& s) const override;

    State goal() const;

private:
    int side_;
};

/// True when `tiles` (row-major, 0 = blank) can reach the identity goal.
bool npuzzle_solvable(std::span<const State::value_type> tiles, int side);

/// Sum of tile Manhattan distances to their goal cells (blank excluded).
int npuzzle_manhattan(const State& s, int side);

Instance make_npuzzle_instance(std::vector<State::value_type> tiles, std::string id);
Instance make_npuzzle_goal_instance(int side, std::string id = "goal");

/// One instance per non-empty line, space-separated permutation. Ids are
/// `<prefix>:<line number>`.
std::vector<Instance> parse_npuzzle_file(std::string_view text, std::string_view id_prefix);
std::string render_npuzzle_line(const State& s);

}  // namespace gvp
