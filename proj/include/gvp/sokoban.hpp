#pragma once

#include <string_view>
#include <vector>

#include "gvp/domain.hpp"

namespace gvp {

enum class Square : std::uint8_t { floor, wall, outside };

/// Sokoban board with push-granularity actions.
///
/// A state is `[player, box_0, ..., box_{n-1}]` with boxes sorted by cell
/// index and the player normalized to the smallest cell index reachable
/// without pushing. Cells are `row * cols + col`, row 0 on top; U decrements
/// the row.
class SokobanRules final : public Rules {
public:
    SokobanRules(int rows, int cols, std::vector<Square> squares, std::vector<bool> goals,
                 int player_origin);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int player_origin() const noexcept { return player_origin_; }
    const std::vector<Square>& squares() const noexcept { return squares_; }
    const std::vector<int>& goal_cells() const noexcept { return goal_cells_; }
    bool is_goal_cell(int cell) const { return goals_[static_cast<std::size_t>(cell)]; }
    bool is_floor(int cell) const { return squares_[static_cast<std::size_t>(cell)] == Square::floor; }

    DomainKind kind() const override { return DomainKind::sokoban; }
    void check(const State& s) const override;
    std::vector<Transition> successors(const State& s) const override;
    bool is_goal(const State& s) const override;
    std::optional<State> apply(const State& s, const Action& a) const override;
    bool reversible() const override { return false; }

    EncodingShape shape() const override { return {rows_, cols_}; }
    std::size_t encoding_size(EncodingShape shape) const override;
    void encode(const State& s, EncodingShape shape, std::span<float> out) const override;

    /// XSB text of `s`; the player is drawn at `player_cell` when given,
    /// otherwise at the normalized cell.
    std::string render(const State& s) const override;
    std::string render(const State& s, int player_cell) const;

    /// LURD string: lowercase walks, uppercase pushes. Walk segments are
    /// shortest paths with ties broken U < D < L < R. Starts from the level's
    /// original player cell when `start` is the initial state.
    std::string format_plan(const State& start, std::span<const Action> actions) const override;
    std::vector<Action> parse_plan(const State& start, std::string_view text) const override;

    /// Builds the canonical state for an arbitrary player cell and box set.
    State make_state(int player, std::vector<int> boxes) const;
    /// Cells reachable by the player without pushing, as a mask.
    std::vector<bool> reachable(const State& s) const;

    void set_start(State start) { start_ = std::move(start); }

private:
    int move(int cell, Direction d) const;
    using Mask = std::vector<std::uint8_t>;
    Mask box_mask(const State& s) const;
    Mask flood(int from, const Mask& boxes) const;
    int normalize(int player, const Mask& boxes) const;
    /// Shortest walk from `from` to `to` avoiding boxes, appended as lowercase letters.
    bool append_walk(int from, int to, const Mask& boxes, std::string& out) const;

    int rows_;
    int cols_;
    std::vector<Square> squares_;
    std::vector<bool> goals_;
    std::vector<int> goal_cells_;
    int player_origin_;
    State start_;
};

/// Parses one level in XSB notation. Empty cells not reachable from the
/// player through non-wall squares are treated as outside the board.
Instance parse_xsb(std::string_view text, std::string id = "level");

/// Splits a multi-level file. Lines starting with ';' and any line that is
/// not made of board characters separate levels. Ids are `<prefix>:<n>`,
/// 1-based.
std::vector<Instance> parse_xsb_collection(std::string_view text, std::string_view id_prefix);

std::string render_xsb(const Instance& inst);

}  // namespace gvp
