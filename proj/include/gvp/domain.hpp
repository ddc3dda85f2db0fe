#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gvp/state.hpp"

namespace gvp {

enum class DomainKind : std::uint8_t { grid, npuzzle, sokoban };

std::string_view to_string(DomainKind kind);
DomainKind parse_domain(std::string_view name);

/// Fixed enumeration order U, D, L, R; every domain lists moves in this order.
enum class Direction : std::uint8_t { up = 0, down = 1, left = 2, right = 3 };

inline constexpr Direction kDirections[] = {Direction::up, Direction::down, Direction::left,
                                            Direction::right};

char direction_letter(Direction d);
std::optional<Direction> direction_from_letter(char c);

/// One move. Grid and N-puzzle only use `dir`; a Sokoban push also names the
/// cell of the pushed box.
struct Action {
    Direction dir = Direction::up;
    std::int32_t cell = -1;

    friend bool operator==(const Action&, const Action&) = default;
};

struct Transition {
    Action action;
    State next;
};

/// Board extent used to lay out encodings. Instances smaller than the shape
/// are zero padded.
struct EncodingShape {
    int rows = 0;
    int cols = 0;

    friend bool operator==(const EncodingShape&, const EncodingShape&) = default;
};

class PlanError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Transition system of one instance: everything a search needs to know
/// about a domain. Implementations are immutable after construction and safe
/// to share between threads.
class Rules {
public:
    virtual ~Rules() = default;

    virtual DomainKind kind() const = 0;
    /// Throws Error if `s` is not a well-formed state of this instance.
    virtual void check(const State& s) const = 0;
    virtual std::vector<Transition> successors(const State& s) const = 0;
    virtual bool is_goal(const State& s) const = 0;
    /// Result of `a` in `s`, or nullopt when `a` is not applicable.
    virtual std::optional<State> apply(const State& s, const Action& a) const;
    /// True when every transition can be undone by another transition.
    virtual bool reversible() const = 0;

    virtual EncodingShape shape() const = 0;
    virtual std::size_t encoding_size(EncodingShape shape) const = 0;
    virtual void encode(const State& s, EncodingShape shape, std::span<float> out) const = 0;

    virtual std::string render(const State& s) const = 0;
    virtual std::string format_plan(const State& start, std::span<const Action> actions) const;
    virtual std::vector<Action> parse_plan(const State& start, std::string_view text) const;
};

struct Instance {
    std::string id;
    State start;
    std::shared_ptr<const Rules> rules;

    DomainKind domain() const { return rules->kind(); }
};

struct Plan {
    std::string instance_id;
    std::vector<Action> actions;

    std::size_t length() const noexcept { return actions.size(); }
};

std::vector<Transition> successors(const State& s, const Instance& inst);
bool is_goal(const State& s, const Instance& inst);

/// Replays `plan` from the instance start. Returns the visited states
/// s_0..s_n; throws PlanError when an action is inapplicable or the final
/// state is not a goal.
std::vector<State> replay(const Plan& plan, const Instance& inst);
bool is_valid_plan(const Plan& plan, const Instance& inst);

std::string format_plan(const Plan& plan, const Instance& inst);
Plan parse_plan(std::string_view text, const Instance& inst);

/// Encoding with the instance's own board shape.
std::vector<float> encode(const State& s, const Instance& inst);
std::vector<float> encode(const State& s, const Instance& inst, EncodingShape shape);

/// Random walk of `k` uniformly chosen legal moves from the instance's start
/// (a goal state). Only defined for reversible domains.
Instance scramble(const Instance& goal_instance, int k, std::uint64_t seed);

}  // namespace gvp
