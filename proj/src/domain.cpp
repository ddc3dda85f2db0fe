#include "gvp/domain.hpp"

#include <random>

namespace gvp {

std::string_view to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::grid: return "grid";
        case DomainKind::npuzzle: return "npuzzle";
        case DomainKind::sokoban: return "sokoban";
    }
    return "?";
}

DomainKind parse_domain(std::string_view name) {
    if (name == "grid") return DomainKind::grid;
    if (name == "npuzzle") return DomainKind::npuzzle;
    if (name == "sokoban") return DomainKind::sokoban;
    throw Error("unknown domain '" + std::string(name) + "'");
}

ParseError::ParseError(const std::string& what, int line, int column)
    : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

char direction_letter(Direction d) {
    static constexpr char letters[] = {'U', 'D', 'L', 'R'};
    return letters[static_cast<int>(d)];
}

std::optional<Direction> direction_from_letter(char c) {
    switch (c) {
        case 'U': return Direction::up;
        case 'D': return Direction::down;
        case 'L': return Direction::left;
        case 'R': return Direction::right;
        default: return std::nullopt;
    }
}

std::optional<State> Rules::apply(const State& s, const Action& a) const {
    for (auto& t : successors(s)) {
        if (t.action == a) return std::move(t.next);
    }
    return std::nullopt;
}

std::string Rules::format_plan(const State&, std::span<const Action> actions) const {
    std::string out;
    out.reserve(actions.size());
    for (const auto& a : actions) out.push_back(direction_letter(a.dir));
    return out;
}

std::vector<Action> Rules::parse_plan(const State&, std::string_view text) const {
    std::vector<Action> actions;
    actions.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto d = direction_from_letter(text[i]);
        if (!d) {
            throw PlanError("invalid action character '" + std::string(1, text[i]) + "' at offset " +
                            std::to_string(i));
        }
        actions.push_back(Action{*d, -1});
    }
    return actions;
}

std::vector<Transition> successors(const State& s, const Instance& inst) {
    inst.rules->check(s);
    return inst.rules->successors(s);
}

bool is_goal(const State& s, const Instance& inst) { return inst.rules->is_goal(s); }

std::vector<State> replay(const Plan& plan, const Instance& inst) {
    std::vector<State> states;
    states.reserve(plan.length() + 1);
    states.push_back(inst.start);
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        auto next = inst.rules->apply(states.back(), plan.actions[i]);
        if (!next) {
            throw PlanError(inst.id + ": action " + std::to_string(i) + " is not applicable");
        }
        states.push_back(std::move(*next));
    }
    if (!inst.rules->is_goal(states.back())) {
        throw PlanError(inst.id + ": plan ends in a non-goal state");
    }
    return states;
}

bool is_valid_plan(const Plan& plan, const Instance& inst) {
    try {
        replay(plan, inst);
        return true;
    } catch (const PlanError&) {
        return false;
    }
}

std::string format_plan(const Plan& plan, const Instance& inst) {
    return inst.rules->format_plan(inst.start, plan.actions);
}

Plan parse_plan(std::string_view text, const Instance& inst) {
    return Plan{inst.id, inst.rules->parse_plan(inst.start, text)};
}

std::vector<float> encode(const State& s, const Instance& inst) {
    return encode(s, inst, inst.rules->shape());
}

std::vector<float> encode(const State& s, const Instance& inst, EncodingShape shape) {
    std::vector<float> out(inst.rules->encoding_size(shape));
    inst.rules->encode(s, shape, out);
    return out;
}

Instance scramble(const Instance& goal_instance, int k, std::uint64_t seed) {
    if (k < 0) throw Error("scramble: k must be non-negative");
    if (!goal_instance.rules->reversible()) {
        throw Error("scramble: domain " + std::string(to_string(goal_instance.domain())) +
                    " has irreversible moves");
    }
    std::mt19937_64 rng(seed);
    State s = goal_instance.start;
    for (int i = 0; i < k; ++i) {
        auto moves = goal_instance.rules->successors(s);
        if (moves.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
        s = std::move(moves[pick(rng)].next);
    }
    Instance out = goal_instance;
    out.start = std::move(s);
    return out;
}

}  // namespace gvp
