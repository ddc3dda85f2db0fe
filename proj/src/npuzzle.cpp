#include "gvp/npuzzle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>


namespace gvp {
namespace {

constexpr int kRowStep[] = {-1, +1, 0, 0};
constexpr int kColStep[] = {0, 0, -1, +1};

int find_blank(const State& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace

NPuzzleRules::NPuzzleRules(int side) : side_(side) {
    if (side < 2 || side > 8) throw Error("npuzzle: side must be in [2, 8]");
}

void NPuzzleRules::check(const State& s) const {
    if (static_cast<int>(s.size()) != cells()) throw Error("npuzzle: malformed state " + s.to_string());
    std::vector<bool> seen(static_cast<std::size_t>(cells()), false);
    for (auto v : s.values()) {
        if (v < 0 || v >= cells() || seen[static_cast<std::size_t>(v)]) {
            throw Error("npuzzle: state is not a permutation " + s.to_string());
        }
        seen[static_cast<std::size_t>(v)] = true;
    }
}

std::vector<Transition> NPuzzleRules::successors(const State& s) const {
    const int blank = find_blank(s);
    const int r = blank / side_;
    const int c = blank % side_;
    std::vector<Transition> out;
    out.reserve(4);
    for (auto d : kDirections) {
        const int i = static_cast<int>(d);
        const int nr = r + kRowStep[i];
        const int nc = c + kColStep[i];
        if (nr < 0 || nr >= side_ || nc < 0 || nc >= side_) continue;
        std::vector<State::value_type> tiles(s.values().begin(), s.values().end());
        std::swap(tiles[static_cast<std::size_t>(blank)], tiles[static_cast<std::size_t>(nr * side_ + nc)]);
        out.push_back({Action{d, -1}, State(std::move(tiles))});
    }
    return out;
}

bool NPuzzleRules::is_goal(const State& s) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != static_cast<State::value_type>(i)) return false;
    }
    return true;
}

std::size_t NPuzzleRules::encoding_size(EncodingShape shape) const {
    const auto n = static_cast<std::size_t>(shape.rows) * static_cast<std::size_t>(shape.cols);
    return n * n;
}

void NPuzzleRules::encode(const State& s, EncodingShape shape, std::span<float> out) const {
    if (shape.rows != side_ || shape.cols != side_ || out.size() != encoding_size(shape)) {
        throw Error("npuzzle: encoding shape does not match the board");
    }
    std::fill(out.begin(), out.end(), 0.0f);
    const auto n = static_cast<std::size_t>(cells());
    for (std::size_t cell = 0; cell < n; ++cell) {
        out[static_cast<std::size_t>(s[cell]) * n + cell] = 1.0f;
    }
}

std::string NPuzzleRules::render(const State& s) const {
    std::ostringstream os;
    for (int r = 0; r < side_; ++r) {
        for (int c = 0; c < side_; ++c) {
            if (c) os << ' ';
            os << s[static_cast<std::size_t>(r * side_ + c)];
        }
        os << '\n';
    }
    return os.str();
}

State NPuzzleRules::goal() const {
    std::vector<State::value_type> tiles(static_cast<std::size_t>(cells()));
    for (std::size_t i = 0; i < tiles.size(); ++i) tiles[i] = static_cast<State::value_type>(i);
    return State(std::move(tiles));
}

bool npuzzle_solvable(std::span<const State::value_type> tiles, int side) {
    // A move swaps the blank with a neighbour: it flips the permutation parity
    // and the parity of the blank's distance to its goal cell together.
    std::vector<State::value_type> perm(tiles.begin(), tiles.end());
    int transpositions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        while (perm[i] != static_cast<State::value_type>(i)) {
            std::swap(perm[i], perm[static_cast<std::size_t>(perm[i])]);
            ++transpositions;
        }
    }
    int blank = 0;
    while (tiles[static_cast<std::size_t>(blank)] != 0) ++blank;
    const int blank_distance = blank / side + blank % side;
    return (transpositions + blank_distance) % 2 == 0;
}

int npuzzle_manhattan(const State& s, int side) {
    int total = 0;
    for (std::size_t cell = 0; cell < s.size(); ++cell) {
        const int tile = s[cell];
        if (tile == 0) continue;
        const int c = static_cast<int>(cell);
        total += std::abs(c / side - tile / side) + std::abs(c % side - tile % side);
    }
    return total;
}

Instance make_npuzzle_instance(std::vector<State::value_type> tiles, std::string id) {
    const int n = static_cast<int>(tiles.size());
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) throw Error("npuzzle: " + id + ": tile count is not a square");
    auto rules = std::make_shared<const NPuzzleRules>(side);
    State start(std::move(tiles));
    rules->check(start);
    if (!npuzzle_solvable(start.values(), side)) {
        throw Error("npuzzle: " + id + ": permutation cannot reach the goal");
    }
    return Instance{std::move(id), std::move(start), std::move(rules)};
}

Instance make_npuzzle_goal_instance(int side, std::string id) {
    auto rules = std::make_shared<const NPuzzleRules>(side);
    State goal = rules->goal();
    return Instance{std::move(id), std::move(goal), std::move(rules)};
}

std::vector<Instance> parse_npuzzle_file(std::string_view text, std::string_view id_prefix) {
    std::vector<Instance> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream is(line);
        std::vector<State::value_type> tiles;
        std::string tok;
        while (is >> tok) {
            try {
                std::size_t used = 0;
                const int v = std::stoi(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                tiles.push_back(static_cast<State::value_type>(v));
            } catch (const std::exception&) {
                throw ParseError("npuzzle: not an integer: '" + tok + "'", line_no, 1);
            }
        }
        try {
            out.push_back(make_npuzzle_instance(std::move(tiles), std::string(id_prefix) + ":" +
                                                                      std::to_string(line_no)));
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no, 1);
        }
    }
    return out;
}

std::string render_npuzzle_line(const State& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ' ';
        os << s[i];
    }
    return os.str();
}

}  // namespace gvp
