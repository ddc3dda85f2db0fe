#include "gvp/grid.hpp"

#include <algorithm>
#include <sstream>

namespace gvp {
namespace {

constexpr int kRowStep[] = {+1, -1, 0, 0};
constexpr int kColStep[] = {0, 0, -1, +1};

}  // namespace

GridRules::GridRules(GridSpec spec) : spec_(spec) {
    if (spec_.height <= 0 || spec_.width <= 0) throw Error("grid: dimensions must be positive");
    auto inside = [&](const std::array<int, 2>& rc) {
        return rc[0] >= 0 && rc[0] < spec_.height && rc[1] >= 0 && rc[1] < spec_.width;
    };
    if (!inside(spec_.start)) throw Error("grid: start outside the board");
    if (!inside(spec_.goal)) throw Error("grid: goal outside the board");
}

void GridRules::check(const State& s) const {
    if (s.size() != 2 || s[0] < 0 || s[0] >= spec_.height || s[1] < 0 || s[1] >= spec_.width) {
        throw Error("grid: malformed state " + s.to_string());
    }
}

std::vector<Transition> GridRules::successors(const State& s) const {
    std::vector<Transition> out;
    out.reserve(4);
    for (auto d : kDirections) {
        const int i = static_cast<int>(d);
        const int r = s[0] + kRowStep[i];
        const int c = s[1] + kColStep[i];
        if (r < 0 || r >= spec_.height || c < 0 || c >= spec_.width) continue;
        out.push_back({Action{d, -1}, grid_state(r, c)});
    }
    return out;
}

bool GridRules::is_goal(const State& s) const {
    return s[0] == spec_.goal[0] && s[1] == spec_.goal[1];
}

std::size_t GridRules::encoding_size(EncodingShape shape) const {
    return static_cast<std::size_t>(shape.rows) * static_cast<std::size_t>(shape.cols);
}

void GridRules::encode(const State& s, EncodingShape shape, std::span<float> out) const {
    if (shape.rows < spec_.height || shape.cols < spec_.width || out.size() != encoding_size(shape)) {
        throw Error("grid: encoding shape too small for the board");
    }
    std::fill(out.begin(), out.end(), 0.0f);
    out[static_cast<std::size_t>(s[0] * shape.cols + s[1])] = 1.0f;
}

std::string GridRules::render(const State& s) const {
    std::ostringstream os;
    for (int r = spec_.height - 1; r >= 0; --r) {
        for (int c = 0; c < spec_.width; ++c) {
            char ch = '.';
            if (r == spec_.goal[0] && c == spec_.goal[1]) ch = 'G';
            if (r == s[0] && c == s[1]) ch = '@';
            os << ch;
        }
        os << '\n';
    }
    return os.str();
}

State grid_state(int row, int col) {
    return State{static_cast<State::value_type>(row), static_cast<State::value_type>(col)};
}

Instance make_grid_instance(const GridSpec& spec, std::string id) {
    auto rules = std::make_shared<const GridRules>(spec);
    return Instance{std::move(id), grid_state(spec.start[0], spec.start[1]), std::move(rules)};
}

}  // namespace gvp
