#include "gvp/oracle.hpp"

#include <array>
#include <deque>
#include <limits>
#include <unordered_set>

#include "gvp/npuzzle.hpp"

namespace gvp {
namespace {

class TileSearch {
public:
    TileSearch(const State& s, int side, std::int64_t cap) : side_(side), cap_(cap) {
        const int n = side * side;
        tiles_.assign(s.values().begin(), s.values().end());
        for (int i = 0; i < n; ++i)
            if (tiles_[i] == 0) blank_ = i;
        h_ = npuzzle_manhattan(s, side);
    }

    int solve() {
        int bound = h_;
        for (;;) {
            const int next = dfs(0, bound, -1);
            if (next < 0) return bound;
            if (next == kInf) throw Error("oracle: no solution");
            bound = next;
        }
    }

    std::int64_t nodes() const noexcept { return nodes_; }

private:
    static constexpr int kInf = std::numeric_limits<int>::max();

    int distance(int tile, int cell) const {
        return std::abs(tile / side_ - cell / side_) + std::abs(tile % side_ - cell % side_);
    }

    // Returns -1 when solved, otherwise the smallest f above the bound.
    int dfs(int g, int bound, int from) {
        const int f = g + h_;
        if (f > bound) return f;
        if (h_ == 0) return -1;
        int best = kInf;
        const int r = blank_ / side_, c = blank_ % side_;
        const int targets[4] = {r > 0 ? blank_ - side_ : -1, r + 1 < side_ ? blank_ + side_ : -1,
                                c > 0 ? blank_ - 1 : -1, c + 1 < side_ ? blank_ + 1 : -1};
        for (int to : targets) {
            if (to < 0 || to == from) continue;
            if (++nodes_ > cap_) throw OracleLimitError("oracle: node cap reached");
            const int tile = tiles_[to];
            const int dh = distance(tile, blank_) - distance(tile, to);
            const int old_blank = blank_;
            tiles_[old_blank] = tile;
            tiles_[to] = 0;
            blank_ = to;
            h_ += dh;
            const int t = dfs(g + 1, bound, old_blank);
            h_ -= dh;
            blank_ = old_blank;
            tiles_[to] = tile;
            tiles_[old_blank] = 0;
            if (t < 0) return -1;
            best = std::min(best, t);
        }
        return best;
    }

    int side_;
    std::int64_t cap_;
    std::vector<int> tiles_;
    int blank_ = 0;
    int h_ = 0;
    std::int64_t nodes_ = 0;
};

OracleResult breadth_first(const Instance& inst, std::int64_t cap) {
    OracleResult out{inst.id, 0, OracleSolver::breadth_first, 1};
    if (is_goal(inst.start, inst)) return out;
    std::unordered_set<State, StateHash> seen{inst.start};
    std::deque<std::pair<State, int>> frontier{{inst.start, 0}};
    while (!frontier.empty()) {
        auto [s, d] = std::move(frontier.front());
        frontier.pop_front();
        for (auto& t : successors(s, inst)) {
            if (!seen.insert(t.next).second) continue;
            if (++out.nodes > cap) throw OracleLimitError("oracle: node cap reached on " + inst.id);
            if (is_goal(t.next, inst)) {
                out.optimal_length = d + 1;
                return out;
            }
            frontier.emplace_back(std::move(t.next), d + 1);
        }
    }
    throw Error("oracle: " + inst.id + " has no solution");
}

}  // namespace

std::string_view to_string(OracleSolver solver) {
    return solver == OracleSolver::ida_star ? "ida*" : "breadth-first";
}

OracleResult oracle_optimal(const Instance& inst, std::int64_t node_cap) {
    if (inst.domain() != DomainKind::npuzzle) return breadth_first(inst, node_cap);
    const auto& rules = static_cast<const NPuzzleRules&>(*inst.rules);
    if (!npuzzle_solvable(inst.start.values(), rules.side())) throw Error("oracle: " + inst.id + " has no solution");
    TileSearch search(inst.start, rules.side(), node_cap);
    const int length = search.solve();
    return {inst.id, length, OracleSolver::ida_star, search.nodes()};
}

}  // namespace gvp
