#pragma once

#include <array>

#include "gvp/domain.hpp"

namespace gvp {

/// Obstacle-free H×W grid. Row 0 is the bottom row: U increments the row,
/// R increments the column. States are (row, col).
struct GridSpec {
    int height = 50;
    int width = 50;
    std::array<int, 2> start{0, 0};
    std::array<int, 2> goal{49, 49};

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class GridRules final : public Rules {
public:
    explicit GridRules(GridSpec spec);

    const GridSpec& spec() const noexcept { return spec_; }

    DomainKind kind() const override { return DomainKind::grid; }
    void check(const State& s) const override;
    std::vector<Transition> successors(const State& s) const override;
    bool is_goal(const State& s) const override;
    bool reversible() const override { return true; }

    EncodingShape shape() const override { return {spec_.height, spec_.width}; }
    std::size_t encoding_size(EncodingShape shape) const override;
    void encode(const State& s, EncodingShape shape, std::span<float> out) const override;

    std::string render(const State& s) const override;

private:
    GridSpec spec_;
};

State grid_state(int row, int col);
Instance make_grid_instance(const GridSpec& spec, std::string id = "grid");

}  // namespace gvp
