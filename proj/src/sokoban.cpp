#include "gvp/sokoban.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

namespace gvp {
namespace {

constexpr int kRowStep[] = {-1, +1, 0, 0};
constexpr int kColStep[] = {0, 0, -1, +1};

Direction opposite(Direction d) {
    switch (d) {
        case Direction::up: return Direction::down;
        case Direction::down: return Direction::up;
        case Direction::left: return Direction::right;
        case Direction::right: return Direction::left;
    }
    return d;
}

bool is_board_char(char c) {
    switch (c) {
        case '#': case '@': case '$': case '.': case '*': case '+': case ' ': case '-': case '_':
            return true;
        default:
            return false;
    }
}

}  // namespace

SokobanRules::SokobanRules(int rows, int cols, std::vector<Square> squares, std::vector<bool> goals,
                           int player_origin)
    : rows_(rows),
      cols_(cols),
      squares_(std::move(squares)),
      goals_(std::move(goals)),
      player_origin_(player_origin) {
    const auto n = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
    if (rows_ <= 0 || cols_ <= 0 || squares_.size() != n || goals_.size() != n) {
        throw Error("sokoban: inconsistent board dimensions");
    }
    if (n > 32000) throw Error("sokoban: board too large");
    for (std::size_t i = 0; i < n; ++i) {
        if (goals_[i]) goal_cells_.push_back(static_cast<int>(i));
    }
}

int SokobanRules::move(int cell, Direction d) const {
    const int i = static_cast<int>(d);
    const int r = cell / cols_ + kRowStep[i];
    const int c = cell % cols_ + kColStep[i];
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) return -1;
    return r * cols_ + c;
}

SokobanRules::Mask SokobanRules::box_mask(const State& s) const {
    Mask mask(squares_.size(), 0);
    for (std::size_t i = 1; i < s.size(); ++i) mask[static_cast<std::size_t>(s[i])] = 1;
    return mask;
}

SokobanRules::Mask SokobanRules::flood(int from, const Mask& boxes) const {
    Mask seen(squares_.size(), 0);
    std::vector<int> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
        const int cell = stack.back();
        stack.pop_back();
        for (auto d : kDirections) {
            const int next = move(cell, d);
            if (next < 0) continue;
            const auto n = static_cast<std::size_t>(next);
            if (seen[n] || boxes[n] || squares_[n] != Square::floor) continue;
            seen[n] = 1;
            stack.push_back(next);
        }
    }
    return seen;
}

int SokobanRules::normalize(int player, const Mask& boxes) const {
    const Mask seen = flood(player, boxes);
    return static_cast<int>(std::find(seen.begin(), seen.end(), 1) - seen.begin());
}

State SokobanRules::make_state(int player, std::vector<int> boxes) const {
    std::sort(boxes.begin(), boxes.end());
    Mask mask(squares_.size(), 0);
    for (int b : boxes) mask[static_cast<std::size_t>(b)] = 1;
    std::vector<State::value_type> values;
    values.reserve(boxes.size() + 1);
    values.push_back(static_cast<State::value_type>(normalize(player, mask)));
    for (int b : boxes) values.push_back(static_cast<State::value_type>(b));
    return State(std::move(values));
}

void SokobanRules::check(const State& s) const {
    const auto n = static_cast<int>(squares_.size());
    if (s.size() != goal_cells_.size() + 1) throw Error("sokoban: wrong box count in " + s.to_string());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 0 || s[i] >= n || !is_floor(s[i])) throw Error("sokoban: cell off the floor in " + s.to_string());
        if (i >= 2 && s[i] <= s[i - 1]) throw Error("sokoban: boxes not sorted in " + s.to_string());
    }
    const Mask boxes = box_mask(s);
    if (boxes[static_cast<std::size_t>(s[0])]) throw Error("sokoban: player on a box in " + s.to_string());
    if (normalize(s[0], boxes) != s[0]) throw Error("sokoban: player not normalized in " + s.to_string());
}

std::vector<bool> SokobanRules::reachable(const State& s) const {
    const Mask seen = flood(s[0], box_mask(s));
    return std::vector<bool>(seen.begin(), seen.end());
}

std::vector<Transition> SokobanRules::successors(const State& s) const {
    std::vector<Transition> out;
    Mask boxes = box_mask(s);
    const Mask reach = flood(s[0], boxes);
    for (std::size_t bi = 1; bi < s.size(); ++bi) {
        const int box = s[bi];
        for (auto d : kDirections) {
            const int stand = move(box, opposite(d));
            const int dest = move(box, d);
            if (stand < 0 || dest < 0) continue;
            if (!reach[static_cast<std::size_t>(stand)]) continue;
            if (!is_floor(dest) || boxes[static_cast<std::size_t>(dest)]) continue;

            std::vector<State::value_type> values(s.values().begin(), s.values().end());
            values[bi] = static_cast<State::value_type>(dest);
            std::sort(values.begin() + 1, values.end());
            boxes[static_cast<std::size_t>(box)] = 0;
            boxes[static_cast<std::size_t>(dest)] = 1;
            values[0] = static_cast<State::value_type>(normalize(box, boxes));
            boxes[static_cast<std::size_t>(dest)] = 0;
            boxes[static_cast<std::size_t>(box)] = 1;
            out.push_back({Action{d, box}, State(std::move(values))});
        }
    }
    return out;
}

std::optional<State> SokobanRules::apply(const State& s, const Action& a) const {
    if (a.cell < 0 || a.cell >= static_cast<int>(squares_.size())) return std::nullopt;
    Mask boxes = box_mask(s);
    if (!boxes[static_cast<std::size_t>(a.cell)]) return std::nullopt;
    const int stand = move(a.cell, opposite(a.dir));
    const int dest = move(a.cell, a.dir);
    if (stand < 0 || dest < 0 || !is_floor(dest) || boxes[static_cast<std::size_t>(dest)]) return std::nullopt;
    if (!flood(s[0], boxes)[static_cast<std::size_t>(stand)]) return std::nullopt;
    std::vector<int> moved;
    for (std::size_t i = 1; i < s.size(); ++i) moved.push_back(s[i] == a.cell ? dest : s[i]);
    return make_state(a.cell, std::move(moved));
}

bool SokobanRules::is_goal(const State& s) const {
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!goals_[static_cast<std::size_t>(s[i])]) return false;
    }
    return true;
}

std::size_t SokobanRules::encoding_size(EncodingShape shape) const {
    return 4 * static_cast<std::size_t>(shape.rows) * static_cast<std::size_t>(shape.cols);
}

void SokobanRules::encode(const State& s, EncodingShape shape, std::span<float> out) const {
    if (shape.rows < rows_ || shape.cols < cols_ || out.size() != encoding_size(shape)) {
        throw Error("sokoban: encoding shape too small for the board");
    }
    std::fill(out.begin(), out.end(), 0.0f);
    const auto plane = static_cast<std::size_t>(shape.rows) * static_cast<std::size_t>(shape.cols);
    auto at = [&](std::size_t p, int cell) -> float& {
        const auto r = static_cast<std::size_t>(cell / cols_);
        const auto c = static_cast<std::size_t>(cell % cols_);
        return out[p * plane + r * static_cast<std::size_t>(shape.cols) + c];
    };
    const Mask boxes = box_mask(s);
    const Mask reach = flood(s[0], boxes);
    for (int cell = 0; cell < static_cast<int>(squares_.size()); ++cell) {
        const auto i = static_cast<std::size_t>(cell);
        if (squares_[i] != Square::floor) at(0, cell) = 1.0f;
        if (boxes[i]) at(1, cell) = 1.0f;
        if (goals_[i]) at(2, cell) = 1.0f;
        if (reach[i]) at(3, cell) = 1.0f;
    }
}

std::string SokobanRules::render(const State& s) const { return render(s, s[0]); }

std::string SokobanRules::render(const State& s, int player_cell) const {
    const Mask boxes = box_mask(s);
    std::string out;
    for (int r = 0; r < rows_; ++r) {
        std::string line;
        for (int c = 0; c < cols_; ++c) {
            const int cell = r * cols_ + c;
            const auto i = static_cast<std::size_t>(cell);
            char ch = ' ';
            if (squares_[i] == Square::wall) {
                ch = '#';
            } else if (squares_[i] == Square::floor) {
                if (boxes[i]) ch = goals_[i] ? '*' : '$';
                else if (cell == player_cell) ch = goals_[i] ? '+' : '@';
                else if (goals_[i]) ch = '.';
            }
            line.push_back(ch);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out.push_back('\n');
    }
    return out;
}

bool SokobanRules::append_walk(int from, int to, const Mask& boxes, std::string& out) const {
    if (from == to) return true;
    // Distances to the target, then a greedy descent that prefers U, D, L, R:
    // yields the lexicographically smallest shortest walk.
    std::vector<int> dist(squares_.size(), -1);
    std::deque<int> queue{to};
    dist[static_cast<std::size_t>(to)] = 0;
    while (!queue.empty() && dist[static_cast<std::size_t>(from)] < 0) {
        const int cell = queue.front();
        queue.pop_front();
        for (auto d : kDirections) {
            const int next = move(cell, d);
            if (next < 0) continue;
            const auto n = static_cast<std::size_t>(next);
            if (dist[n] >= 0 || boxes[n] || squares_[n] != Square::floor) continue;
            dist[n] = dist[static_cast<std::size_t>(cell)] + 1;
            queue.push_back(next);
        }
    }
    if (dist[static_cast<std::size_t>(from)] < 0) return false;
    int cell = from;
    while (cell != to) {
        for (auto d : kDirections) {
            const int next = move(cell, d);
            if (next >= 0 && dist[static_cast<std::size_t>(next)] == dist[static_cast<std::size_t>(cell)] - 1) {
                out.push_back(static_cast<char>(std::tolower(direction_letter(d))));
                cell = next;
                break;
            }
        }
    }
    return true;
}

std::string SokobanRules::format_plan(const State& start, std::span<const Action> actions) const {
    int player = (start == start_) ? player_origin_ : start[0];
    Mask boxes = box_mask(start);
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const Action& a = actions[i];
        const int stand = move(a.cell, opposite(a.dir));
        const int dest = move(a.cell, a.dir);
        if (a.cell < 0 || !boxes[static_cast<std::size_t>(a.cell)] || stand < 0 || dest < 0 ||
            !append_walk(player, stand, boxes, out)) {
            throw PlanError("sokoban: push " + std::to_string(i) + " is not applicable");
        }
        out.push_back(direction_letter(a.dir));
        boxes[static_cast<std::size_t>(a.cell)] = 0;
        boxes[static_cast<std::size_t>(dest)] = 1;
        player = a.cell;
    }
    return out;
}

std::vector<Action> SokobanRules::parse_plan(const State& start, std::string_view text) const {
    int player = (start == start_) ? player_origin_ : start[0];
    Mask boxes = box_mask(start);
    std::vector<Action> pushes;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        auto d = direction_from_letter(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        if (!d) {
            throw PlanError("invalid action character '" + std::string(1, ch) + "' at offset " +
                            std::to_string(i));
        }
        const int next = move(player, *d);
        if (next < 0 || !is_floor(next)) {
            throw PlanError("move " + std::to_string(i) + " walks into a wall");
        }
        const bool push = std::isupper(static_cast<unsigned char>(ch)) != 0;
        if (boxes[static_cast<std::size_t>(next)] != push) {
            throw PlanError("move " + std::to_string(i) + (push ? " pushes no box" : " walks into a box"));
        }
        if (push) {
            const int dest = move(next, *d);
            if (dest < 0 || !is_floor(dest) || boxes[static_cast<std::size_t>(dest)]) {
                throw PlanError("push " + std::to_string(i) + " is blocked");
            }
            boxes[static_cast<std::size_t>(next)] = 0;
            boxes[static_cast<std::size_t>(dest)] = 1;
            pushes.push_back(Action{*d, next});
        }
        player = next;
    }
    return pushes;
}

Instance parse_xsb(std::string_view text, std::string id) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = end + 1;
    }
    std::size_t first = 0;
    while (first < lines.size() && lines[first].find_first_not_of(" -_") == std::string::npos) ++first;
    std::size_t last = lines.size();
    while (last > first && lines[last - 1].find_first_not_of(" -_") == std::string::npos) --last;
    if (first == last) throw ParseError("sokoban: empty level", 1, 1);

    const int rows = static_cast<int>(last - first);
    int cols = 0;
    for (std::size_t i = first; i < last; ++i) cols = std::max(cols, static_cast<int>(lines[i].size()));

    const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::vector<Square> squares(n, Square::floor);
    std::vector<bool> goals(n, false);
    std::vector<int> box_cells;
    int player = -1;
    int player_line = 0;
    int player_col = 0;
    for (int r = 0; r < rows; ++r) {
        const std::string& line = lines[first + static_cast<std::size_t>(r)];
        for (int c = 0; c < cols; ++c) {
            const char ch = c < static_cast<int>(line.size()) ? line[static_cast<std::size_t>(c)] : ' ';
            const int line_no = static_cast<int>(first) + r + 1;
            if (!is_board_char(ch)) {
                throw ParseError(std::string("sokoban: unexpected character '") + ch + "'", line_no, c + 1);
            }
            const int cell = r * cols + c;
            const auto i = static_cast<std::size_t>(cell);
            if (ch == '#') squares[i] = Square::wall;
            if (ch == '.' || ch == '*' || ch == '+') goals[i] = true;
            if (ch == '$' || ch == '*') box_cells.push_back(cell);
            if (ch == '@' || ch == '+') {
                if (player >= 0) {
                    throw ParseError("sokoban: more than one player (first at line " +
                                         std::to_string(player_line) + ", column " +
                                         std::to_string(player_col) + ")",
                                     line_no, c + 1);
                }
                player = cell;
                player_line = line_no;
                player_col = c + 1;
            }
        }
    }
    if (player < 0) throw ParseError("sokoban: no player", static_cast<int>(first) + 1, 1);
    const auto goal_count = static_cast<std::size_t>(std::count(goals.begin(), goals.end(), true));
    if (box_cells.size() != goal_count) {
        throw ParseError("sokoban: " + std::to_string(box_cells.size()) + " boxes but " +
                             std::to_string(goal_count) + " goals",
                         static_cast<int>(first) + 1, 1);
    }

    // Everything the player cannot reach through non-wall squares is outside.
    std::vector<bool> inside(n, false);
    std::vector<int> stack{player};
    inside[static_cast<std::size_t>(player)] = true;
    while (!stack.empty()) {
        const int cell = stack.back();
        stack.pop_back();
        const int r = cell / cols;
        const int c = cell % cols;
        for (int k = 0; k < 4; ++k) {
            const int nr = r + kRowStep[k];
            const int nc = c + kColStep[k];
            if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
            const auto ni = static_cast<std::size_t>(nr * cols + nc);
            if (inside[ni] || squares[ni] == Square::wall) continue;
            inside[ni] = true;
            stack.push_back(nr * cols + nc);
        }
    }
    // Walled-in boxes and goals stay on the board; they are simply never reachable.
    for (std::size_t i = 0; i < n; ++i) {
        const bool has_box =
            std::find(box_cells.begin(), box_cells.end(), static_cast<int>(i)) != box_cells.end();
        if (squares[i] == Square::floor && !inside[i] && !goals[i] && !has_box) squares[i] = Square::outside;
    }

    // Crop to the bounding box of the board proper.
    int top = rows, bottom = -1, left = cols, right = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (squares[i] == Square::outside) continue;
        const int r = static_cast<int>(i) / cols;
        const int c = static_cast<int>(i) % cols;
        top = std::min(top, r);
        bottom = std::max(bottom, r);
        left = std::min(left, c);
        right = std::max(right, c);
    }
    const int crop_rows = bottom - top + 1;
    const int crop_cols = right - left + 1;
    auto remap = [&](int cell) { return (cell / cols - top) * crop_cols + (cell % cols - left); };
    std::vector<Square> cropped(static_cast<std::size_t>(crop_rows) * static_cast<std::size_t>(crop_cols));
    std::vector<bool> cropped_goals(cropped.size(), false);
    for (std::size_t i = 0; i < n; ++i) {
        const int r = static_cast<int>(i) / cols;
        const int c = static_cast<int>(i) % cols;
        if (r < top || r > bottom || c < left || c > right) continue;
        const auto j = static_cast<std::size_t>(remap(static_cast<int>(i)));
        cropped[j] = squares[i];
        cropped_goals[j] = goals[i];
    }
    for (int& b : box_cells) b = remap(b);
    player = remap(player);

    auto rules = std::make_shared<SokobanRules>(crop_rows, crop_cols, std::move(cropped),
                                                std::move(cropped_goals), player);
    State start = rules->make_state(player, box_cells);
    rules->set_start(start);
    return Instance{std::move(id), std::move(start), std::move(rules)};
}

std::vector<Instance> parse_xsb_collection(std::string_view text, std::string_view id_prefix) {
    std::vector<Instance> out;
    std::string block;
    int block_start = 0;
    int line_no = 0;
    auto flush = [&] {
        if (block.find_first_not_of(" -_\n") != std::string::npos) {
            const std::string id = std::string(id_prefix) + ":" + std::to_string(out.size() + 1);
            try {
                out.push_back(parse_xsb(block, id));
            } catch (const ParseError& e) {
                throw ParseError(id + ": " + e.what(), block_start + e.line() - 1, e.column());
            }
        }
        block.clear();
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const bool board = !line.empty() && line.find('#') != std::string::npos &&
                           std::all_of(line.begin(), line.end(), is_board_char);
        if (board) {
            if (block.empty()) block_start = line_no;
            block += line;
            block.push_back('\n');
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string render_xsb(const Instance& inst) {
    const auto* rules = dynamic_cast<const SokobanRules*>(inst.rules.get());
    if (!rules) throw Error("render_xsb: not a Sokoban instance");
    return rules->render(inst.start, rules->player_origin());
}

}  // namespace gvp
