#include "gvp/state.hpp"

#include <sstream>

namespace gvp {
namespace {

std::uint64_t hash_values(std::span<const State::value_type> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ values.size();
    for (auto v : values) {
        h ^= static_cast<std::uint16_t>(v);
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

}  // namespace

State::State(std::vector<value_type> values) : values_(std::move(values)), hash_(hash_values(values_)) {}

State::State(std::initializer_list<value_type> values)
    : values_(values), hash_(hash_values(values_)) {}

std::string State::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) os << ' ';
        os << values_[i];
    }
    os << ']';
    return os.str();
}

}  // namespace gvp
