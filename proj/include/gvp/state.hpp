#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Canonical, hashable encoding of one domain configuration.
///
/// The meaning of the values is owned by the domain rules: grid stores
/// (row, col), N-puzzle stores the tile at every cell, Sokoban stores the
/// normalized player cell followed by the sorted box cells. Two states
/// compare equal iff their value sequences are equal; the hash is computed
/// once on construction and is stable across runs and platforms.
class State {
public:
    using value_type = std::int16_t;

    State() = default;
    explicit State(std::vector<value_type> values);
    State(std::initializer_list<value_type> values);

    std::span<const value_type> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    value_type operator[](std::size_t i) const { return values_[i]; }
    bool empty() const noexcept { return values_.empty(); }

    std::uint64_t hash() const noexcept { return hash_; }

    friend bool operator==(const State& a, const State& b) noexcept {
        return a.hash_ == b.hash_ && a.values_ == b.values_;
    }

    std::string to_string() const;

private:
    std::vector<value_type> values_;
    std::uint64_t hash_ = 0;
};

struct StateHash {
    std::size_t operator()(const State& s) const noexcept { return static_cast<std::size_t>(s.hash()); }
};

/// 64-bit finalizer (splitmix64); used for hashing and seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace gvp
