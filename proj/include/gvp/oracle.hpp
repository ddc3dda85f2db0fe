#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "gvp/domain.hpp"

namespace gvp {

enum class OracleSolver : std::uint8_t { breadth_first, ida_star };

std::string_view to_string(OracleSolver solver);

struct OracleResult {
    std::string instance_id;
    int optimal_length = 0;
    OracleSolver solver = OracleSolver::breadth_first;
    std::int64_t nodes = 0;
};

/// The oracle gave up: node cap reached.
class OracleLimitError : public Error {
public:
    using Error::Error;
};

/// Exact shortest plan length. N-puzzle: IDA* with the Manhattan distance.
/// Other domains: breadth-first search. `node_cap` bounds generated nodes
/// (IDA*: summed over all iterations). Throws Error when the instance has no
/// solution.
OracleResult oracle_optimal(const Instance& inst, std::int64_t node_cap = 50'000'000);

}  // namespace gvp
