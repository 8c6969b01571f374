#pragma once

// Random strategy trees and random monotone constraint systems, plus a naive
// Kleene iterator used as an independent oracle.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "incr/consys.hpp"

namespace incr::testing {

using Rng = std::mt19937_64;

/// Small finite value sets over 0..15 (with Top), suitable for exhaustive-ish
/// random testing.
dom::ValueSet random_set(Rng& rng);
AbstractValue random_value(Rng& rng);

/// {v + c | v in s, v + c <= 15}; monotone.
dom::ValueSet shift(const dom::ValueSet& s, std::int64_t c);

/// A random tree whose queries depend on previously answered values.
/// Unknowns are drawn from `pool`; contributions go to `targets`.
TreePtr random_tree(Rng& rng, const std::vector<UnknownId>& pool, const std::vector<UnknownId>& targets,
                    int depth);

struct RandomSystem {
  std::shared_ptr<TableSystem> sys;
  std::vector<UnknownId> unknowns;  // with right-hand sides; unknowns[0] is the query
  std::vector<UnknownId> globals;   // leaves receiving contributions
};

/// Monotone system with static query structure: each right-hand side reads a
/// fixed list of unknowns, may contribute to a global, and answers with a
/// monotone combination of what it read.
RandomSystem random_monotone_system(Rng& rng, std::size_t max_unknowns);

/// Least solution restricted to the unknowns reachable from the query,
/// computed by round-robin iteration from bottom.
struct OracleResult {
  std::map<UnknownId, AbstractValue> sigma;
  std::set<UnknownId> reached;
  std::size_t rounds = 0;
};
OracleResult kleene_oracle(const EqSys& sys, std::size_t max_rounds = 10000);

}  // namespace incr::testing
