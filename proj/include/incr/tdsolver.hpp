#pragma once

// Top-down local solver for side-effecting constraint systems.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "incr/consys.hpp"
#include "incr/ordered_set.hpp"

namespace incr {

enum class Phase { Widen, Narrow };

using UnknownSet = std::set<UnknownId>;
using Relation = std::map<UnknownId, UnknownSet>;

struct SolverOptions {
  bool restart_wpoint = false;
  bool localized_widening = false;
  dom::WidenConfig widen;
  std::size_t max_restarts_per_unknown = 32;
  std::size_t max_depth = 200000;
};

struct Counters {
  std::uint64_t rhs_evals = 0;
  std::uint64_t destabilizations = 0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

struct SolverState {
  std::map<UnknownId, AbstractValue> sigma;
  std::map<UnknownId, OrderedSet<UnknownId>> infl;
  UnknownSet stable;
  UnknownSet called;
  UnknownSet point;
  Relation side_dep;   // g -> unknowns whose last evaluation contributed to g
  Relation side_infl;  // x -> unknowns x contributed to in its last evaluation
  Relation deps;       // x -> unknowns queried by x's last evaluation
  UnknownSet superstable;
  std::map<UnknownId, AbstractValue> starts;  // start values seeded by the last run
  Counters counters;

  AbstractValue value(const UnknownId& x) const;
  /// Drops x from every table, including occurrences inside other entries.
  void erase(const UnknownId& x);
  void erase_all(const UnknownSet& xs);
  /// Records (x contributed to g) in both directions.
  void link_side(const UnknownId& x, const UnknownId& g);
  /// Forgets everything x contributed to in its previous evaluation.
  void clear_sides_of(const UnknownId& x);
};

/// Per-run instrumentation.
struct RunStats {
  std::uint64_t rhs_evals = 0;
  std::uint64_t destabilizations = 0;
  std::uint64_t wpoint_restarts = 0;
  std::map<UnknownId, std::uint64_t> evals_of;
  std::vector<std::string> diagnostics;

  std::uint64_t evals(const UnknownId& x) const {
    auto it = evals_of.find(x);
    return it == evals_of.end() ? 0 : it->second;
  }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One solver instance working on a borrowed state. The public operations are
/// the listing's solve/eval/side/destabilize; callers driving incremental
/// phases use them directly.
class TdSolver {
 public:
  TdSolver(const EqSys& sys, SolverState& st, SolverOptions opts, RunStats* stats = nullptr);

  /// Joins each start value of the system into sigma.
  void seed_starts();
  void solve(Phase p, const UnknownId& x);
  AbstractValue eval(const UnknownId& x, const UnknownId& y);
  void side(const UnknownId& x, const UnknownId& g, const AbstractValue& d);
  void destabilize(const UnknownId& x);

  const RunStats& stats() const { return *stats_; }

 private:
  AbstractValue op(Phase p, const AbstractValue& old, const AbstractValue& tmp) const;

  const EqSys& sys_;
  SolverState& st_;
  SolverOptions opts_;
  RunStats own_stats_;
  RunStats* stats_;
  std::map<UnknownId, std::size_t> restarts_;
  std::size_t depth_ = 0;
};

/// Runs `f` on a thread with a large stack; exceptions are rethrown here.
void with_large_stack(const std::function<void()>& f);

/// Seeds starts and solves the query from the given state.
SolverState run(const EqSys& sys, SolverState st, const SolverOptions& opts,
                RunStats* stats = nullptr);

struct Violation {
  UnknownId at;
  std::string what;
};

/// Checks the partial post-solution property over stable unknowns.
std::vector<Violation> verify_solution(const EqSys& sys, const SolverState& st);

Json to_json(const SolverState& st);
SolverState state_from_json(const Json& j);

}  // namespace incr
