#pragma once

// Reanalysis between two program versions: change detection, node
// relabeling, plain and reluctant destabilization, restarting of globals,
// obsolete starts, and pruning.

#include <map>
#include <set>
#include <string>

#include "incr/minic/ast.hpp"
#include "incr/minic/cfg.hpp"
#include "incr/tdsolver.hpp"

namespace incr {

/// Pseudo-function names: global initialization and the harness.
inline constexpr const char* kInitFn = "init";
inline constexpr const char* kHarnessFn = "__main";

struct ChangeSet {
  std::set<std::string> changed;  // body changed, header unchanged
  std::set<std::string> header_changed;
  std::set<std::string> added;
  std::set<std::string> removed;
  std::set<std::string> unchanged;

  bool any() const { return !changed.empty() || !header_changed.empty() || !added.empty() || !removed.empty(); }
  Json to_json() const;
};

ChangeSet detect_changes(const minic::Program& old_prog, const minic::Program& new_prog);

/// Node identities for the new version: unchanged functions keep all ids,
/// changed ones keep entry and return ids, everything else is fresh.
minic::NodeIds relabel_nodes(const ChangeSet& changes, const minic::NodeIds& old_ids,
                             const minic::Program& new_prog,
                             const std::map<std::string, minic::FunctionCfg>& new_cfgs);

struct FunctionLayout {
  std::uint32_t entry = 0;
  std::uint32_t ret = 0;
  std::set<std::uint32_t> nodes;
};
using Layout = std::map<std::string, FunctionLayout>;
Layout layout_of(const minic::NodeIds& ids);

/// Return unknowns of `fn` in every context recorded in the state. For the
/// pseudo-function "init" this is the initialization unknown.
UnknownSet return_unknowns(const std::string& fn, const Layout& layout, const SolverState& st);

/// Globals that the old version of modified functions contributed to.
UnknownSet select_restart_globals(const ChangeSet& changes, const Layout& old_layout,
                                  const SolverState& st);

/// Destabilizes the return unknowns of every modified function and drops the
/// unknowns of nodes that no longer exist.
void prepare_plain(const ChangeSet& changes, const Layout& old_layout, const Layout& new_layout,
                   SolverState& st, TdSolver& solver);

/// Like prepare_plain, but body-changed functions only lose the stability of
/// their return unknowns; these are returned for solving before the query.
UnknownSet prepare_reluctant(const ChangeSet& changes, const Layout& old_layout,
                             const Layout& new_layout, SolverState& st, TdSolver& solver);

void restart_globals(const UnknownSet& globals, SolverState& st, TdSolver& solver);

/// Destabilizes and removes start unknowns of the previous run that the
/// system no longer declares.
void drop_obsolete_starts(const EqSys& sys, SolverState& st, TdSolver& solver);

/// Keeps only unknowns reachable from the query (or a start) through the
/// recorded queries and contributions.
void prune(const EqSys& sys, SolverState& st);

enum class ReanalyzeMode { Plain, Reluctant };
enum class RestartPolicy { Off, Minimal, Explicit };

struct ReanalyzeOptions {
  ReanalyzeMode mode = ReanalyzeMode::Reluctant;
  RestartPolicy restart = RestartPolicy::Minimal;
  UnknownSet explicit_globals;  // used with RestartPolicy::Explicit
};

/// The incremental run, split into its observable steps.
class Reanalysis {
 public:
  Reanalysis(const EqSys& sys, SolverState& st, ChangeSet changes, Layout old_layout,
             Layout new_layout, ReanalyzeOptions opts, SolverOptions solver_opts);

  /// Restart selection, destabilization, restarting, and start handling.
  void prepare();
  /// Solves the return unknowns collected by reluctant preparation.
  void solve_changed();
  /// Solves the query.
  void solve_query();
  void run();

  const UnknownSet& changed_returns() const { return returns_; }
  const UnknownSet& restarted() const { return restarted_; }
  const RunStats& stats() const { return stats_; }
  /// Evaluations performed by the most recent step.
  const RunStats& step_stats() const { return step_; }

 private:
  void step(const std::function<void()>& f);

  const EqSys& sys_;
  SolverState& st_;
  ChangeSet changes_;
  Layout old_;
  Layout new_;
  ReanalyzeOptions opts_;
  RunStats stats_;
  RunStats step_;
  TdSolver solver_;
  UnknownSet returns_;
  UnknownSet restarted_;
};

}  // namespace incr
