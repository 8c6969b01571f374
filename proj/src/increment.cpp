#include "incr/increment.hpp"

#include <algorithm>
#include <deque>

namespace incr {

using minic::FunctionCfg;
using minic::NodeIds;
using minic::Program;

Json ChangeSet::to_json() const {
  auto arr = [](const std::set<std::string>& s) { return Json(std::vector<std::string>(s.begin(), s.end())); };
  return Json{{"changed", arr(changed)},
              {"header_changed", arr(header_changed)},
              {"added", arr(added)},
              {"removed", arr(removed)},
              {"unchanged", arr(unchanged)}};
}

ChangeSet detect_changes(const Program& old_prog, const Program& new_prog) {
  ChangeSet cs;
  for (const auto& f : old_prog.functions) {
    const auto* g = new_prog.find(f.name);
    if (!g) {
      cs.removed.insert(f.name);
    } else if (minic::canonical_header(f) != minic::canonical_header(*g)) {
      cs.header_changed.insert(f.name);
    } else if (minic::canonical_body(f) != minic::canonical_body(*g)) {
      cs.changed.insert(f.name);
    } else {
      cs.unchanged.insert(f.name);
    }
  }
  for (const auto& g : new_prog.functions)
    if (!old_prog.find(g.name)) cs.added.insert(g.name);
  if (minic::canonical_globals(old_prog) != minic::canonical_globals(new_prog))
    cs.changed.insert(kInitFn);
  else
    cs.unchanged.insert(kInitFn);
  cs.unchanged.insert(kHarnessFn);
  return cs;
}

NodeIds relabel_nodes(const ChangeSet& changes, const NodeIds& old_ids, const Program& new_prog,
                      const std::map<std::string, FunctionCfg>& new_cfgs) {
  NodeIds out;
  out.next = old_ids.next;
  for (const auto& f : new_prog.functions) {
    const auto& cfg = new_cfgs.at(f.name);
    auto old = old_ids.ids.find(f.name);
    std::vector<std::uint32_t> v(cfg.num_nodes);
    if (changes.unchanged.count(f.name) && old != old_ids.ids.end() &&
        old->second.size() == cfg.num_nodes) {
      v = old->second;
    } else if (old != old_ids.ids.end() && !changes.added.count(f.name)) {
      for (std::uint32_t i = 0; i < cfg.num_nodes; ++i) {
        if (i == cfg.entry) v[i] = old->second.front();
        else if (i == cfg.ret) v[i] = old->second.back();
        else v[i] = out.next++;
      }
    } else {
      for (std::uint32_t i = 0; i < cfg.num_nodes; ++i) v[i] = out.next++;
    }
    out.ids[f.name] = std::move(v);
  }
  return out;
}

Layout layout_of(const NodeIds& ids) {
  Layout out;
  for (const auto& [fn, v] : ids.ids) {
    FunctionLayout l;
    l.entry = v.front();
    l.ret = v.back();
    l.nodes.insert(v.begin(), v.end());
    out[fn] = std::move(l);
  }
  return out;
}

namespace {

bool is_node_of(const UnknownId& x, const std::string& fn) {
  return x.kind() == UnknownKind::Node && x.name() == fn;
}

/// Every Node unknown of `fn` mentioned as a key anywhere in the state.
UnknownSet node_unknowns(const std::string& fn, const SolverState& st) {
  UnknownSet out;
  auto scan = [&](const auto& m) {
    for (const auto& kv : m)
      if (is_node_of(kv.first, fn)) out.insert(kv.first);
  };
  scan(st.sigma);
  scan(st.infl);
  scan(st.side_dep);
  scan(st.side_infl);
  scan(st.deps);
  for (const auto& x : st.stable)
    if (is_node_of(x, fn)) out.insert(x);
  return out;
}

void unstable(SolverState& st, const UnknownId& x) {
  st.stable.erase(x);
  st.superstable.erase(x);
}

/// Erases node unknowns of modified functions whose nodes no longer exist.
void drop_obsolete_nodes(const ChangeSet& changes, const Layout& new_layout, SolverState& st) {
  UnknownSet gone;
  auto collect = [&](const std::string& fn) {
    auto nl = new_layout.find(fn);
    for (const auto& x : node_unknowns(fn, st))
      if (nl == new_layout.end() || !nl->second.nodes.count(x.node_id())) gone.insert(x);
  };
  for (const auto& fn : changes.changed) collect(fn);
  for (const auto& fn : changes.header_changed) collect(fn);
  for (const auto& fn : changes.removed) collect(fn);
  st.erase_all(gone);
}

void destabilize_returns(const std::string& fn, const Layout& old_layout, SolverState& st,
                         TdSolver& solver) {
  for (const auto& r : return_unknowns(fn, old_layout, st)) {
    unstable(st, r);
    solver.destabilize(r);
  }
}

}  // namespace

UnknownSet return_unknowns(const std::string& fn, const Layout& layout, const SolverState& st) {
  if (fn == kInitFn) return {UnknownId::init()};
  if (fn == kHarnessFn) return {UnknownId::harness()};
  auto it = layout.find(fn);
  if (it == layout.end()) return {};
  UnknownSet out;
  for (const auto& x : node_unknowns(fn, st))
    if (x.node_id() == it->second.entry) out.insert(UnknownId::node(fn, it->second.ret, x.ctx()));
  return out;
}

UnknownSet select_restart_globals(const ChangeSet& changes, const Layout& old_layout,
                                  const SolverState& st) {
  UnknownSet out;
  auto from = [&](const UnknownId& x) {
    auto it = st.side_infl.find(x);
    if (it == st.side_infl.end()) return;
    for (const auto& g : it->second)
      if (g.is_flow_insensitive()) out.insert(g);
  };
  auto scan_fn = [&](const std::string& fn) {
    if (fn == kInitFn) {
      from(UnknownId::init());
      return;
    }
    if (!old_layout.count(fn)) return;
    for (const auto& x : node_unknowns(fn, st)) from(x);
  };
  for (const auto& fn : changes.changed) scan_fn(fn);
  for (const auto& fn : changes.header_changed) scan_fn(fn);
  for (const auto& fn : changes.removed) scan_fn(fn);
  return out;
}

void prepare_plain(const ChangeSet& changes, const Layout& old_layout, const Layout& new_layout,
                   SolverState& st, TdSolver& solver) {
  for (const auto& fn : changes.changed) destabilize_returns(fn, old_layout, st, solver);
  for (const auto& fn : changes.header_changed) destabilize_returns(fn, old_layout, st, solver);
  for (const auto& fn : changes.removed) destabilize_returns(fn, old_layout, st, solver);
  drop_obsolete_nodes(changes, new_layout, st);
}

UnknownSet prepare_reluctant(const ChangeSet& changes, const Layout& old_layout,
                             const Layout& new_layout, SolverState& st, TdSolver& solver) {
  UnknownSet a;
  for (const auto& fn : changes.changed) {
    for (const auto& r : return_unknowns(fn, old_layout, st)) {
      unstable(st, r);
      a.insert(r);
    }
  }
  for (const auto& fn : changes.header_changed) destabilize_returns(fn, old_layout, st, solver);
  for (const auto& fn : changes.removed) destabilize_returns(fn, old_layout, st, solver);
  drop_obsolete_nodes(changes, new_layout, st);
  return a;
}

void restart_globals(const UnknownSet& globals, SolverState& st, TdSolver& solver) {
  for (const auto& g : globals) {
    st.sigma.erase(g);
    solver.destabilize(g);
    UnknownSet contributors;
    if (auto it = st.side_dep.find(g); it != st.side_dep.end()) contributors = it->second;
    for (const auto& x : contributors) {
      unstable(st, x);
      solver.destabilize(x);
      if (auto si = st.side_infl.find(x); si != st.side_infl.end()) {
        si->second.erase(g);
        if (si->second.empty()) st.side_infl.erase(si);
      }
    }
    st.side_dep.erase(g);
  }
}

void drop_obsolete_starts(const EqSys& sys, SolverState& st, TdSolver& solver) {
  std::set<UnknownId> current;
  for (const auto& [x, v] : sys.starts()) current.insert(x);
  for (auto it = st.starts.begin(); it != st.starts.end();) {
    if (current.count(it->first)) {
      ++it;
      continue;
    }
    unstable(st, it->first);
    solver.destabilize(it->first);
    it = st.starts.erase(it);
  }
}

void prune(const EqSys& sys, SolverState& st) {
  UnknownSet reach;
  std::deque<UnknownId> work;
  auto visit = [&](const UnknownId& x) {
    if (reach.insert(x).second) work.push_back(x);
  };
  visit(sys.query());
  for (const auto& [x, v] : st.starts) visit(x);
  while (!work.empty()) {
    UnknownId x = work.front();
    work.pop_front();
    if (auto it = st.deps.find(x); it != st.deps.end())
      for (const auto& y : it->second) visit(y);
    if (auto it = st.side_infl.find(x); it != st.side_infl.end())
      for (const auto& y : it->second) visit(y);
  }
  UnknownSet all;
  auto keys = [&](const auto& m) {
    for (const auto& kv : m) all.insert(kv.first);
  };
  keys(st.sigma);
  keys(st.infl);
  keys(st.side_dep);
  keys(st.side_infl);
  keys(st.deps);
  all.insert(st.stable.begin(), st.stable.end());
  all.insert(st.point.begin(), st.point.end());
  all.insert(st.superstable.begin(), st.superstable.end());
  UnknownSet drop;
  std::set_difference(all.begin(), all.end(), reach.begin(), reach.end(),
                      std::inserter(drop, drop.end()));
  st.erase_all(drop);
}

Reanalysis::Reanalysis(const EqSys& sys, SolverState& st, ChangeSet changes, Layout old_layout,
                       Layout new_layout, ReanalyzeOptions opts, SolverOptions solver_opts)
    : sys_(sys),
      st_(st),
      changes_(std::move(changes)),
      old_(std::move(old_layout)),
      new_(std::move(new_layout)),
      opts_(std::move(opts)),
      solver_(sys, st, solver_opts, &stats_) {}

void Reanalysis::step(const std::function<void()>& f) {
  RunStats before = stats_;
  with_large_stack(f);
  step_ = RunStats{};
  step_.rhs_evals = stats_.rhs_evals - before.rhs_evals;
  step_.destabilizations = stats_.destabilizations - before.destabilizations;
  step_.wpoint_restarts = stats_.wpoint_restarts - before.wpoint_restarts;
  for (const auto& [x, n] : stats_.evals_of) {
    auto d = n - before.evals(x);
    if (d) step_.evals_of[x] = d;
  }
  for (std::size_t i = before.diagnostics.size(); i < stats_.diagnostics.size(); ++i)
    step_.diagnostics.push_back(stats_.diagnostics[i]);
}

void Reanalysis::prepare() {
  step([&] {
    st_.superstable = st_.stable;
    st_.called.clear();
    switch (opts_.restart) {
      case RestartPolicy::Off: break;
      case RestartPolicy::Minimal: restarted_ = select_restart_globals(changes_, old_, st_); break;
      case RestartPolicy::Explicit: restarted_ = opts_.explicit_globals; break;
    }
    // Restarting goes first: the obsolete unknowns that contributed to a
    // restarted global still carry the influence edges to propagate along.
    restart_globals(restarted_, st_, solver_);
    if (opts_.mode == ReanalyzeMode::Plain)
      prepare_plain(changes_, old_, new_, st_, solver_);
    else
      returns_ = prepare_reluctant(changes_, old_, new_, st_, solver_);
    drop_obsolete_starts(sys_, st_, solver_);
    solver_.seed_starts();
  });
}

void Reanalysis::solve_changed() {
  step([&] {
    for (const auto& a : returns_)
      if (sys_.has_rhs(a)) solver_.solve(Phase::Widen, a);
  });
}

void Reanalysis::solve_query() {
  step([&] { solver_.solve(Phase::Widen, sys_.query()); });
}

void Reanalysis::run() {
  prepare();
  solve_changed();
  solve_query();
}

}  // namespace incr
