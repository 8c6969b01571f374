#include "incr/tdsolver.hpp"

#include <pthread.h>

#include <exception>

namespace incr {

// ---------------------------------------------------------------------------
// SolverState

AbstractValue SolverState::value(const UnknownId& x) const {
  auto it = sigma.find(x);
  return it == sigma.end() ? AbstractValue() : it->second;
}

void SolverState::link_side(const UnknownId& x, const UnknownId& g) {
  side_dep[g].insert(x);
  side_infl[x].insert(g);
}

void SolverState::clear_sides_of(const UnknownId& x) {
  auto it = side_infl.find(x);
  if (it == side_infl.end()) return;
  for (const auto& g : it->second) {
    auto d = side_dep.find(g);
    if (d == side_dep.end()) continue;
    d->second.erase(x);
    if (d->second.empty()) side_dep.erase(d);
  }
  side_infl.erase(it);
}

void SolverState::erase(const UnknownId& x) { erase_all({x}); }

void SolverState::erase_all(const UnknownSet& xs) {
  if (xs.empty()) return;
  for (const auto& x : xs) {
    sigma.erase(x);
    infl.erase(x);
    stable.erase(x);
    called.erase(x);
    point.erase(x);
    superstable.erase(x);
    deps.erase(x);
    starts.erase(x);
    clear_sides_of(x);
    if (auto d = side_dep.find(x); d != side_dep.end()) {
      for (const auto& y : d->second) {
        auto s = side_infl.find(y);
        if (s == side_infl.end()) continue;
        s->second.erase(x);
        if (s->second.empty()) side_infl.erase(s);
      }
      side_dep.erase(d);
    }
  }
  for (auto& [_, ys] : infl) {
    for (const auto& x : xs) {
      if (ys.contains(x)) ys.erase(x);
    }
  }
  for (auto& [_, ys] : deps) {
    for (const auto& x : xs) ys.erase(x);
  }
}

// ---------------------------------------------------------------------------
// TdSolver

TdSolver::TdSolver(const EqSys& sys, SolverState& st, SolverOptions opts, RunStats* stats)
    : sys_(sys), st_(st), opts_(opts), stats_(stats ? stats : &own_stats_) {}

void TdSolver::seed_starts() {
  std::map<UnknownId, AbstractValue> current;
  for (const auto& [x, v] : sys_.starts()) {
    current[x] = current[x].join(v);
    auto& slot = st_.sigma[x];
    AbstractValue joined = slot.join(v);
    if (!(joined == slot)) {
      slot = joined;
      destabilize(x);
    }
  }
  st_.starts = std::move(current);
}

AbstractValue TdSolver::op(Phase p, const AbstractValue& old, const AbstractValue& tmp) const {
  if (p == Phase::Widen) return old.widen(tmp, opts_.widen);
  // Narrowing assumes a descending step; a value that grew is widened instead
  // so the stored value still covers the right-hand side.
  if (!tmp.leq(old)) return old.widen(tmp, opts_.widen);
  return old.narrow(tmp);
}

void TdSolver::solve(Phase p, const UnknownId& x) {
  if (st_.stable.count(x) || st_.called.count(x)) return;
  auto rhs = sys_.rhs(x, EvalMode::Solve);
  if (!rhs) throw SolverError("solve called on leaf unknown " + x.str());
  if (++depth_ > opts_.max_depth) {
    depth_ = 0;
    throw SolverError("recursion bound exceeded at " + x.str());
  }
  struct DepthGuard {
    std::size_t& d;
    ~DepthGuard() {
      if (d > 0) --d;
    }
  } guard{depth_};

  st_.stable.insert(x);
  st_.called.insert(x);
  st_.sigma.try_emplace(x);
  st_.clear_sides_of(x);
  st_.deps.erase(x);
  ++st_.counters.rhs_evals;
  ++stats_->rhs_evals;
  ++stats_->evals_of[x];

  AbstractValue tmp = run_tree(
      *rhs, [&](const UnknownId& y) { return eval(x, y); },
      [&](const UnknownId& g, const AbstractValue& d) { side(x, g, d); });
  st_.called.erase(x);

  const AbstractValue old = st_.value(x);
  try {
    if (st_.point.count(x)) {
      tmp = op(p, old, tmp);
    } else {
      (void)old.leq(tmp);  // surfaces domain mismatches of the result
    }
  } catch (const dom::DomainMismatch& e) {
    throw EvalError(x, e.what());
  }

  if (!st_.stable.count(x)) {
    solve(Phase::Widen, x);
  } else if (old == tmp) {
    if (p == Phase::Widen && st_.point.count(x)) {
      st_.stable.erase(x);
      solve(Phase::Narrow, x);
      if (opts_.localized_widening && st_.stable.count(x)) st_.point.erase(x);
    }
  } else {
    st_.sigma[x] = tmp;
    destabilize(x);
    solve(p, x);
  }
}

AbstractValue TdSolver::eval(const UnknownId& x, const UnknownId& y) {
  const bool leaf = sys_.is_leaf(y);
  if (leaf || st_.called.count(y)) {
    if (!leaf && opts_.restart_wpoint && !st_.point.count(y)) {
      auto& n = restarts_[y];
      if (n < opts_.max_restarts_per_unknown) {
        ++n;
        ++stats_->wpoint_restarts;
        st_.point.insert(y);
        st_.sigma[y] = AbstractValue();
        destabilize(y);
      } else if (n == opts_.max_restarts_per_unknown) {
        ++n;
        stats_->diagnostics.push_back("widening-point restart bound reached at " + y.str());
      }
    }
    st_.point.insert(y);
  } else {
    solve(Phase::Widen, y);
  }
  st_.infl[y].insert(x);
  st_.deps[x].insert(y);
  return st_.value(y);
}

void TdSolver::side(const UnknownId& x, const UnknownId& g, const AbstractValue& d) {
  st_.link_side(x, g);
  // Write-only collectors only receive contributions during postprocessing.
  if (g.is_write_only()) return;
  const AbstractValue old = st_.value(g);
  AbstractValue tmp;
  try {
    tmp = old.widen(d, opts_.widen);
  } catch (const dom::DomainMismatch& e) {
    throw EvalError(g, std::string("contribution from ") + x.str() + ": " + e.what());
  }
  if (!(tmp == old)) {
    st_.sigma[g] = tmp;
    st_.stable.insert(g);
    destabilize(g);
  }
}

void TdSolver::destabilize(const UnknownId& x) {
  auto it = st_.infl.find(x);
  if (it == st_.infl.end() || it->second.empty()) return;
  std::vector<UnknownId> w = it->second.items();
  it->second.clear();
  for (const auto& y : w) {
    ++st_.counters.destabilizations;
    ++stats_->destabilizations;
    st_.stable.erase(y);
    st_.superstable.erase(y);
    if (!st_.called.count(y)) destabilize(y);
  }
}

// ---------------------------------------------------------------------------

namespace {
struct StackJob {
  const std::function<void()>* f;
  std::exception_ptr err;
};

void* stack_trampoline(void* arg) {
  auto* job = static_cast<StackJob*>(arg);
  try {
    (*job->f)();
  } catch (...) {
    job->err = std::current_exception();
  }
  return nullptr;
}
}  // namespace

void with_large_stack(const std::function<void()>& f) {
  constexpr std::size_t kStack = std::size_t{1} << 30;
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kStack);
  StackJob job{&f, nullptr};
  pthread_t th;
  int rc = pthread_create(&th, &attr, stack_trampoline, &job);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    f();  // fall back to the current stack
    return;
  }
  pthread_join(th, nullptr);
  if (job.err) std::rethrow_exception(job.err);
}

SolverState run(const EqSys& sys, SolverState st, const SolverOptions& opts, RunStats* stats) {
  with_large_stack([&] {
    TdSolver solver(sys, st, opts, stats);
    solver.seed_starts();
    solver.solve(Phase::Widen, sys.query());
  });
  return st;
}

std::vector<Violation> verify_solution(const EqSys& sys, const SolverState& st) {
  std::vector<Violation> out;
  const GetFn lookup = [&](const UnknownId& y) { return st.value(y); };
  for (const auto& x : st.stable) {
    auto rhs = sys.rhs(x, EvalMode::Solve);
    if (!rhs) continue;
    EvalState es;
    AbstractValue v;
    try {
      std::tie(es, v) = eval_tree(*rhs, lookup);
    } catch (const std::exception& e) {
      out.push_back({x, std::string("evaluation failed: ") + e.what()});
      continue;
    }
    try {
      if (!v.leq(st.value(x))) {
        out.push_back({x, "rhs " + v.str() + " not below " + st.value(x).str()});
      }
      for (const auto& [y, d] : es.sides) {
        if (y.is_write_only()) continue;
        if (!d.leq(st.value(y))) {
          out.push_back({x, "contribution " + d.str() + " to " + y.str() + " not below " +
                                st.value(y).str()});
        }
      }
    } catch (const dom::DomainMismatch& e) {
      out.push_back({x, e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {
Json set_json(const UnknownSet& s) {
  Json a = Json::array();
  for (const auto& x : s) a.push_back(to_json(x));
  return a;
}

UnknownSet set_from(const Json& j) {
  UnknownSet s;
  for (const auto& x : j) s.insert(unknown_from_json(x));
  return s;
}

Json relation_json(const Relation& r) {
  Json a = Json::array();
  for (const auto& [k, v] : r) {
    if (!v.empty()) a.push_back(Json::array({to_json(k), set_json(v)}));
  }
  return a;
}

Relation relation_from(const Json& j) {
  Relation r;
  for (const auto& e : j) r[unknown_from_json(e.at(0))] = set_from(e.at(1));
  return r;
}

Json values_json(const std::map<UnknownId, AbstractValue>& m) {
  Json a = Json::array();
  for (const auto& [k, v] : m) a.push_back(Json::array({to_json(k), dom::to_json(v)}));
  return a;
}

std::map<UnknownId, AbstractValue> values_from(const Json& j) {
  std::map<UnknownId, AbstractValue> m;
  for (const auto& e : j) m[unknown_from_json(e.at(0))] = dom::value_from_json(e.at(1));
  return m;
}
}  // namespace

Json to_json(const SolverState& st) {
  Json infl = Json::array();
  for (const auto& [k, v] : st.infl) {
    if (v.empty()) continue;
    Json ys = Json::array();
    for (const auto& y : v) ys.push_back(to_json(y));
    infl.push_back(Json::array({to_json(k), ys}));
  }
  return Json{{"format", 1},
              {"sigma", values_json(st.sigma)},
              {"infl", infl},
              {"stable", set_json(st.stable)},
              {"point", set_json(st.point)},
              {"side_dep", relation_json(st.side_dep)},
              {"side_infl", relation_json(st.side_infl)},
              {"deps", relation_json(st.deps)},
              {"starts", values_json(st.starts)},
              {"counters",
               {{"rhs_evals", st.counters.rhs_evals},
                {"destabilizations", st.counters.destabilizations}}}};
}

SolverState state_from_json(const Json& j) {
  if (j.value("format", 0) != 1) throw std::invalid_argument("unsupported solver state format");
  SolverState st;
  st.sigma = values_from(j.at("sigma"));
  for (const auto& e : j.at("infl")) {
    auto& ys = st.infl[unknown_from_json(e.at(0))];
    for (const auto& y : e.at(1)) ys.insert(unknown_from_json(y));
  }
  st.stable = set_from(j.at("stable"));
  st.point = set_from(j.at("point"));
  st.side_dep = relation_from(j.at("side_dep"));
  st.side_infl = relation_from(j.at("side_infl"));
  st.deps = relation_from(j.value("deps", Json::array()));
  st.starts = values_from(j.at("starts"));
  const auto& c = j.at("counters");
  st.counters.rhs_evals = c.at("rhs_evals").get<std::uint64_t>();
  st.counters.destabilizations = c.at("destabilizations").get<std::uint64_t>();
  return st;
}

}  // namespace incr
