#include <doctest.h>

#include "fixtures.hpp"
#include "incr/tdsolver.hpp"
#include "random_systems.hpp"

using namespace incr;
using namespace incr::testing;
using dom::AddressSet;
using dom::Env;
using dom::LocalState;
using dom::Lockset;
using dom::Scalar;
using dom::ValueSet;

namespace {

AbstractValue vs(std::vector<std::int64_t> v) { return AbstractValue(ValueSet::of(std::move(v))); }

AbstractValue local(std::vector<std::pair<std::string, Scalar>> vars) {
  Env e;
  for (auto& [x, v] : vars) e = e.set(x, v);
  return AbstractValue(LocalState(e, Lockset()));
}

Scalar ints(std::vector<std::int64_t> v) { return Scalar(ValueSet::of(std::move(v))); }
Scalar addrs(std::vector<std::string> v) { return Scalar(AddressSet::of(std::move(v))); }

struct Solved {
  Frontend fe;
  SolverState st;
  RunStats stats;
};

Solved solve_thread_example(int c = 1) {
  Solved s{frontend(thread_example(c)), {}, {}};
  s.st = run(*s.fe.sys, {}, {}, &s.stats);
  return s;
}

Relation infl_relation(const SolverState& st) {
  Relation r;
  for (const auto& [x, ys] : st.infl)
    if (!ys.empty()) r[x] = ys.as_set();
  return r;
}

Relation nonempty(const Relation& rel) {
  Relation r;
  for (const auto& [x, ys] : rel)
    if (!ys.empty()) r[x] = ys;
  return r;
}

bool sides_inverse(const SolverState& st) {
  for (const auto& [g, xs] : st.side_dep)
    for (const auto& x : xs)
      if (!st.side_infl.count(x) || !st.side_infl.at(x).count(g)) return false;
  for (const auto& [x, gs] : st.side_infl)
    for (const auto& g : gs)
      if (!st.side_dep.count(g) || !st.side_dep.at(g).count(x)) return false;
  return true;
}

UnknownSet keys(const std::map<UnknownId, AbstractValue>& m) {
  UnknownSet s;
  for (const auto& [k, _] : m) s.insert(k);
  return s;
}

}  // namespace

TEST_SUITE("tdsolver") {
  TEST_CASE("thread example values from scratch") {
    auto s = solve_thread_example();
    const auto& sig = s.st.sigma;
    CHECK(sig.at(UnknownId::global("g")) == global_set({0, 1}));
    CHECK(sig.at(foo_at(0)) == local({{"p", addrs({"g"})}, {"ret", Scalar::top()}}));
    CHECK(sig.at(foo_at(1)) == local({{"p", addrs({"g"})}, {"ret", Scalar::top()}}));
    CHECK(sig.at(foo_at(2)) == local({{"p", addrs({"g"})}, {"ret", addrs({"null"})}}));
    CHECK(sig.at(main_at(3)) == local({{"ret", Scalar::top()}}));
    CHECK(sig.at(main_at(4)) == local({{"ret", Scalar::top()}}));
    CHECK(sig.at(main_at(5)) == local({{"ret", ints({0, 1})}}));

    UnknownSet nodes;
    for (const auto& x : keys(sig))
      if (x.kind() == UnknownKind::Node) nodes.insert(x);
    CHECK(nodes == UnknownSet{foo_at(0), foo_at(1), foo_at(2), main_at(3), main_at(4), main_at(5)});
    CHECK(keys(sig) == [&] {
      auto all = nodes;
      all.insert({UnknownId::global("g"), UnknownId::init(), UnknownId::harness()});
      return all;
    }());
    for (const auto& x : keys(sig)) CHECK(s.st.stable.count(x));
    CHECK(s.st.called.empty());
    CHECK(verify_solution(*s.fe.sys, s.st).empty());
  }

  TEST_CASE("thread example dependency tables") {
    auto s = solve_thread_example();
    auto g = UnknownId::global("g");
    auto init = UnknownId::init(), harness = UnknownId::harness();
    CHECK(infl_relation(s.st) == Relation{
                                     {init, {harness}},
                                     {g, {main_at(5)}},
                                     {foo_at(0), {foo_at(1)}},
                                     {foo_at(1), {foo_at(2)}},
                                     {foo_at(2), {main_at(4)}},
                                     {main_at(3), {main_at(4)}},
                                     {main_at(4), {main_at(5)}},
                                     {main_at(5), {harness}},
                                 });
    CHECK(nonempty(s.st.side_dep) == Relation{
                                         {g, {init, foo_at(1)}},
                                         {foo_at(0), {main_at(4)}},
                                         {main_at(3), {harness}},
                                     });
    CHECK(nonempty(s.st.side_infl) == Relation{
                                          {init, {g}},
                                          {foo_at(1), {g}},
                                          {main_at(4), {foo_at(0)}},
                                          {harness, {main_at(3)}},
                                      });
  }

  TEST_CASE("solving a stable unknown does nothing") {
    auto s = solve_thread_example();
    auto before = s.st;
    RunStats stats;
    TdSolver solver(*s.fe.sys, s.st, {}, &stats);
    solver.solve(Phase::Widen, main_at(5));
    CHECK(stats.rhs_evals == 0);
    CHECK(s.st.sigma == before.sigma);
    CHECK(s.st.stable == before.stable);
  }

  TEST_CASE("a second run evaluates nothing") {
    auto s = solve_thread_example();
    RunStats again;
    auto st2 = run(*s.fe.sys, s.st, {}, &again);
    CHECK(again.rhs_evals == 0);
    CHECK(st2.sigma == s.st.sigma);
  }

  TEST_CASE("a constant query takes one evaluation") {
    auto q = UnknownId::var("q");
    TableSystem sys(q);
    sys.define(q, ans(vs({4})));
    RunStats stats;
    auto st = run(sys, {}, {}, &stats);
    CHECK(st.sigma.at(q) == vs({4}));
    CHECK(stats.rhs_evals == 1);
    CHECK(st.stable.count(q));
  }

  TEST_CASE("self loop matches round-robin iteration") {
    auto head = UnknownId::var("head");
    TableSystem sys(head);
    sys.define(head, qget(head, [](const AbstractValue& v) { return ans(v.join(vs({1}))); }));
    auto st = run(sys, {}, {});
    CHECK(st.point.count(head));
    auto oracle = kleene_oracle(sys);
    CHECK(st.sigma.at(head) == oracle.sigma.at(head));
    CHECK(st.sigma.at(head) == vs({1}));
    CHECK(verify_solution(sys, st).empty());
  }

  TEST_CASE("growing self loop is widened") {
    auto head = UnknownId::var("head");
    TableSystem sys(head);
    sys.define(head, qget(head, [](const AbstractValue& v) {
                 ValueSet s = v.is_bot() ? ValueSet() : *v.as<ValueSet>();
                 return ans(AbstractValue(shift(s, 1).join(ValueSet::of({0}))));
               }));
    SolverOptions opts;
    opts.widen.value_set_bound = 4;
    auto st = run(sys, {}, opts);
    CHECK(st.sigma.at(head) == AbstractValue(ValueSet::top()));
    CHECK(verify_solution(sys, st).empty());
    auto oracle = kleene_oracle(sys);
    CHECK(oracle.sigma.at(head).leq(st.sigma.at(head)));
  }

  TEST_CASE("the re-queried head of a two-cycle becomes a widening point") {
    auto a = UnknownId::var("a"), b = UnknownId::var("b");
    TableSystem sys(a);
    sys.define(a, qget(b, [](const AbstractValue& v) { return ans(v.join(vs({1}))); }));
    sys.define(b, qget(a, [](const AbstractValue& v) { return ans(v); }));
    auto st = run(sys, {}, {});
    CHECK(st.point == UnknownSet{a});
    CHECK(st.sigma.at(a) == vs({1}));
    CHECK(st.sigma.at(b) == vs({1}));
  }

  TEST_CASE("querying a leaf marks it and records the influence") {
    auto s = solve_thread_example();
    auto g = UnknownId::global("g");
    CHECK(s.st.point.count(g));
    CHECK(s.st.infl.at(g).as_set() == UnknownSet{main_at(5)});
  }

  TEST_CASE("destabilizing a return node") {
    auto s = solve_thread_example();
    auto before = s.st.stable;
    TdSolver solver(*s.fe.sys, s.st, {});
    solver.destabilize(foo_at(2));
    UnknownSet lost;
    for (const auto& x : before)
      if (!s.st.stable.count(x)) lost.insert(x);
    CHECK(lost == UnknownSet{main_at(4), main_at(5), UnknownId::harness()});
  }

  TEST_CASE("destabilizing the global") {
    auto s = solve_thread_example();
    auto before = s.st.stable;
    TdSolver solver(*s.fe.sys, s.st, {});
    solver.destabilize(UnknownId::global("g"));
    UnknownSet lost;
    for (const auto& x : before)
      if (!s.st.stable.count(x)) lost.insert(x);
    CHECK(lost == UnknownSet{main_at(5), UnknownId::harness()});
    CHECK(s.st.infl.at(UnknownId::global("g")).empty());
  }

  TEST_CASE("destabilizing without influence is a no-op") {
    auto s = solve_thread_example();
    auto before = s.st.stable;
    TdSolver solver(*s.fe.sys, s.st, {});
    solver.destabilize(UnknownId::var("nobody"));
    CHECK(s.st.stable == before);
  }

  TEST_CASE("destabilization also clears superstable") {
    auto s = solve_thread_example();
    s.st.superstable = s.st.stable;
    TdSolver solver(*s.fe.sys, s.st, {});
    solver.destabilize(UnknownId::global("g"));
    CHECK_FALSE(s.st.superstable.count(main_at(5)));
    for (const auto& x : s.st.superstable) CHECK(s.st.stable.count(x));
  }

  TEST_CASE("a growing contribution destabilizes the readers") {
    auto s = solve_thread_example();
    auto g = UnknownId::global("g");
    s.st.sigma[g] = global_set({0});
    TdSolver solver(*s.fe.sys, s.st, {});
    solver.side(foo_at(1), g, global_set({1}));
    CHECK(s.st.sigma.at(g) == global_set({0, 1}));
    CHECK_FALSE(s.st.stable.count(main_at(5)));
    CHECK(s.st.stable.count(g));
  }

  TEST_CASE("a contribution already covered only updates bookkeeping") {
    auto s = solve_thread_example();
    auto g = UnknownId::global("g");
    auto x = UnknownId::var("writer");
    auto before = s.st;
    RunStats stats;
    TdSolver solver(*s.fe.sys, s.st, {}, &stats);
    solver.side(x, g, global_set({1}));
    CHECK(stats.destabilizations == 0);
    CHECK(s.st.stable == before.stable);
    CHECK(s.st.side_dep.at(g).count(x));
    CHECK(s.st.side_infl.at(x).count(g));
  }

  TEST_CASE("access contributions are dropped while solving") {
    auto s = solve_thread_example();
    auto acc = UnknownId::acc("g");
    dom::AccessSet rec = dom::AccessSet::of({dom::Access{{"foo", 0, 1}, dom::AccessKind::Write, Lockset(), "x", {}}});
    TdSolver solver(*s.fe.sys, s.st, {});
    solver.side(foo_at(1), acc, AbstractValue(rec));
    CHECK_FALSE(s.st.sigma.count(acc));
    CHECK(s.st.side_dep.at(acc).count(foo_at(1)));
    CHECK(s.st.side_infl.at(foo_at(1)).count(acc));
  }

  TEST_CASE("verification") {
    auto s = solve_thread_example();
    CHECK(verify_solution(*s.fe.sys, s.st).empty());
    CHECK(verify_solution(*s.fe.sys, SolverState{}).empty());
    auto broken = s.st;
    broken.sigma[UnknownId::global("g")] = global_set({0});
    auto v = verify_solution(*s.fe.sys, broken);
    bool at_writer = false;
    for (const auto& viol : v) at_writer = at_writer || viol.at == foo_at(1);
    CHECK(at_writer);
  }

  TEST_CASE("random monotone systems are solved soundly and locally") {
    Rng rng(2024);
    int unsound = 0, invalid = 0, nonlocal = 0, uninverted = 0;
    for (int i = 0; i < 600; ++i) {
      auto rs = random_monotone_system(rng, 12);
      RunStats stats;
      auto st = run(*rs.sys, {}, {}, &stats);
      auto oracle = kleene_oracle(*rs.sys);
      for (const auto& [x, v] : oracle.sigma)
        if (!v.leq(st.value(x))) ++unsound;
      if (!verify_solution(*rs.sys, st).empty()) ++invalid;
      for (const auto& [x, _] : st.sigma)
        if (!oracle.reached.count(x)) ++nonlocal;
      for (const auto& x : st.stable)
        if (!oracle.reached.count(x)) ++nonlocal;
      for (const auto& [x, _] : st.infl)
        if (!oracle.reached.count(x)) ++nonlocal;
      if (!sides_inverse(st)) ++uninverted;
      CHECK(st.called.empty());
    }
    CHECK(unsound == 0);
    CHECK(invalid == 0);
    CHECK(nonlocal == 0);
    CHECK(uninverted == 0);
  }

  TEST_CASE("widening-point restart") {
    auto a = UnknownId::var("a"), b = UnknownId::var("b");
    TableSystem sys(a);
    sys.define(a, qget(b, [](const AbstractValue& v) { return ans(v.join(vs({1}))); }));
    sys.define(b, qget(a, [](const AbstractValue& v) { return ans(v); }));
    SolverOptions opts;
    opts.restart_wpoint = true;
    RunStats stats;
    auto st = run(sys, {}, opts, &stats);
    CHECK(stats.wpoint_restarts == 1);
    CHECK(st.sigma.at(a) == vs({1}));
    CHECK(verify_solution(sys, st).empty());
    opts.localized_widening = true;
    st = run(sys, {}, opts);
    CHECK(st.point.empty());
  }

  TEST_CASE("restarts per unknown are bounded") {
    auto a = UnknownId::var("a"), b = UnknownId::var("b");
    TableSystem sys(a);
    sys.define(a, qget(b, [](const AbstractValue& v) { return ans(v.join(vs({1}))); }));
    sys.define(b, qget(a, [](const AbstractValue& v) { return ans(v); }));
    SolverOptions opts;
    opts.restart_wpoint = true;
    opts.max_restarts_per_unknown = 0;
    RunStats stats;
    auto st = run(sys, {}, opts, &stats);
    CHECK(stats.wpoint_restarts == 0);
    CHECK(stats.diagnostics.size() == 1);
    CHECK(verify_solution(sys, st).empty());
  }

  TEST_CASE("recursion bound") {
    TableSystem sys(UnknownId::var("x0"));
    for (int i = 0; i < 50; ++i) {
      auto next = UnknownId::var("x" + std::to_string(i + 1));
      sys.define(UnknownId::var("x" + std::to_string(i)),
                 qget(next, [](const AbstractValue& v) { return ans(v); }));
    }
    sys.define(UnknownId::var("x50"), ans(vs({1})));
    SolverOptions opts;
    opts.max_depth = 10;
    CHECK_THROWS_AS(run(sys, {}, opts), SolverError);
    opts.max_depth = 100;
    CHECK(run(sys, {}, opts).sigma.at(UnknownId::var("x0")) == vs({1}));
  }

  TEST_CASE("state json round trip") {
    auto s = solve_thread_example();
    auto j = to_json(s.st);
    CHECK(j.at("format") == 1);
    auto back = state_from_json(j);
    CHECK(back.sigma == s.st.sigma);
    CHECK(back.infl == s.st.infl);
    CHECK(back.stable == s.st.stable);
    CHECK(back.point == s.st.point);
    CHECK(back.side_dep == s.st.side_dep);
    CHECK(back.side_infl == s.st.side_infl);
    CHECK(back.starts == s.st.starts);
    CHECK(back.counters == s.st.counters);
    CHECK(back.superstable.empty());
    CHECK(to_json(back) == j);
  }

  TEST_CASE("starts are seeded before solving") {
    auto q = UnknownId::var("q"), s = UnknownId::var("s");
    TableSystem sys(q);
    sys.define(q, qget(s, [](const AbstractValue& v) { return ans(v); }));
    sys.add_start(s, vs({3}));
    auto st = run(sys, {}, {});
    CHECK(st.sigma.at(q) == vs({3}));
    CHECK(st.starts.at(s) == vs({3}));
  }
}
