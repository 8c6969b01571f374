#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "incr/minic/parser.hpp"
#include "incr/minic/values.hpp"

using namespace incr;
using namespace incr::minic;
using namespace incr::testing;
using dom::Interval;
using dom::LocalState;
using dom::Lockset;
using dom::ValueSet;

namespace {

AbstractValue vs(std::vector<std::int64_t> v) { return AbstractValue(ValueSet::of(std::move(v))); }

GetFn lookup_in(const SolverState& st) {
  return [&st](const UnknownId& y) { return st.value(y); };
}

const LocalState& state_of(const SolverState& st, const UnknownId& x) {
  auto it = st.sigma.find(x);
  REQUIRE(it != st.sigma.end());
  auto* ls = it->second.as<LocalState>();
  REQUIRE(ls);
  return *ls;
}

struct Solved {
  Frontend fe;
  SolverState st;
};

Solved solve(const std::string& src, AnalysisConfig cfg = {}) {
  Solved s{frontend(src, cfg), {}};
  s.st = run(*s.fe.sys, {}, cfg.solver_options());
  return s;
}

Scalar main_ret(const Solved& s) {
  return state_of(s.st, s.fe.sys->return_unknown("main", {})).env().get("ret");
}

/// All access records the unknowns of `fn` emit in postprocessing.
std::vector<dom::Access> accesses_of(const Solved& s, const std::string& fn, const std::string& global) {
  std::vector<dom::Access> out;
  for (const auto& [x, _] : s.st.sigma) {
    if (x.kind() != UnknownKind::Node || x.name() != fn) continue;
    auto rhs = s.fe.sys->rhs(x, EvalMode::Postprocess);
    if (!rhs) continue;
    auto [es, v] = eval_tree(*rhs, lookup_in(s.st));
    auto it = es.sides.find(UnknownId::acc(global));
    if (it == es.sides.end()) continue;
    for (const auto& r : it->second.as<dom::AccessSet>()->records()) out.push_back(r);
  }
  return out;
}

ExprPtr var(const std::string& n) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = n;
  return e;
}

ExprPtr num(std::int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Int;
  e->value = v;
  return e;
}

ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Bin;
  e->op = op;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

}  // namespace

TEST_SUITE("minic") {
  TEST_CASE("parsing the thread example") {
    auto p = parse(thread_example(), "a.c");
    REQUIRE(p.globals.size() == 1);
    CHECK(p.globals[0].name == "g");
    CHECK(p.globals[0].atomic);
    REQUIRE(p.functions.size() == 2);
    CHECK(p.functions[0].name == "foo");
    CHECK(p.functions[1].name == "main");
    CHECK(p.has_threads());
    CHECK(p.functions[0].body.at(0).loc.line == 3);
  }

  TEST_CASE("minimal program") {
    auto p = parse("int main(){ return 0; }");
    CHECK(p.functions.size() == 1);
    CHECK_FALSE(p.has_threads());
  }

  TEST_CASE("parse errors carry locations") {
    try {
      parse("int main(){ *5 = 1; return 0; }", "bad.c");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.file() == "bad.c");
      CHECK(e.loc().line == 1);
      CHECK(e.loc().col == 14);
    }
    CHECK_THROWS_AS(parse("int g; int g; int main(){ return 0; }"), ParseError);
    CHECK_THROWS_AS(parse("int main(){ return y; }"), ParseError);
    CHECK_THROWS_AS(parse("int main(){ create(nope, NULL); return 0; }"), ParseError);
    CHECK_THROWS_AS(parse("int f(){ return 0; }"), ParseError);
    CHECK_THROWS_AS(parse("int main(){ /* open"), ParseError);
  }

  TEST_CASE("comments and layout do not change canonical forms") {
    auto a = parse(thread_example());
    auto b = parse("// header\n" + thread_example() + "\n/* trailing */\n");
    auto c = parse(thread_example(2));
    CHECK(canonical_body(a.functions[0]) == canonical_body(b.functions[0]));
    CHECK(canonical_body(a.functions[0]) != canonical_body(c.functions[0]));
    CHECK(canonical_header(a.functions[0]) == canonical_header(c.functions[0]));
    CHECK(canonical_globals(a) == canonical_globals(c));
  }

  TEST_CASE("control-flow graphs") {
    auto p = parse(hybrid_loops());
    for (const auto& f : p.functions) {
      auto cfg = build_cfg(f);
      CHECK(cfg.entry == 0);
      CHECK(cfg.ret == cfg.num_nodes - 1);
      CHECK(cfg.preds[cfg.entry].empty());
      // every node reaches the return node
      std::vector<bool> seen(cfg.num_nodes, false);
      std::vector<std::uint32_t> work{cfg.ret};
      seen[cfg.ret] = true;
      while (!work.empty()) {
        auto n = work.back();
        work.pop_back();
        for (auto e : cfg.preds[n])
          if (!seen[cfg.edges[e].src]) {
            seen[cfg.edges[e].src] = true;
            work.push_back(cfg.edges[e].src);
          }
      }
      for (std::uint32_t n = 0; n < cfg.num_nodes; ++n) CHECK(seen[n]);
    }
  }

  TEST_CASE("node numbering follows source order") {
    auto p = parse(thread_example());
    std::map<std::string, FunctionCfg> cfgs;
    for (const auto& f : p.functions) cfgs.emplace(f.name, build_cfg(f));
    auto ids = assign_fresh(p, cfgs);
    CHECK(ids.ids.at("foo") == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(ids.ids.at("main") == std::vector<std::uint32_t>{3, 4, 5});
    CHECK(ids.next == 6);
    CHECK(NodeIds::from_json(ids.to_json()) == ids);
  }

  TEST_CASE("the create edge contributes the thread start and queries its end") {
    auto s = solve(thread_example());
    auto rhs = s.fe.sys->rhs(main_at(4), EvalMode::Solve);
    REQUIRE(rhs);
    auto [es, v] = eval_tree(*rhs, lookup_in(s.st));
    CHECK(es.queried == UnknownSet{foo_at(2), main_at(3)});
    CHECK(queried_deps(*rhs, lookup_in(s.st)) == UnknownSet{foo_at(2), main_at(3)});
    REQUIRE(es.sides.size() == 1);
    auto expected = LocalState(dom::Env()
                                   .set("p", Scalar(dom::AddressSet::of({"g"})))
                                   .set("ret", Scalar::top()),
                               Lockset());
    CHECK(es.sides.at(foo_at(0)) == AbstractValue(expected));
    CHECK(v == s.st.sigma.at(main_at(4)));
  }

  TEST_CASE("stores through a pointer contribute to the pointee") {
    auto s = solve(thread_example());
    auto [es, v] = eval_tree(*s.fe.sys->rhs(foo_at(1), EvalMode::Solve), lookup_in(s.st));
    CHECK(es.sides.size() == 1);
    CHECK(es.sides.at(UnknownId::global("g")) == global_set({1}));
  }

  TEST_CASE("returning a global reads its value") {
    auto s = solve(thread_example());
    CHECK(main_ret(s) == Scalar(ValueSet::of({0, 1})));
  }

  TEST_CASE("unreachable sources stay unreachable") {
    auto s = solve(thread_example());
    auto [es, v] = eval_tree(*s.fe.sys->rhs(foo_at(1), EvalMode::Postprocess),
                             [](const UnknownId&) { return AbstractValue(); });
    CHECK(v.is_bot());
    CHECK(es.sides.empty());
  }

  TEST_CASE("threads are analyzed only in their creation context") {
    auto s = solve(thread_example());
    for (const auto& [x, _] : s.st.sigma)
      if (x.kind() == UnknownKind::Node && x.name() == "foo") CHECK(x.ctx() == pg_context());
  }

  TEST_CASE("straight-line code has no contributions") {
    auto s = solve("int main() {\n  int a = 1;\n  a = a + 2;\n  return a;\n}\n");
    CHECK(main_ret(s) == Scalar(ValueSet::of({3})));
    for (const auto& [x, ys] : s.st.side_infl)
      if (x.kind() == UnknownKind::Node) CHECK(ys.empty());
  }

  TEST_CASE("accesses record the held locks") {
    auto s = solve(
        "int g = 0;\nmutex m;\n"
        "void* t(void* a) {\n  lock(m);\n  g = 1;\n  unlock(m);\n  return NULL;\n}\n"
        "int main() {\n  create(t, NULL);\n  return 0;\n}\n");
    auto recs = accesses_of(s, "t", "g");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].kind == dom::AccessKind::Write);
    CHECK(recs[0].locks == Lockset::of({"m"}));
    CHECK(recs[0].loc.line == 5);
  }

  TEST_CASE("accesses are only emitted in postprocessing") {
    auto s = solve(thread_example());
    for (const auto& x : s.st.stable) {
      auto rhs = s.fe.sys->rhs(x, EvalMode::Solve);
      if (!rhs) continue;
      auto [es, v] = eval_tree(*rhs, lookup_in(s.st));
      for (const auto& [y, _] : es.sides) CHECK_FALSE(y.is_write_only());
    }
    CHECK(accesses_of(s, "foo", "g").size() == 1);
    CHECK(accesses_of(s, "main", "g").size() == 1);
  }

  TEST_CASE("loops over value sets") {
    auto s = solve("int main() {\n  int a = 0;\n  while (a < 3) {\n    a = a + 1;\n  }\n  return a;\n}\n");
    CHECK(main_ret(s) == Scalar(ValueSet::of({3})));
    CHECK(verify_solution(*s.fe.sys, s.st).empty());
  }

  TEST_CASE("loops over intervals are narrowed") {
    AnalysisConfig cfg;
    cfg.analysis.domain = IntDomain::Interval;
    auto s = solve("int main() {\n  int i = 0;\n  while (i < 10) {\n    i = i + 1;\n  }\n  return i;\n}\n", cfg);
    CHECK(main_ret(s) == Scalar(Interval::constant(10)));
    CHECK(verify_solution(*s.fe.sys, s.st).empty());
  }

  TEST_CASE("calls are context sensitive") {
    auto s = solve(
        "int inc(int x) {\n  return x + 1;\n}\n"
        "int main() {\n  int a = 0;\n  int b = 0;\n  a = inc(1);\n  b = inc(5);\n  return a + b;\n}\n");
    CHECK(main_ret(s) == Scalar(ValueSet::of({8})));
    std::set<std::string> contexts;
    for (const auto& [x, _] : s.st.sigma)
      if (x.kind() == UnknownKind::Node && x.name() == "inc") contexts.insert(context_str(x.ctx()));
    CHECK(contexts.size() == 2);
  }

  TEST_CASE("stores with unknown targets are reported") {
    auto s = solve("void* t(void* p) {\n  void* q;\n  *q = 1;\n  return NULL;\n}\n"
                   "int main() {\n  create(t, NULL);\n  return 0;\n}\n");
    std::vector<NodeDiagnostic> found;
    for (const auto& x : s.st.stable)
      if (x.kind() == UnknownKind::Node)
        for (auto& d : s.fe.sys->diagnose(x, lookup_in(s.st))) found.push_back(d);
    REQUIRE(found.size() == 1);
    CHECK(found[0].kind == "unsound-store");
    CHECK(found[0].loc.line == 3);
  }

  TEST_CASE("dead code after an endless loop") {
    auto s = solve(hybrid_loops());
    auto dead = s.fe.sys->dead_code(s.st.sigma);
    REQUIRE(dead.size() == 1);
    CHECK(dead[0].fn == "main");
    CHECK(dead[0].loc.line == 14);
  }

  TEST_CASE("guard refinement is reductive") {
    std::mt19937_64 rng(9);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    IsLocal is_local = [](const std::string&) { return true; };
    for (auto domain : {IntDomain::ValueSet, IntDomain::Interval}) {
      IntOps ops(AnalysisOptions{domain, {}});
      for (int i = 0; i < 1000; ++i) {
        Scalar x;
        if (domain == IntDomain::ValueSet) {
          std::vector<std::int64_t> v;
          for (int n = pick(1, 4); n > 0; --n) v.push_back(pick(-3, 6));
          x = pick(0, 9) ? Scalar(ValueSet::of(v)) : Scalar(ValueSet::top());
        } else {
          int a = pick(-5, 5), b = pick(-5, 5);
          if (a > b) std::swap(a, b);
          x = Scalar(Interval::of(pick(0, 4) ? Interval::Bound(a) : std::nullopt,
                                  pick(0, 4) ? Interval::Bound(b) : std::nullopt));
        }
        dom::Env env = dom::Env().set("x", x);
        static const BinOp ops_list[] = {BinOp::Lt, BinOp::Gt, BinOp::Eq, BinOp::Ne};
        BinOp op = ops_list[pick(0, 3)];
        ExprPtr cond = pick(0, 3) == 0 ? var("x")
                       : pick(0, 1)    ? bin(op, var("x"), num(pick(-4, 6)))
                                       : bin(op, num(pick(-4, 6)), var("x"));
        auto refined = refine_guard(ops, *cond, pick(0, 1) == 1, env, is_local, {});
        if (refined) CHECK(refined->leq(env));
      }
    }
  }

  TEST_CASE("infeasible guards cut the branch") {
    IntOps ops(AnalysisOptions{});
    IsLocal is_local = [](const std::string&) { return true; };
    dom::Env env = dom::Env().set("x", Scalar(ValueSet::of({1, 2})));
    CHECK_FALSE(refine_guard(ops, *bin(BinOp::Gt, var("x"), num(5)), true, env, is_local, {}));
    auto r = refine_guard(ops, *bin(BinOp::Lt, var("x"), num(2)), true, env, is_local, {});
    REQUIRE(r);
    CHECK(r->get("x") == Scalar(ValueSet::of({1})));
  }
}
