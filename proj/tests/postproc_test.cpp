#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "fixtures.hpp"
#include "incr/postproc.hpp"

using namespace incr;
using namespace incr::testing;
using dom::Access;
using dom::AccessKind;
using dom::Lockset;

namespace {

Access access(int line, AccessKind kind, std::vector<std::string> locks) {
  Access a;
  a.site = {"f", std::uint32_t(line), std::uint32_t(line + 1)};
  a.kind = kind;
  a.locks = Lockset::of(std::move(locks));
  a.producer = "<f:" + std::to_string(line) + ">";
  a.loc = {"r.c", line, 3};
  return a;
}

std::set<std::string> ids_of(const std::vector<Warning>& ws) {
  std::set<std::string> s;
  for (const auto& w : ws) s.insert(w.id);
  return s;
}

const Warning* find_kind(const std::vector<Warning>& ws, const std::string& kind) {
  for (const auto& w : ws)
    if (w.kind == kind) return &w;
  return nullptr;
}

ReanalyzeOptions options(ReanalyzeMode mode, RestartPolicy restart) {
  ReanalyzeOptions o;
  o.mode = mode;
  o.restart = restart;
  return o;
}

}  // namespace

TEST_SUITE("postproc") {
  TEST_CASE("a common lock prevents a race") {
    CHECK(races({{"G", {access(1, AccessKind::Write, {"m"}), access(2, AccessKind::Read, {"m"})}}}).empty());
  }

  TEST_CASE("disjoint locksets race") {
    auto ws = races({{"G", {access(1, AccessKind::Write, {}), access(2, AccessKind::Read, {"m"})}}});
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].kind == "race");
    REQUIRE(ws[0].locations.size() == 2);
    CHECK(ws[0].locations[0].line == 1);
    CHECK(ws[0].locations[1].line == 2);
    CHECK(ws[0].provenance == std::vector<std::string>{"acc(G)"});
  }

  TEST_CASE("reads alone never race") {
    CHECK(races({{"G", {access(1, AccessKind::Read, {}), access(2, AccessKind::Read, {})}}}).empty());
  }

  TEST_CASE("race rule agrees with brute force over pairs") {
    std::mt19937_64 rng(31);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int i = 0; i < 500; ++i) {
      std::vector<Access> recs;
      for (int n = pick(0, 5); n > 0; --n) {
        std::vector<std::string> locks;
        if (pick(0, 1)) locks.push_back("a");
        if (pick(0, 1)) locks.push_back("b");
        recs.push_back(access(int(recs.size()) + 1, pick(0, 1) ? AccessKind::Write : AccessKind::Read, locks));
      }
      std::set<int> conflicting;
      for (std::size_t a = 0; a < recs.size(); ++a)
        for (std::size_t b = 0; b < recs.size(); ++b) {
          if (a == b) continue;
          bool write = recs[a].kind == AccessKind::Write || recs[b].kind == AccessKind::Write;
          if (write && recs[a].locks.disjoint(recs[b].locks)) conflicting.insert(recs[a].loc.line);
        }
      auto ws = races({{"G", recs}});
      CHECK(ws.size() == (conflicting.empty() ? 0u : 1u));
      if (!ws.empty()) {
        std::set<int> lines;
        for (const auto& l : ws[0].locations) lines.insert(l.line);
        CHECK(lines == conflicting);
        CHECK(std::is_sorted(ws[0].locations.begin(), ws[0].locations.end()));
      }
    }
  }

  TEST_CASE("the thread example races on g") {
    auto out = analyze(thread_example(), "a.c", {});
    auto ws = out.bundle.warnings.all();
    const Warning* race = find_kind(ws, "race");
    REQUIRE(race);
    CHECK(race->message.find("'g'") != std::string::npos);
    REQUIRE(race->locations.size() == 2);
    CHECK(race->locations[0].line == 3);
    CHECK(race->locations[1].line == 8);
  }

  TEST_CASE("warning ids ignore locations") {
    auto id = warning_id("race", {"acc(g)"}, "data race on global 'g'");
    CHECK(id.size() == 16);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(id == warning_id("race", {"acc(g)"}, "data race on global 'g'"));
    CHECK(id != warning_id("race", {"acc(h)"}, "data race on global 'g'"));
    CHECK(id != warning_id("dead-code", {"acc(g)"}, "data race on global 'g'"));
  }

  TEST_CASE("from scratch every stable unknown is re-evaluated") {
    auto fe = frontend(thread_example());
    auto st = run(*fe.sys, {}, {});
    std::size_t with_rhs = 0;
    for (const auto& x : st.stable) with_rhs += fe.sys->has_rhs(x);
    auto post = postprocess(*fe.sys, st, nullptr);
    CHECK(post.reevaluated.size() == with_rhs);
    CHECK(post.reused == 0);
  }

  TEST_CASE("postprocessing leaves the solution alone and is deterministic") {
    auto fe = frontend(thread_example());
    auto st = run(*fe.sys, {}, {});
    auto sigma = st.sigma;
    auto a = postprocess(*fe.sys, st, nullptr);
    CHECK(st.sigma == sigma);
    auto b = postprocess(*fe.sys, st, nullptr);
    CHECK(st.sigma == sigma);
    CHECK(a.store.to_json().dump() == b.store.to_json().dump());
    CHECK(WarnStore::from_json(a.store.to_json()) == a.store);
  }

  TEST_CASE("reused results need the previous store") {
    auto fe = frontend(thread_example());
    auto st = run(*fe.sys, {}, {});
    st.superstable = st.stable;
    CHECK_THROWS_AS(postprocess(*fe.sys, st, nullptr), PostprocessError);
  }

  TEST_CASE("after a reluctant edit only the changed part is re-evaluated") {
    auto first = analyze(thread_example(1), "a.c", {});
    auto out = reanalyze(first.bundle, thread_example(2), "a.c", options(ReanalyzeMode::Reluctant, RestartPolicy::Off));
    CHECK(out.report.post_reevaluated == 4);
    // superstable producers: <main:4> and init (entry nodes are leaves)
    CHECK(out.report.post_reused == 2);
    // Stable but not superstable: the new interior node, the return node of
    // the thread, the reader of g, and the harness.
    auto old_prog = minic::parse(thread_example(1), "a.c");
    auto prog = std::make_shared<const minic::Program>(minic::parse(thread_example(2), "a.c"));
    Frontend nfe(prog, Frontend::cfgs_of(*prog), out.bundle.ids, {});
    auto state = first.bundle.state;
    auto changes = detect_changes(old_prog, *prog);
    Reanalysis r(*nfe.sys, state, changes, layout_of(first.bundle.ids), layout_of(out.bundle.ids),
                 options(ReanalyzeMode::Reluctant, RestartPolicy::Off), {});
    r.run();
    auto post = postprocess(*nfe.sys, state, &first.bundle.warnings);
    std::set<UnknownId> re(post.reevaluated.begin(), post.reevaluated.end());
    CHECK(re == std::set<UnknownId>{foo_at(6), foo_at(2), main_at(5), UnknownId::harness()});
  }

  TEST_CASE("diff of identical stores") {
    auto out = analyze(thread_example(), "a.c", {});
    auto d = diff_warnings(out.bundle.warnings.all(), out.bundle.warnings.all());
    CHECK(d.added.empty());
    CHECK(d.removed.empty());
    CHECK(d.kept.size() == out.bundle.warnings.all().size());
  }

  TEST_CASE("moving code keeps warnings with new locations") {
    auto first = analyze(thread_example(), "a.c", {});
    auto out = reanalyze(first.bundle, "\n\n" + thread_example(), "a.c", {});
    CHECK(out.diff.added.empty());
    CHECK(out.diff.removed.empty());
    const Warning* race = find_kind(out.diff.kept, "race");
    REQUIRE(race);
    CHECK(race->locations.at(0).line == 5);
    CHECK(race->locations.at(1).line == 10);
    CHECK(out.report.solve.rhs_evals == 0);
  }

  TEST_CASE("locking the write removes the race and its accesses") {
    auto first = analyze(counter_workers(false), "w.c", {});
    auto before = first.bundle.warnings.all();
    const Warning* race = find_kind(before, "race");
    REQUIRE(race);
    std::string id = race->id;
    auto out = reanalyze(first.bundle, counter_workers(true), "w.c", {});
    CHECK(ids_of(out.diff.removed).count(id));
    CHECK_FALSE(ids_of(out.bundle.warnings.all()).count(id));
    for (const auto& [producer, by_global] : out.bundle.warnings.accesses)
      for (const auto& [g, recs] : by_global)
        for (const auto& a : recs) CHECK(a.locks.holds("m"));
  }

  TEST_CASE("incremental warnings match from scratch when the solutions agree") {
    std::mt19937_64 rng(8);
    int agreeing = 0;
    for (int program = 0; program < 10; ++program) {
      auto model = generate(rng, CorpusOptions{10, 2, 3, 2});
      auto bundle = analyze(model.render(), "c.c", {}).bundle;
      for (int edit = 0; edit < 4; ++edit) {
        mutate(rng, model);
        bundle = reanalyze(bundle, model.render(), "c.c", {}).bundle;
        // from scratch under the same node ids
        auto prog = std::make_shared<const minic::Program>(minic::parse(bundle.source, "c.c"));
        Frontend fe(prog, Frontend::cfgs_of(*prog), bundle.ids, bundle.config);
        auto st = run(*fe.sys, {}, bundle.config.solver_options());
        auto post = postprocess(*fe.sys, st, nullptr);
        bool same = true;
        for (const auto& [x, v] : st.sigma)
          if (bundle.state.sigma.count(x) && !(bundle.state.sigma.at(x) == v)) same = false;
        if (!same) continue;
        ++agreeing;
        auto inc = bundle.warnings.all();
        auto scratch = post.store.all();
        REQUIRE(inc.size() == scratch.size());
        for (std::size_t i = 0; i < inc.size(); ++i) {
          CHECK(inc[i].id == scratch[i].id);
          CHECK(inc[i].message == scratch[i].message);
          CHECK(inc[i].locations == scratch[i].locations);
        }
      }
    }
    CHECK(agreeing > 0);
  }
}
