#include "incr/minic/system.hpp"

#include <algorithm>
#include <numeric>

namespace incr::minic {

using dom::Access;
using dom::AccessKind;
using dom::AccessSet;
using dom::AddressSet;
using dom::LocalState;
using dom::Lockset;

namespace {

Scalar scalar_of(const AbstractValue& v) {
  if (auto* s = v.as<Scalar>()) return *s;
  return Scalar();
}

using Fetch = std::function<std::set<std::string>(const GlobalValues&)>;
using WithGlobals = std::function<TreePtr(const GlobalValues&)>;

/// Queries the globals reported missing until the evaluation has all it needs.
TreePtr fetch_globals(const Fetch& missing, GlobalValues known, const WithGlobals& k) {
  auto need = missing(known);
  if (need.empty()) return k(known);
  const std::string g = *need.begin();
  return qget(UnknownId::global(g), [missing, known, k, g](const AbstractValue& v) {
    GlobalValues next = known;
    next[g] = scalar_of(v);
    return fetch_globals(missing, std::move(next), k);
  });
}

/// Chains a list of contributions in front of `rest`.
TreePtr emit_all(const std::vector<std::pair<UnknownId, AbstractValue>>& sides, TreePtr rest) {
  for (auto it = sides.rbegin(); it != sides.rend(); ++it) {
    if (it->second.is_bot()) continue;
    rest = qset(it->first, it->second, rest);
  }
  return rest;
}

}  // namespace

MiniCSystem::MiniCSystem(std::shared_ptr<const Program> prog, NodeIds ids, AnalysisOptions opts)
    : prog_(std::move(prog)), ids_(std::move(ids)), opts_(opts), ops_(opts) {
  for (const auto& f : prog_->functions) {
    FnInfo info;
    info.cfg = build_cfg(f);
    auto it = ids_.ids.find(f.name);
    if (it == ids_.ids.end() || it->second.size() != info.cfg.num_nodes) {
      throw std::invalid_argument("node identities do not match the CFG of " + f.name);
    }
    info.gid = it->second;
    for (std::uint32_t i = 0; i < info.gid.size(); ++i) info.local[info.gid[i]] = i;
    info.locals.insert("ret");
    for (const auto& p : f.params) info.locals.insert(p.name);
    for (const auto& l : info.cfg.locals) info.locals.insert(l);
    fns_.emplace(f.name, std::move(info));
  }
}

const MiniCSystem::FnInfo* MiniCSystem::info(const std::string& fn) const {
  auto it = fns_.find(fn);
  return it == fns_.end() ? nullptr : &it->second;
}

const FunctionCfg& MiniCSystem::cfg(const std::string& fn) const { return fns_.at(fn).cfg; }

UnknownId MiniCSystem::entry_unknown(const std::string& fn, const Context& ctx) const {
  return UnknownId::node(fn, ids_.entry(fn), ctx);
}

UnknownId MiniCSystem::return_unknown(const std::string& fn, const Context& ctx) const {
  return UnknownId::node(fn, ids_.ret(fn), ctx);
}

bool MiniCSystem::has_rhs(const UnknownId& x) const {
  switch (x.kind()) {
    case UnknownKind::Init:
    case UnknownKind::Harness:
      return true;
    case UnknownKind::Node: {
      const FnInfo* f = info(x.name());
      if (!f) return false;
      auto it = f->local.find(x.node_id());
      return it != f->local.end() && it->second != f->cfg.entry;
    }
    default:
      return false;
  }
}

std::optional<Loc> MiniCSystem::site_loc(const dom::Site& site) const {
  const FnInfo* f = info(site.fn);
  if (!f) return std::nullopt;
  auto s = f->local.find(site.src);
  auto d = f->local.find(site.dst);
  if (s == f->local.end() || d == f->local.end()) return std::nullopt;
  for (auto ei : f->cfg.succs[s->second]) {
    if (f->cfg.edges[ei].dst == d->second) return f->cfg.edges[ei].loc;
  }
  return std::nullopt;
}

Context MiniCSystem::callee_context(const Function& callee, const std::vector<Scalar>& args) const {
  Context ctx;
  for (std::size_t i = 0; i < callee.params.size() && i < args.size(); ++i) {
    ctx[callee.params[i].name] = AbstractValue(args[i]);
  }
  return ctx;
}

LocalState MiniCSystem::entry_state(const Function& callee, const Context& ctx, Lockset locks) const {
  Env env;
  for (const auto& l : fns_.at(callee.name).locals) env = env.set(l, Scalar::top());
  for (const auto& [p, v] : ctx) env = env.set(p, scalar_of(v));
  return LocalState(env, std::move(locks));
}

std::optional<TreePtr> MiniCSystem::rhs(const UnknownId& x, EvalMode mode) const {
  switch (x.kind()) {
    case UnknownKind::Init: {
      std::vector<std::pair<UnknownId, AbstractValue>> sides;
      for (const auto& g : prog_->globals) {
        if (g.type == Type::Int) sides.emplace_back(UnknownId::global(g.name), ops_.constant(g.init));
      }
      return emit_all(sides, ans(LocalState()));
    }
    case UnknownKind::Harness: {
      const Function& main = *prog_->find("main");
      UnknownId entry = entry_unknown("main", {});
      UnknownId ret = return_unknown("main", {});
      LocalState start = entry_state(main, {}, Lockset());
      return qget(UnknownId::init(), [entry, ret, start](const AbstractValue&) {
        return qset(entry, start, qget(ret, [](const AbstractValue& r) {
                      auto* s = r.as<LocalState>();
                      if (!s || s->is_bot()) return ans(AbstractValue());
                      return ans(LocalState(Env().set("ret", s->env().get("ret")), Lockset()));
                    }));
      });
    }
    case UnknownKind::Node: {
      if (!has_rhs(x)) return std::nullopt;
      const FnInfo& f = *info(x.name());
      return node_rhs(f, f.local.at(x.node_id()), x, mode);
    }
    default:
      return std::nullopt;
  }
}

TreePtr MiniCSystem::node_rhs(const FnInfo& f, std::uint32_t local, const UnknownId& self,
                              EvalMode mode) const {
  // Joins the transfer of every incoming edge, in edge order.
  struct Fold {
    const MiniCSystem* sys;
    const FnInfo* f;
    const std::vector<std::size_t>* preds;
    UnknownId self;
    EvalMode mode;

    TreePtr step(std::shared_ptr<const Fold> me, std::size_t i, LocalState acc) const {
      if (i == preds->size()) return ans(acc);
      const Edge& e = f->cfg.edges[(*preds)[i]];
      UnknownId src = UnknownId::node(self.name(), f->gid[e.src], self.ctx());
      return qget(src, [me, i, acc, &e](const AbstractValue& v) {
        auto* s = v.as<LocalState>();
        if (!s || s->is_bot()) return me->step(me, i + 1, acc);
        return me->sys->transfer(*me->f, e, me->self, *s, me->mode,
                                 [me, i, acc](LocalState out) {
                                   return me->step(me, i + 1, acc.join(out));
                                 });
      });
    }
  };
  auto fold = std::make_shared<const Fold>(Fold{this, &f, &f.cfg.preds[local], self, mode});
  return fold->step(fold, 0, LocalState::bot());
}

TreePtr MiniCSystem::transfer(const FnInfo& f, const Edge& e, const UnknownId& self,
                              const LocalState& in, EvalMode mode,
                              std::function<TreePtr(LocalState)> k) const {
  if (e.kind == EdgeKind::Skip) return k(in);
  const Stmt* s = e.stmt;
  const FnInfo* fp = &f;
  IsLocal is_local = [fp](const std::string& n) { return fp->locals.count(n) != 0; };

  std::vector<ExprPtr> exprs;
  if (e.kind == EdgeKind::Guard) {
    exprs.push_back(e.cond);
  } else if (s) {
    if (s->expr) exprs.push_back(s->expr);
    for (const auto& a : s->args) exprs.push_back(a);
  }
  // A store or an assignment also needs the pointer / target when it is global.
  std::vector<std::string> extra;
  if (s && e.kind == EdgeKind::Store && !is_local(s->name)) extra.push_back(s->name);

  const Env env = in.env();
  Fetch missing = [exprs, extra, env, is_local](const GlobalValues& known) {
    std::set<std::string> out;
    for (const auto& x : exprs) {
      auto m = missing_globals(*x, env, is_local, known);
      out.insert(m.begin(), m.end());
    }
    for (const auto& g : extra) {
      if (!known.count(g)) out.insert(g);
    }
    return out;
  };

  const dom::Site site{self.name(), f.gid[e.src], f.gid[e.dst]};
  const dom::SourceLoc sloc = source_loc(e.loc);
  const bool post = mode == EvalMode::Postprocess;
  const std::string producer = self.str();
  auto access = [site, sloc, producer, locks = in.locks()](const std::string& g, AccessKind kind) {
    Access a;
    a.site = site;
    a.kind = kind;
    a.locks = locks;
    a.producer = producer;
    a.loc = sloc;
    return std::make_pair(UnknownId::acc(g), AbstractValue(AccessSet::of({a})));
  };

  return fetch_globals(missing, {}, [=, this](const GlobalValues& G) -> TreePtr {
    std::vector<std::pair<UnknownId, AbstractValue>> sides;
    if (post) {
      std::set<std::string> reads;
      for (const auto& x : exprs) {
        auto r = read_globals(*x, env, is_local, G);
        reads.insert(r.begin(), r.end());
      }
      for (const auto& g : extra) reads.insert(g);
      for (const auto& g : reads) sides.push_back(access(g, AccessKind::Read));
    }
    auto eval = [&](const ExprPtr& x) { return eval_expr(ops_, *x, env, is_local, G); };
    auto write_global = [&](const std::string& g, const Scalar& v) {
      if (post) sides.push_back(access(g, AccessKind::Write));
      sides.emplace_back(UnknownId::global(g), AbstractValue(v));
    };

    switch (e.kind) {
      case EdgeKind::Skip:
        return emit_all(sides, k(in));
      case EdgeKind::Guard: {
        auto r = refine_guard(ops_, *e.cond, e.positive, env, is_local, G);
        return emit_all(sides, k(r ? in.with_env(*r) : LocalState::bot()));
      }
      case EdgeKind::Assert: {
        auto r = refine_guard(ops_, *s->expr, true, env, is_local, G);
        return emit_all(sides, k(r ? in.with_env(*r) : LocalState::bot()));
      }
      case EdgeKind::Assign: {
        Scalar v = eval(s->expr);
        if (is_local(s->name)) return emit_all(sides, k(in.with_env(env.set(s->name, v))));
        write_global(s->name, v);
        return emit_all(sides, k(in));
      }
      case EdgeKind::Store: {
        Scalar v = eval(s->expr);
        Scalar p = is_local(s->name) ? env.get(s->name) : G.at(s->name);
        if (auto* a = p.addrs(); a && !a->is_top()) {
          for (const auto& h : a->addresses()) {
            const Global* g = prog_->global(h);
            if (g && g->type == Type::Int) write_global(h, v);
          }
        }
        return emit_all(sides, k(in));
      }
      case EdgeKind::Lock:
        return emit_all(sides, k(in.with_locks(in.locks().with(s->name))));
      case EdgeKind::Unlock:
        return emit_all(sides, k(in.with_locks(in.locks().without(s->name))));
      case EdgeKind::Return: {
        if (!s || !s->expr) return emit_all(sides, k(in));
        return emit_all(sides, k(in.with_env(env.set("ret", eval(s->expr)))));
      }
      case EdgeKind::Create: {
        const Function& callee = *prog_->find(s->callee);
        Context cctx = callee_context(callee, {eval(s->args.at(0))});
        UnknownId entry = entry_unknown(callee.name, cctx);
        UnknownId ret = return_unknown(callee.name, cctx);
        LocalState start = entry_state(callee, cctx, Lockset());
        return emit_all(sides, qset(entry, start, qget(ret, [k, in](const AbstractValue&) {
                                      return k(in);
                                    })));
      }
      case EdgeKind::Call: {
        const Function& callee = *prog_->find(s->callee);
        std::vector<Scalar> args;
        for (const auto& a : s->args) args.push_back(eval(a));
        Context cctx = callee_context(callee, args);
        UnknownId entry = entry_unknown(callee.name, cctx);
        UnknownId ret = return_unknown(callee.name, cctx);
        LocalState start = entry_state(callee, cctx, in.locks());
        const std::string target = s->name;
        const bool local_target = target.empty() || is_local(target);
        auto after = [=](const AbstractValue& rv) -> TreePtr {
          auto* r = rv.as<LocalState>();
          if (!r || r->is_bot()) return k(LocalState::bot());
          LocalState out = in.with_locks(r->locks());
          if (target.empty()) return k(out);
          Scalar v = r->env().get("ret");
          if (local_target) return k(out.with_env(out.env().set(target, v)));
          std::vector<std::pair<UnknownId, AbstractValue>> w;
          if (post) {
            auto acc = access(target, AccessKind::Write);
            // The write happens with the locks held after the call.
            Access a = acc.second.as<AccessSet>()->records().front();
            a.locks = r->locks();
            w.emplace_back(acc.first, AbstractValue(AccessSet::of({a})));
          }
          w.emplace_back(UnknownId::global(target), AbstractValue(v));
          return emit_all(w, k(out));
        };
        return emit_all(sides, qset(entry, start, qget(ret, after)));
      }
    }
    return k(in);
  });
}

// ---------------------------------------------------------------------------
// Postprocessing support

std::vector<NodeDiagnostic> MiniCSystem::diagnose(const UnknownId& x, const GetFn& lookup) const {
  std::vector<NodeDiagnostic> out;
  if (x.kind() != UnknownKind::Node || !has_rhs(x)) return out;
  const FnInfo& f = *info(x.name());
  IsLocal is_local = [&f](const std::string& n) { return f.locals.count(n) != 0; };
  GlobalValues G;
  for (const auto& g : prog_->globals) {
    if (g.type == Type::Int) G[g.name] = scalar_of(lookup(UnknownId::global(g.name)));
  }
  for (auto ei : f.cfg.preds[f.local.at(x.node_id())]) {
    const Edge& e = f.cfg.edges[ei];
    if (e.kind != EdgeKind::Assert && e.kind != EdgeKind::Store) continue;
    const AbstractValue src_val = lookup(UnknownId::node(x.name(), f.gid[e.src], x.ctx()));
    auto* in = src_val.as<LocalState>();
    if (!in || in->is_bot()) continue;
    const Stmt& s = *e.stmt;
    dom::Site site{x.name(), f.gid[e.src], f.gid[e.dst]};
    if (e.kind == EdgeKind::Assert) {
      Truth t = ops_.truth(eval_expr(ops_, *s.expr, in->env(), is_local, G));
      if (!t.may_zero) continue;
      std::string text = t.may_nonzero ? "assertion may fail: " : "assertion fails: ";
      text += expr_str(*s.expr);
      out.push_back({"assert", text, text, site, e.loc});
    } else {
      Scalar p = is_local(s.name) ? in->env().get(s.name) : G[s.name];
      auto* a = p.addrs();
      if (p.is_bot() || (a && !a->is_top())) continue;
      std::string text = "store through '" + s.name + "' with unknown target is ignored";
      out.push_back({"unsound-store", text, text, site, e.loc});
    }
  }
  return out;
}

std::vector<DeadRegion> MiniCSystem::dead_code(const std::map<UnknownId, AbstractValue>& sigma) const {
  std::vector<DeadRegion> out;
  std::map<std::string, std::vector<std::pair<const UnknownId*, const AbstractValue*>>> by_fn;
  for (const auto& [x, v] : sigma) {
    if (x.kind() == UnknownKind::Node) by_fn[x.name()].emplace_back(&x, &v);
  }
  for (const auto& fdef : prog_->functions) {
    const FnInfo& f = fns_.at(fdef.name);
    const auto& cfg = f.cfg;
    std::vector<bool> live(cfg.num_nodes, false);
    std::map<std::string, Context> contexts;
    for (const auto& [x, v] : by_fn[fdef.name]) {
      auto l = f.local.find(x->node_id());
      if (l == f.local.end()) continue;
      contexts.emplace(context_str(x->ctx()), x->ctx());
      if (!v->is_bot()) live[l->second] = true;
    }
    if (std::none_of(live.begin(), live.end(), [](bool b) { return b; })) continue;

    // Components of dead nodes connected by edges.
    std::vector<std::uint32_t> parent(cfg.num_nodes);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t a) {
      return parent[a] == a ? a : parent[a] = find(parent[a]);
    };
    for (const auto& e : cfg.edges) {
      if (!live[e.src] && !live[e.dst]) parent[find(e.src)] = find(e.dst);
    }
    std::map<std::uint32_t, std::vector<std::uint32_t>> comps;
    for (std::uint32_t n = 0; n < cfg.num_nodes; ++n) {
      if (!live[n]) comps[find(n)].push_back(n);
    }
    for (const auto& [_, nodes] : comps) {
      const Edge* first = nullptr;
      std::optional<std::uint32_t> head;
      for (auto n : nodes) {
        for (auto ei : cfg.succs[n]) {
          const Edge& e = cfg.edges[ei];
          if (!e.stmt) continue;
          if (!first || std::tie(e.loc.line, e.loc.col) < std::tie(first->loc.line, first->loc.col)) first = &e;
        }
        bool entered = cfg.preds[n].empty();
        for (auto ei : cfg.preds[n]) entered |= live[cfg.edges[ei].src];
        if (entered && !head) head = n;
      }
      if (!first) continue;
      DeadRegion r;
      r.fn = fdef.name;
      r.head = f.gid[head.value_or(nodes.front())];
      r.loc = first->loc;
      for (const auto& [_, c] : contexts) r.provenance.push_back(UnknownId::node(fdef.name, r.head, c));
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace incr::minic
