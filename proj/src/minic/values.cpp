#include "incr/minic/values.hpp"

#include <algorithm>

namespace incr::minic {

using dom::AddressSet;
using dom::Interval;
using dom::ValueSet;

namespace {

enum class Rel { Lt, Le, Gt, Ge, Eq, Ne };

Rel rel_of(BinOp op) {
  switch (op) {
    case BinOp::Lt: return Rel::Lt;
    case BinOp::Gt: return Rel::Gt;
    case BinOp::Eq: return Rel::Eq;
    default: return Rel::Ne;
  }
}

Rel negate(Rel r) {
  switch (r) {
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Gt: return Rel::Le;
    case Rel::Ge: return Rel::Lt;
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
  }
  return r;
}

/// x op y  <=>  y flip(op) x
Rel flip(Rel r) {
  switch (r) {
    case Rel::Lt: return Rel::Gt;
    case Rel::Le: return Rel::Ge;
    case Rel::Gt: return Rel::Lt;
    case Rel::Ge: return Rel::Le;
    default: return r;
  }
}

bool holds(Rel r, std::int64_t a, std::int64_t b) {
  switch (r) {
    case Rel::Lt: return a < b;
    case Rel::Le: return a <= b;
    case Rel::Gt: return a > b;
    case Rel::Ge: return a >= b;
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
  }
  return false;
}

bool is_comparison(BinOp op) {
  return op == BinOp::Lt || op == BinOp::Gt || op == BinOp::Eq || op == BinOp::Ne;
}

std::optional<std::int64_t> checked(BinOp op, std::int64_t a, std::int64_t b) {
  std::int64_t r;
  bool overflow = false;
  switch (op) {
    case BinOp::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case BinOp::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case BinOp::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    default: return std::nullopt;
  }
  if (overflow) return std::nullopt;
  return r;
}

using Bound = Interval::Bound;

// Lower/upper bounds with nullopt meaning -inf / +inf respectively.
Bound add_bound(Bound a, Bound b) {
  if (!a || !b) return std::nullopt;
  return checked(BinOp::Add, *a, *b);
}

bool is_int(const Scalar& s) { return s.ints() || s.range(); }

}  // namespace

Scalar IntOps::constant(std::int64_t v) const {
  if (opts_.domain == IntDomain::Interval) return Interval::constant(v);
  return ValueSet::singleton(v);
}

Scalar IntOps::int_top() const {
  if (opts_.domain == IntDomain::Interval) return Interval::top();
  return ValueSet::top();
}

Scalar IntOps::boolean(bool may_true, bool may_false) const {
  if (opts_.domain == IntDomain::Interval) {
    if (may_true && may_false) return Interval::of(0, 1);
    if (may_true) return Interval::constant(1);
    if (may_false) return Interval::constant(0);
    return Interval();
  }
  std::vector<std::int64_t> v;
  if (may_false) v.push_back(0);
  if (may_true) v.push_back(1);
  return ValueSet::of(v);
}

namespace {

/// Integer view of a scalar in the active domain.
Scalar as_int(const IntOps& ops, const Scalar& s) {
  if (s.is_bot()) return s;
  if (is_int(s)) return s;
  return ops.int_top();
}

struct MayRel {
  bool may_true = true;
  bool may_false = true;
};

MayRel compare_ints(const Scalar& a, const Scalar& b, Rel r) {
  if (auto* x = a.ints()) {
    auto* y = b.ints();
    if (!y || x->is_top() || y->is_top()) return {};
    MayRel m{false, false};
    for (auto u : x->elements()) {
      for (auto v : y->elements()) {
        (holds(r, u, v) ? m.may_true : m.may_false) = true;
        if (m.may_true && m.may_false) return m;
      }
    }
    return m;
  }
  auto* x = a.range();
  auto* y = b.range();
  if (!x || !y) return {};
  // Decide via bounds: nullopt lo is -inf, nullopt hi is +inf.
  auto lt_possible = [](const Interval& p, const Interval& q, bool strict) {
    if (!p.lo() || !q.hi()) return true;
    return strict ? *p.lo() < *q.hi() : *p.lo() <= *q.hi();
  };
  auto disjoint = [](const Interval& p, const Interval& q) { return p.meet(q).is_bot(); };
  auto single_equal = [](const Interval& p, const Interval& q) {
    return p.lo() && p.hi() && q.lo() && q.hi() && *p.lo() == *p.hi() && *q.lo() == *q.hi() &&
           *p.lo() == *q.lo();
  };
  switch (r) {
    case Rel::Lt: return {lt_possible(*x, *y, true), lt_possible(*y, *x, false)};
    case Rel::Le: return {lt_possible(*x, *y, false), lt_possible(*y, *x, true)};
    case Rel::Gt: return {lt_possible(*y, *x, true), lt_possible(*x, *y, false)};
    case Rel::Ge: return {lt_possible(*y, *x, false), lt_possible(*x, *y, true)};
    case Rel::Eq: return {!disjoint(*x, *y), !single_equal(*x, *y)};
    case Rel::Ne: return {!single_equal(*x, *y), !disjoint(*x, *y)};
  }
  return {};
}

MayRel compare_addrs(const AddressSet& a, const AddressSet& b, Rel r) {
  if (r != Rel::Eq && r != Rel::Ne) return {};
  if (a.is_top() || b.is_top()) return {};
  bool may_eq = false;
  for (const auto& x : a.addresses()) {
    if (std::binary_search(b.addresses().begin(), b.addresses().end(), x)) may_eq = true;
  }
  bool must_eq = a.addresses().size() == 1 && b.addresses().size() == 1 && may_eq;
  if (r == Rel::Eq) return {may_eq, !must_eq};
  return {!must_eq, may_eq};
}

MayRel compare(const IntOps& ops, const Scalar& a, const Scalar& b, Rel r) {
  if (a.is_bot() || b.is_bot()) return {false, false};
  if (a.addrs() && b.addrs()) return compare_addrs(*a.addrs(), *b.addrs(), r);
  if (a.addrs() || b.addrs()) return {};
  return compare_ints(as_int(ops, a), as_int(ops, b), r);
}

Scalar arith(const IntOps& ops, BinOp op, const Scalar& a0, const Scalar& b0) {
  Scalar a = as_int(ops, a0);
  Scalar b = as_int(ops, b0);
  if (a.is_bot() || b.is_bot()) return Scalar();
  if (auto* x = a.ints()) {
    auto* y = b.ints();
    if (!y || x->is_top() || y->is_top()) return ValueSet::top();
    const std::size_t bound = ops.options().widen.value_set_bound;
    std::vector<std::int64_t> out;
    for (auto u : x->elements()) {
      for (auto v : y->elements()) {
        auto r = checked(op, u, v);
        if (!r) return ValueSet::top();
        out.push_back(*r);
      }
    }
    return ValueSet::of(std::move(out)).capped(bound);
  }
  auto* x = a.range();
  auto* y = b.range();
  if (!x || !y) return Interval::top();
  auto neg = [](Bound v) -> Bound {
    if (!v || *v == std::numeric_limits<std::int64_t>::min()) return std::nullopt;
    return -*v;
  };
  switch (op) {
    case BinOp::Add:
      return Interval::of(add_bound(x->lo(), y->lo()), add_bound(x->hi(), y->hi()));
    case BinOp::Sub:
      return Interval::of(add_bound(x->lo(), neg(y->hi())), add_bound(x->hi(), neg(y->lo())));
    case BinOp::Mul: {
      if (!x->lo() || !x->hi() || !y->lo() || !y->hi()) return Interval::top();
      std::vector<std::int64_t> c;
      for (auto u : {*x->lo(), *x->hi()}) {
        for (auto v : {*y->lo(), *y->hi()}) {
          auto r = checked(BinOp::Mul, u, v);
          if (!r) return Interval::top();
          c.push_back(*r);
        }
      }
      return Interval::of(*std::min_element(c.begin(), c.end()), *std::max_element(c.begin(), c.end()));
    }
    default:
      return Interval::top();
  }
}

Scalar refine_rel(const IntOps& ops, const Scalar& x, Rel r, const Scalar& c) {
  if (x.is_bot() || c.is_bot()) return Scalar();
  if (x.addrs() || c.addrs()) {
    auto* px = x.addrs();
    auto* pc = c.addrs();
    if (!px || !pc || px->is_top() || pc->is_top()) return x;
    if (r == Rel::Eq) {
      std::vector<std::string> keep;
      for (const auto& a : px->addresses()) {
        if (std::binary_search(pc->addresses().begin(), pc->addresses().end(), a)) keep.push_back(a);
      }
      return AddressSet::of(keep);
    }
    if (r == Rel::Ne && pc->addresses().size() == 1) {
      std::vector<std::string> keep;
      for (const auto& a : px->addresses()) {
        if (a != pc->addresses().front()) keep.push_back(a);
      }
      return AddressSet::of(keep);
    }
    return x;
  }
  Scalar xi = as_int(ops, x);
  Scalar ci = as_int(ops, c);
  if (auto* vx = xi.ints()) {
    auto* vc = ci.ints();
    if (!vc) return x;
    if (vx->is_top()) {
      if (r == Rel::Eq && !vc->is_top()) return *vc;
      return x;
    }
    if (vc->is_top()) return x;
    std::vector<std::int64_t> keep;
    for (auto u : vx->elements()) {
      for (auto v : vc->elements()) {
        if (holds(r, u, v)) {
          keep.push_back(u);
          break;
        }
      }
    }
    return ValueSet::of(keep);
  }
  auto* ix = xi.range();
  auto* ic = ci.range();
  if (!ix || !ic) return x;
  auto minus1 = [](Bound b) -> Bound { return b ? checked(BinOp::Sub, *b, 1) : b; };
  auto plus1 = [](Bound b) -> Bound { return b ? checked(BinOp::Add, *b, 1) : b; };
  Interval out = *ix;
  switch (r) {
    case Rel::Lt: out = ix->meet(Interval::of(std::nullopt, minus1(ic->hi()))); break;
    case Rel::Le: out = ix->meet(Interval::of(std::nullopt, ic->hi())); break;
    case Rel::Gt: out = ix->meet(Interval::of(plus1(ic->lo()), std::nullopt)); break;
    case Rel::Ge: out = ix->meet(Interval::of(ic->lo(), std::nullopt)); break;
    case Rel::Eq: out = ix->meet(*ic); break;
    case Rel::Ne:
      if (ic->lo() && ic->hi() && *ic->lo() == *ic->hi()) {
        const std::int64_t k = *ic->lo();
        Bound lo = ix->lo();
        Bound hi = ix->hi();
        if (lo && *lo == k) lo = plus1(lo);
        if (hi && *hi == k) hi = minus1(hi);
        out = Interval::of(lo, hi);
      }
      break;
  }
  return out;
}

}  // namespace

Scalar IntOps::binop(BinOp op, const Scalar& a, const Scalar& b) const {
  if (is_comparison(op)) {
    MayRel m = compare(*this, a, b, rel_of(op));
    return boolean(m.may_true, m.may_false);
  }
  return arith(*this, op, a, b);
}

Truth IntOps::truth(const Scalar& v) const {
  if (v.is_bot()) return {false, false};
  if (auto* x = v.ints()) {
    if (x->is_top()) return {true, true};
    Truth t;
    for (auto e : x->elements()) (e == 0 ? t.may_zero : t.may_nonzero) = true;
    return t;
  }
  if (auto* x = v.range()) {
    bool only_zero = x->lo() && x->hi() && *x->lo() == 0 && *x->hi() == 0;
    return {x->contains(0), !only_zero};
  }
  if (auto* x = v.addrs()) {
    if (x->is_top()) return {true, true};
    Truth t;
    for (const auto& a : x->addresses()) (a == AddressSet::kNull ? t.may_zero : t.may_nonzero) = true;
    return t;
  }
  return {true, true};
}

Scalar IntOps::refine(const Scalar& x, BinOp op, const Scalar& c) const {
  return refine_rel(*this, x, rel_of(op), c);
}

// ---------------------------------------------------------------------------

namespace {

Scalar lookup_var(const std::string& name, const Env& env, const IsLocal& is_local,
                  const GlobalValues& globals) {
  if (is_local(name)) return env.get(name);
  auto it = globals.find(name);
  return it == globals.end() ? Scalar() : it->second;
}

void collect(const Expr& e, const Env& env, const IsLocal& is_local, const GlobalValues& known,
             std::set<std::string>& missing, std::set<std::string>* reads) {
  switch (e.kind) {
    case Expr::Kind::Var:
      if (!is_local(e.name)) {
        if (reads) reads->insert(e.name);
        if (!known.count(e.name)) missing.insert(e.name);
      }
      return;
    case Expr::Kind::Deref: {
      if (!is_local(e.name)) {
        if (reads) reads->insert(e.name);
        if (!known.count(e.name)) {
          missing.insert(e.name);
          return;
        }
      }
      Scalar p = lookup_var(e.name, env, is_local, known);
      if (auto* a = p.addrs(); a && !a->is_top()) {
        for (const auto& h : a->addresses()) {
          if (h == AddressSet::kNull) continue;
          if (reads) reads->insert(h);
          if (!known.count(h)) missing.insert(h);
        }
      }
      return;
    }
    case Expr::Kind::Bin:
      collect(*e.lhs, env, is_local, known, missing, reads);
      collect(*e.rhs, env, is_local, known, missing, reads);
      return;
    default:
      return;
  }
}

}  // namespace

std::set<std::string> missing_globals(const Expr& e, const Env& env, const IsLocal& is_local,
                                      const GlobalValues& known) {
  std::set<std::string> missing;
  collect(e, env, is_local, known, missing, nullptr);
  return missing;
}

std::set<std::string> read_globals(const Expr& e, const Env& env, const IsLocal& is_local,
                                   const GlobalValues& globals) {
  std::set<std::string> missing, reads;
  collect(e, env, is_local, globals, missing, &reads);
  return reads;
}

Scalar eval_expr(const IntOps& ops, const Expr& e, const Env& env, const IsLocal& is_local,
                 const GlobalValues& globals) {
  switch (e.kind) {
    case Expr::Kind::Int: return ops.constant(e.value);
    case Expr::Kind::Null: return AddressSet::of({AddressSet::kNull});
    case Expr::Kind::Var: return lookup_var(e.name, env, is_local, globals);
    case Expr::Kind::AddrOf: return AddressSet::of({e.name});
    case Expr::Kind::Deref: {
      Scalar p = lookup_var(e.name, env, is_local, globals);
      if (p.is_bot()) return Scalar();
      auto* a = p.addrs();
      if (!a || a->is_top()) return Scalar::top();
      Scalar out;
      for (const auto& h : a->addresses()) {
        if (h == AddressSet::kNull) continue;
        auto it = globals.find(h);
        if (it != globals.end()) out = out.join(it->second);
      }
      return out;
    }
    case Expr::Kind::Bin:
      return ops.binop(e.op, eval_expr(ops, *e.lhs, env, is_local, globals),
                       eval_expr(ops, *e.rhs, env, is_local, globals));
  }
  return Scalar::top();
}

std::optional<Env> refine_guard(const IntOps& ops, const Expr& cond, bool positive,
                                const Env& env, const IsLocal& is_local,
                                const GlobalValues& globals) {
  if (env.is_bot()) return std::nullopt;
  Truth t = ops.truth(eval_expr(ops, cond, env, is_local, globals));
  if (positive ? !t.may_nonzero : !t.may_zero) return std::nullopt;

  Env out = env;
  auto narrow_var = [&](const std::string& x, Rel r, const Scalar& c) -> bool {
    Scalar old = out.get(x);
    Scalar nv = refine_rel(ops, old, r, c);
    if (nv.is_bot()) return false;
    if (!nv.is_top() && nv.leq(old) && !(nv == old)) out = out.set(x, nv);
    return true;
  };

  if (cond.kind == Expr::Kind::Bin && is_comparison(cond.op)) {
    Rel r = rel_of(cond.op);
    if (!positive) r = negate(r);
    if (cond.lhs->kind == Expr::Kind::Var && is_local(cond.lhs->name)) {
      Scalar c = eval_expr(ops, *cond.rhs, out, is_local, globals);
      if (!narrow_var(cond.lhs->name, r, c)) return std::nullopt;
    }
    if (cond.rhs->kind == Expr::Kind::Var && is_local(cond.rhs->name)) {
      Scalar c = eval_expr(ops, *cond.lhs, out, is_local, globals);
      if (!narrow_var(cond.rhs->name, flip(r), c)) return std::nullopt;
    }
  } else if (cond.kind == Expr::Kind::Var && is_local(cond.name)) {
    Scalar v = out.get(cond.name);
    Scalar zero = v.addrs() ? Scalar(AddressSet::of({AddressSet::kNull})) : ops.constant(0);
    if (!narrow_var(cond.name, positive ? Rel::Ne : Rel::Eq, zero)) return std::nullopt;
  }
  return out;
}

}  // namespace incr::minic
