#pragma once

// Integer and pointer semantics of MiniC expressions over Scalar values.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "incr/domains.hpp"
#include "incr/minic/ast.hpp"

namespace incr::minic {

using dom::Env;
using dom::Scalar;

enum class IntDomain { ValueSet, Interval };

struct AnalysisOptions {
  IntDomain domain = IntDomain::ValueSet;
  dom::WidenConfig widen;  // also caps value-set arithmetic
  friend bool operator==(const AnalysisOptions& a, const AnalysisOptions& b) {
    return a.domain == b.domain && a.widen.value_set_bound == b.widen.value_set_bound;
  }
};

struct Truth {
  bool may_zero = false;
  bool may_nonzero = false;
};

class IntOps {
 public:
  explicit IntOps(AnalysisOptions o) : opts_(o) {}
  Scalar constant(std::int64_t v) const;
  Scalar int_top() const;
  Scalar boolean(bool may_true, bool may_false) const;
  Scalar binop(BinOp op, const Scalar& a, const Scalar& b) const;
  Truth truth(const Scalar& v) const;
  /// Greatest value below `x` whose elements may satisfy `x op c`; Bot if
  /// none can.
  Scalar refine(const Scalar& x, BinOp op, const Scalar& c) const;
  const AnalysisOptions& options() const { return opts_; }

 private:
  AnalysisOptions opts_;
};

/// Values of globals available to a pure evaluation.
using GlobalValues = std::map<std::string, Scalar>;

/// Resolves a name to a local (true) or a global (false).
using IsLocal = std::function<bool(const std::string&)>;

/// Globals whose values an evaluation of `e` needs beyond `known`; pointer
/// dereferences contribute their pointees once the pointer value is known.
std::set<std::string> missing_globals(const Expr& e, const Env& env, const IsLocal& is_local,
                                      const GlobalValues& known);

/// Globals read by `e` (including dereferenced pointees), given full values.
std::set<std::string> read_globals(const Expr& e, const Env& env, const IsLocal& is_local,
                                   const GlobalValues& globals);

Scalar eval_expr(const IntOps& ops, const Expr& e, const Env& env, const IsLocal& is_local,
                 const GlobalValues& globals);

/// Refines the environment under the assumption that `cond` evaluates to
/// nonzero (positive) or zero. nullopt means the branch is infeasible.
std::optional<Env> refine_guard(const IntOps& ops, const Expr& cond, bool positive,
                                const Env& env, const IsLocal& is_local,
                                const GlobalValues& globals);

}  // namespace incr::minic
