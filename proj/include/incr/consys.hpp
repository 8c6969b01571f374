#pragma once

// Side-effecting constraint systems whose right-hand sides are strategy
// trees: Ans(d) | QGet(x, k) | QSet(x, d, t).

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incr/domains.hpp"

namespace incr {

using dom::AbstractValue;
using dom::Json;

/// Calling context: parameter name -> abstract value, sorted by name.
using Context = std::map<std::string, AbstractValue>;
std::string context_str(const Context& ctx);
Json context_to_json(const Context& ctx);
Context context_from_json(const Json& j);

enum class UnknownKind : std::uint8_t {
  Init,     // global initialization
  Harness,  // the synthetic __main wrapping init and main
  Global,   // flow-insensitive program global
  Acc,      // write-only access collector of a global
  Node,     // program point decorated with a calling context
  Var,      // named unknown of a hand-written system
};

class UnknownId {
 public:
  UnknownId();  // Var ""
  static UnknownId init();
  static UnknownId harness();
  static UnknownId global(std::string name);
  static UnknownId acc(std::string global);
  static UnknownId node(std::string fn, std::uint32_t node, Context ctx = {});
  static UnknownId var(std::string name);

  UnknownKind kind() const { return rep_->kind; }
  /// Function name for Node, variable name for Global/Acc/Var.
  const std::string& name() const { return rep_->name; }
  std::uint32_t node_id() const { return rep_->node; }
  const Context& ctx() const { return rep_->ctx; }
  bool is_flow_insensitive() const {
    return kind() == UnknownKind::Global || kind() == UnknownKind::Acc;
  }
  bool is_write_only() const { return kind() == UnknownKind::Acc; }

  /// Human-readable canonical form, e.g. "<foo:2,{p->{&g}}>", "g", "acc(g)".
  const std::string& str() const { return rep_->text; }

  friend bool operator==(const UnknownId& a, const UnknownId& b);
  friend bool operator<(const UnknownId& a, const UnknownId& b);
  friend bool operator!=(const UnknownId& a, const UnknownId& b) { return !(a == b); }

 private:
  struct Rep {
    UnknownKind kind;
    std::string name;
    std::uint32_t node = 0;
    Context ctx;
    std::string ctx_key;
    std::string text;
  };
  explicit UnknownId(Rep r);
  std::shared_ptr<const Rep> rep_;
};

Json to_json(const UnknownId& x);
UnknownId unknown_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Strategy trees

struct Tree;
using TreePtr = std::shared_ptr<const Tree>;
using Cont = std::function<TreePtr(const AbstractValue&)>;

struct Tree {
  enum class Tag { Ans, Get, Set };
  Tag tag = Tag::Ans;
  AbstractValue value;  // Ans: result; Set: contribution
  UnknownId target;     // Get / Set
  Cont k;               // Get
  TreePtr next;         // Set
};

TreePtr ans(AbstractValue v);
TreePtr qget(UnknownId x, Cont k);
TreePtr qset(UnknownId x, AbstractValue d, TreePtr next);

/// Failure while evaluating the right-hand side of (or contributing to) an
/// unknown.
class EvalError : public std::runtime_error {
 public:
  EvalError(UnknownId who, const std::string& what)
      : std::runtime_error(who.str() + ": " + what), who_(std::move(who)) {}
  const UnknownId& who() const { return who_; }

 private:
  UnknownId who_;
};

using GetFn = std::function<AbstractValue(const UnknownId&)>;
using SetFn = std::function<void(const UnknownId&, const AbstractValue&)>;

/// Walks a tree, answering queries with `get` and forwarding contributions to
/// `set` in tree order. Returns the final answer.
AbstractValue run_tree(const TreePtr& t, const GetFn& get, const SetFn& set);

struct EvalState {
  std::set<UnknownId> queried;
  std::map<UnknownId, AbstractValue> sides;
  friend bool operator==(const EvalState&, const EvalState&) = default;
};

/// Pure evaluation: queries read `lookup` and are recorded; contributions are
/// joined into `s.sides`. `lookup` is never mutated.
std::pair<EvalState, AbstractValue> eval_tree(const TreePtr& t, const GetFn& lookup,
                                              EvalState s = {});

std::set<UnknownId> queried_deps(const TreePtr& t, const GetFn& lookup);

/// Tree with every continuation expanded over a finite sample of answers.
struct ExplicitTree {
  Tree::Tag tag = Tree::Tag::Ans;
  AbstractValue value;
  UnknownId target;
  std::vector<std::pair<AbstractValue, ExplicitTree>> branches;  // Get
  std::vector<ExplicitTree> next;                                 // Set: exactly one
  bool truncated = false;  // depth bound hit
  friend bool operator==(const ExplicitTree&, const ExplicitTree&) = default;
};

ExplicitTree materialize(const TreePtr& t, const std::vector<AbstractValue>& samples,
                         std::size_t max_depth);

// ---------------------------------------------------------------------------
// Equation systems

/// Solve: ordinary evaluation. Postprocess: re-evaluation after solving, the
/// only mode in which write-only contributions are produced.
enum class EvalMode { Solve, Postprocess };

class EqSys {
 public:
  virtual ~EqSys() = default;
  /// Right-hand side of x, or nullopt for leaves.
  virtual std::optional<TreePtr> rhs(const UnknownId& x, EvalMode mode) const = 0;
  virtual bool has_rhs(const UnknownId& x) const = 0;
  bool is_leaf(const UnknownId& x) const { return !has_rhs(x); }
  virtual std::vector<std::pair<UnknownId, AbstractValue>> starts() const { return {}; }
  virtual UnknownId query() const = 0;
};

/// An equation system given by an explicit table of trees.
class TableSystem : public EqSys {
 public:
  explicit TableSystem(UnknownId query) : query_(std::move(query)) {}
  void define(const UnknownId& x, TreePtr t) { rhs_[x] = std::move(t); }
  void add_start(const UnknownId& x, AbstractValue v) { starts_.emplace_back(x, std::move(v)); }

  std::optional<TreePtr> rhs(const UnknownId& x, EvalMode) const override;
  bool has_rhs(const UnknownId& x) const override { return rhs_.count(x) != 0; }
  std::vector<std::pair<UnknownId, AbstractValue>> starts() const override { return starts_; }
  UnknownId query() const override { return query_; }
  const std::map<UnknownId, TreePtr>& table() const { return rhs_; }

 private:
  UnknownId query_;
  std::map<UnknownId, TreePtr> rhs_;
  std::vector<std::pair<UnknownId, AbstractValue>> starts_;
};

}  // namespace incr
