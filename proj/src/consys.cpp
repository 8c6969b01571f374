#include "incr/consys.hpp"

#include <sstream>

namespace incr {

std::string context_str(const Context& ctx) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [k, v] : ctx) {
    if (!first) os << ',';
    first = false;
    os << k << "->" << v.str();
  }
  os << '}';
  return os.str();
}

Json context_to_json(const Context& ctx) {
  Json j = Json::object();
  for (const auto& [k, v] : ctx) j[k] = dom::to_json(v);
  return j;
}

Context context_from_json(const Json& j) {
  Context ctx;
  for (const auto& [k, v] : j.items()) ctx[k] = dom::value_from_json(v);
  return ctx;
}

// ---------------------------------------------------------------------------
// UnknownId

UnknownId::UnknownId(Rep r) {
  r.ctx_key = r.kind == UnknownKind::Node ? context_str(r.ctx) : std::string();
  switch (r.kind) {
    case UnknownKind::Init: r.text = "init"; break;
    case UnknownKind::Harness: r.text = "__main"; break;
    case UnknownKind::Global: r.text = r.name; break;
    case UnknownKind::Acc: r.text = "acc(" + r.name + ")"; break;
    case UnknownKind::Var: r.text = r.name; break;
    case UnknownKind::Node:
      r.text = "<" + r.name + ":" + std::to_string(r.node) + "," + r.ctx_key + ">";
      break;
  }
  rep_ = std::make_shared<const Rep>(std::move(r));
}

UnknownId::UnknownId() : UnknownId(Rep{UnknownKind::Var, "", 0, {}, {}, {}}) {}
UnknownId UnknownId::init() { return UnknownId(Rep{UnknownKind::Init, "", 0, {}, {}, {}}); }
UnknownId UnknownId::harness() { return UnknownId(Rep{UnknownKind::Harness, "", 0, {}, {}, {}}); }
UnknownId UnknownId::global(std::string name) {
  return UnknownId(Rep{UnknownKind::Global, std::move(name), 0, {}, {}, {}});
}
UnknownId UnknownId::acc(std::string global) {
  return UnknownId(Rep{UnknownKind::Acc, std::move(global), 0, {}, {}, {}});
}
UnknownId UnknownId::node(std::string fn, std::uint32_t node, Context ctx) {
  return UnknownId(Rep{UnknownKind::Node, std::move(fn), node, std::move(ctx), {}, {}});
}
UnknownId UnknownId::var(std::string name) {
  return UnknownId(Rep{UnknownKind::Var, std::move(name), 0, {}, {}, {}});
}

bool operator==(const UnknownId& a, const UnknownId& b) {
  if (a.rep_ == b.rep_) return true;
  return a.rep_->kind == b.rep_->kind && a.rep_->node == b.rep_->node &&
         a.rep_->name == b.rep_->name && a.rep_->ctx_key == b.rep_->ctx_key;
}

bool operator<(const UnknownId& a, const UnknownId& b) {
  if (a.rep_ == b.rep_) return false;
  const auto& x = *a.rep_;
  const auto& y = *b.rep_;
  if (x.kind != y.kind) return x.kind < y.kind;
  if (x.name != y.name) return x.name < y.name;
  if (x.node != y.node) return x.node < y.node;
  return x.ctx_key < y.ctx_key;
}

namespace {
const char* kind_tag(UnknownKind k) {
  switch (k) {
    case UnknownKind::Init: return "init";
    case UnknownKind::Harness: return "harness";
    case UnknownKind::Global: return "global";
    case UnknownKind::Acc: return "acc";
    case UnknownKind::Node: return "node";
    case UnknownKind::Var: return "var";
  }
  return "?";
}
}  // namespace

Json to_json(const UnknownId& x) {
  Json j{{"k", kind_tag(x.kind())}};
  switch (x.kind()) {
    case UnknownKind::Init:
    case UnknownKind::Harness:
      break;
    case UnknownKind::Node:
      j["fn"] = x.name();
      j["n"] = x.node_id();
      j["ctx"] = context_to_json(x.ctx());
      break;
    default:
      j["name"] = x.name();
  }
  return j;
}

UnknownId unknown_from_json(const Json& j) {
  const auto k = j.at("k").get<std::string>();
  if (k == "init") return UnknownId::init();
  if (k == "harness") return UnknownId::harness();
  if (k == "global") return UnknownId::global(j.at("name").get<std::string>());
  if (k == "acc") return UnknownId::acc(j.at("name").get<std::string>());
  if (k == "var") return UnknownId::var(j.at("name").get<std::string>());
  if (k == "node") {
    return UnknownId::node(j.at("fn").get<std::string>(), j.at("n").get<std::uint32_t>(),
                           context_from_json(j.at("ctx")));
  }
  throw std::invalid_argument("unknown kind in state: " + k);
}

// ---------------------------------------------------------------------------
// Trees

TreePtr ans(AbstractValue v) {
  auto t = std::make_shared<Tree>();
  t->tag = Tree::Tag::Ans;
  t->value = std::move(v);
  return t;
}

TreePtr qget(UnknownId x, Cont k) {
  auto t = std::make_shared<Tree>();
  t->tag = Tree::Tag::Get;
  t->target = std::move(x);
  t->k = std::move(k);
  return t;
}

TreePtr qset(UnknownId x, AbstractValue d, TreePtr next) {
  auto t = std::make_shared<Tree>();
  t->tag = Tree::Tag::Set;
  t->target = std::move(x);
  t->value = std::move(d);
  t->next = std::move(next);
  return t;
}

AbstractValue run_tree(const TreePtr& root, const GetFn& get, const SetFn& set) {
  TreePtr t = root;
  while (true) {
    if (!t) throw std::logic_error("strategy tree: null subtree");
    switch (t->tag) {
      case Tree::Tag::Ans:
        return t->value;
      case Tree::Tag::Get: {
        AbstractValue v = get(t->target);
        t = t->k(v);
        break;
      }
      case Tree::Tag::Set:
        set(t->target, t->value);
        t = t->next;
        break;
    }
  }
}

std::pair<EvalState, AbstractValue> eval_tree(const TreePtr& t, const GetFn& lookup,
                                              EvalState s) {
  AbstractValue result = run_tree(
      t,
      [&](const UnknownId& x) {
        s.queried.insert(x);
        return lookup(x);
      },
      [&](const UnknownId& x, const AbstractValue& d) {
        auto& slot = s.sides[x];
        try {
          slot = slot.join(d);
        } catch (const dom::DomainMismatch& e) {
          throw EvalError(x, e.what());
        }
      });
  return {std::move(s), std::move(result)};
}

std::set<UnknownId> queried_deps(const TreePtr& t, const GetFn& lookup) {
  return eval_tree(t, lookup).first.queried;
}

namespace {
ExplicitTree expand(const TreePtr& t, const std::vector<AbstractValue>& samples,
                    std::size_t depth) {
  ExplicitTree e;
  e.tag = t->tag;
  if (depth == 0 && t->tag != Tree::Tag::Ans) {
    e.truncated = true;
    e.target = t->target;
    return e;
  }
  switch (t->tag) {
    case Tree::Tag::Ans:
      e.value = t->value;
      break;
    case Tree::Tag::Get:
      e.target = t->target;
      for (const auto& s : samples) e.branches.emplace_back(s, expand(t->k(s), samples, depth - 1));
      break;
    case Tree::Tag::Set:
      e.target = t->target;
      e.value = t->value;
      e.next.push_back(expand(t->next, samples, depth - 1));
      break;
  }
  return e;
}
}  // namespace

ExplicitTree materialize(const TreePtr& t, const std::vector<AbstractValue>& samples,
                         std::size_t max_depth) {
  return expand(t, samples, max_depth);
}

std::optional<TreePtr> TableSystem::rhs(const UnknownId& x, EvalMode) const {
  auto it = rhs_.find(x);
  if (it == rhs_.end()) return std::nullopt;
  return it->second;
}

}  // namespace incr
