#include "incr/minic/cfg.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace incr::minic {

namespace {

constexpr std::uint32_t kRet = std::numeric_limits<std::uint32_t>::max();

class Builder {
 public:
  explicit Builder(const Function& f) { cfg_.fn = &f; }

  FunctionCfg build() {
    cfg_.entry = fresh();
    std::optional<std::uint32_t> cur = cfg_.entry;
    block(cur, cfg_.fn->body);
    if (cur) {
      Edge e;
      e.kind = EdgeKind::Return;
      e.src = *cur;
      e.dst = kRet;
      e.loc = cfg_.fn->loc;
      cfg_.edges.push_back(e);
    }
    cfg_.ret = fresh();
    cfg_.num_nodes = next_;
    cfg_.preds.assign(next_, {});
    cfg_.succs.assign(next_, {});
    for (std::size_t i = 0; i < cfg_.edges.size(); ++i) {
      auto& e = cfg_.edges[i];
      if (e.dst == kRet) e.dst = cfg_.ret;
      cfg_.preds[e.dst].push_back(i);
      cfg_.succs[e.src].push_back(i);
    }
    std::sort(locals_.begin(), locals_.end());
    cfg_.locals = locals_;
    return std::move(cfg_);
  }

 private:
  std::uint32_t fresh() { return next_++; }

  std::uint32_t source(std::optional<std::uint32_t>& cur) {
    if (!cur) cur = fresh();  // unreachable code after a return
    return *cur;
  }

  void edge(EdgeKind k, std::uint32_t src, std::uint32_t dst, const Stmt* s, Loc loc) {
    Edge e;
    e.kind = k;
    e.src = src;
    e.dst = dst;
    e.stmt = s;
    e.loc = loc;
    cfg_.edges.push_back(e);
  }

  void guard(std::uint32_t src, std::uint32_t dst, const ExprPtr& c, bool positive, const Stmt& s) {
    Edge e;
    e.kind = EdgeKind::Guard;
    e.src = src;
    e.dst = dst;
    e.stmt = &s;
    e.cond = c;
    e.positive = positive;
    e.loc = c->loc;
    cfg_.edges.push_back(e);
  }

  void simple(std::optional<std::uint32_t>& cur, EdgeKind k, const Stmt& s) {
    std::uint32_t src = source(cur);
    std::uint32_t dst = fresh();
    edge(k, src, dst, &s, s.loc);
    cur = dst;
  }

  void block(std::optional<std::uint32_t>& cur, const Block& b) {
    for (const auto& s : b) stmt(cur, s);
  }

  void stmt(std::optional<std::uint32_t>& cur, const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Decl:
        locals_.push_back(s.name);
        if (s.expr) simple(cur, EdgeKind::Assign, s);
        break;
      case Stmt::Kind::Assign: simple(cur, EdgeKind::Assign, s); break;
      case Stmt::Kind::Store: simple(cur, EdgeKind::Store, s); break;
      case Stmt::Kind::Call: simple(cur, EdgeKind::Call, s); break;
      case Stmt::Kind::Lock: simple(cur, EdgeKind::Lock, s); break;
      case Stmt::Kind::Unlock: simple(cur, EdgeKind::Unlock, s); break;
      case Stmt::Kind::Create: simple(cur, EdgeKind::Create, s); break;
      case Stmt::Kind::Assert: simple(cur, EdgeKind::Assert, s); break;
      case Stmt::Kind::Return: {
        std::uint32_t src = source(cur);
        edge(EdgeKind::Return, src, kRet, &s, s.loc);
        cur.reset();
        break;
      }
      case Stmt::Kind::While: {
        std::uint32_t head = source(cur);
        if (head == cfg_.entry) {
          // The entry must not have incoming edges.
          head = fresh();
          edge(EdgeKind::Skip, cfg_.entry, head, nullptr, s.loc);
        }
        std::optional<std::uint32_t> body = fresh();
        guard(head, *body, s.expr, true, s);
        block(body, s.body);
        if (body) edge(EdgeKind::Skip, *body, head, nullptr, s.loc);
        std::uint32_t exit = fresh();
        guard(head, exit, s.expr, false, s);
        cur = exit;
        break;
      }
      case Stmt::Kind::If: {
        std::uint32_t src = source(cur);
        std::optional<std::uint32_t> then_end = fresh();
        guard(src, *then_end, s.expr, true, s);
        block(then_end, s.body);
        std::optional<std::uint32_t> else_end;
        if (s.has_else) {
          else_end = fresh();
          guard(src, *else_end, s.expr, false, s);
          block(else_end, s.orelse);
          if (!then_end && !else_end) {
            cur.reset();
            break;
          }
          std::uint32_t join = fresh();
          if (then_end) edge(EdgeKind::Skip, *then_end, join, nullptr, s.loc);
          if (else_end) edge(EdgeKind::Skip, *else_end, join, nullptr, s.loc);
          cur = join;
        } else {
          std::uint32_t join = fresh();
          if (then_end) edge(EdgeKind::Skip, *then_end, join, nullptr, s.loc);
          guard(src, join, s.expr, false, s);
          cur = join;
        }
        break;
      }
    }
  }

  FunctionCfg cfg_;
  std::uint32_t next_ = 0;
  std::vector<std::string> locals_;
};

}  // namespace

FunctionCfg build_cfg(const Function& f) { return Builder(f).build(); }

NodeIds assign_fresh(const Program& p, const std::map<std::string, FunctionCfg>& cfgs) {
  NodeIds ids;
  for (const auto& f : p.functions) {
    const auto& cfg = cfgs.at(f.name);
    auto& v = ids.ids[f.name];
    for (std::uint32_t i = 0; i < cfg.num_nodes; ++i) v.push_back(ids.next++);
  }
  return ids;
}

dom::Json NodeIds::to_json() const {
  return dom::Json{{"next", next}, {"ids", ids}};
}

NodeIds NodeIds::from_json(const dom::Json& j) {
  NodeIds n;
  n.next = j.at("next").get<std::uint32_t>();
  n.ids = j.at("ids").get<std::map<std::string, std::vector<std::uint32_t>>>();
  return n;
}

}  // namespace incr::minic
