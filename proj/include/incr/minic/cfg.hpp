#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "incr/domains.hpp"
#include "incr/minic/ast.hpp"

namespace incr::minic {

enum class EdgeKind { Skip, Assign, Store, Guard, Lock, Unlock, Create, Call, Return, Assert };

/// One CFG edge. Node numbers are function-local indices; `stmt` points into
/// the owning Program.
struct Edge {
  EdgeKind kind = EdgeKind::Skip;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  const Stmt* stmt = nullptr;  // null for synthetic edges
  ExprPtr cond;                // Guard
  bool positive = true;        // Guard
  Loc loc;
};

/// Control-flow graph of one function. Local index 0 is the entry; the
/// return node has the highest index.
struct FunctionCfg {
  const Function* fn = nullptr;
  std::uint32_t entry = 0;
  std::uint32_t ret = 0;
  std::uint32_t num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> preds;  // local node -> incoming edge indices
  std::vector<std::vector<std::size_t>> succs;  // local node -> outgoing edge indices
  std::vector<std::string> locals;  // declared non-parameter locals, sorted
};

FunctionCfg build_cfg(const Function& f);

/// Program-wide node identities: function name -> global id per local index.
struct NodeIds {
  std::map<std::string, std::vector<std::uint32_t>> ids;
  std::uint32_t next = 0;

  std::uint32_t entry(const std::string& fn) const { return ids.at(fn).front(); }
  std::uint32_t ret(const std::string& fn) const { return ids.at(fn).back(); }
  dom::Json to_json() const;
  static NodeIds from_json(const dom::Json& j);
  friend bool operator==(const NodeIds&, const NodeIds&) = default;
};

/// Numbers all nodes in source order of the functions, starting at 0.
NodeIds assign_fresh(const Program& p, const std::map<std::string, FunctionCfg>& cfgs);

}  // namespace incr::minic
