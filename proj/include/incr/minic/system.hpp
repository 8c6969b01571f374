#pragma once

// Constraint system of a MiniC program: context-sensitive value analysis
// with must-locksets, thread creation, and deferred access recording.

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "incr/consys.hpp"
#include "incr/minic/cfg.hpp"
#include "incr/minic/values.hpp"

namespace incr::minic {

/// Result of checking one unknown in postprocessing.
struct NodeDiagnostic {
  std::string kind;      // "assert" or "unsound-store"
  std::string skeleton;  // location-free message
  std::string message;
  dom::Site site;
  Loc loc;
};

struct DeadRegion {
  std::string fn;
  std::uint32_t head = 0;  // global node id
  Loc loc;
  std::vector<UnknownId> provenance;
};

class MiniCSystem : public EqSys {
 public:
  MiniCSystem(std::shared_ptr<const Program> prog, NodeIds ids, AnalysisOptions opts);

  std::optional<TreePtr> rhs(const UnknownId& x, EvalMode mode) const override;
  bool has_rhs(const UnknownId& x) const override;
  UnknownId query() const override { return UnknownId::harness(); }

  const Program& program() const { return *prog_; }
  std::shared_ptr<const Program> program_ptr() const { return prog_; }
  const NodeIds& node_ids() const { return ids_; }
  const AnalysisOptions& options() const { return opts_; }
  const FunctionCfg& cfg(const std::string& fn) const;
  bool has_function(const std::string& fn) const { return fns_.count(fn) != 0; }

  /// Unknown of the given function's node in a context.
  UnknownId entry_unknown(const std::string& fn, const Context& ctx) const;
  UnknownId return_unknown(const std::string& fn, const Context& ctx) const;

  /// Source location of the statement on the edge `site`, if it exists.
  std::optional<Loc> site_loc(const dom::Site& site) const;
  dom::SourceLoc source_loc(Loc l) const { return {prog_->file, l.line, l.col}; }

  /// Warnings raised by the edges into node unknown x, under `lookup`.
  std::vector<NodeDiagnostic> diagnose(const UnknownId& x, const GetFn& lookup) const;

  /// Maximal unreachable regions of analyzed functions.
  std::vector<DeadRegion> dead_code(const std::map<UnknownId, AbstractValue>& sigma) const;

 private:
  struct FnInfo {
    FunctionCfg cfg;
    std::vector<std::uint32_t> gid;                        // local -> global
    std::unordered_map<std::uint32_t, std::uint32_t> local;  // global -> local
    std::set<std::string> locals;                           // params, declared locals, ret
  };

  const FnInfo* info(const std::string& fn) const;
  TreePtr node_rhs(const FnInfo& f, std::uint32_t local, const UnknownId& self, EvalMode mode) const;
  TreePtr transfer(const FnInfo& f, const Edge& e, const UnknownId& self,
                   const dom::LocalState& in, EvalMode mode,
                   std::function<TreePtr(dom::LocalState)> k) const;
  Context callee_context(const Function& callee, const std::vector<Scalar>& args) const;
  dom::LocalState entry_state(const Function& callee, const Context& ctx, dom::Lockset locks) const;

  std::shared_ptr<const Program> prog_;
  NodeIds ids_;
  AnalysisOptions opts_;
  IntOps ops_;
  std::map<std::string, FnInfo> fns_;
};

}  // namespace incr::minic
