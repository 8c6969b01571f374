#pragma once

// Postprocessing after a solver run: re-evaluation of unknowns that did not
// stay stable, deferred access emission, warnings, and warning diffs.

#include <map>
#include <string>
#include <vector>

#include "incr/minic/system.hpp"
#include "incr/tdsolver.hpp"

namespace incr {

struct Warning {
  std::string id;    // hash of kind, provenance and skeleton; location-free
  std::string kind;  // race, assert, unsound-store, dead-code
  std::string message;
  std::vector<dom::SourceLoc> locations;
  std::vector<std::string> provenance;  // canonical unknown ids, sorted
  std::vector<dom::Site> sites;         // used to refresh locations on reuse

  Json to_json() const;
  static Warning from_json(const Json& j);
  friend bool operator==(const Warning&, const Warning&) = default;
};

/// FNV-1a over the identity-relevant parts of a warning, as 16 hex digits.
std::string warning_id(const std::string& kind, const std::vector<std::string>& provenance,
                       const std::string& skeleton);

struct WarnStore {
  std::map<UnknownId, std::vector<Warning>> by_unknown;
  // producer -> global -> records
  std::map<UnknownId, std::map<std::string, std::vector<dom::Access>>> accesses;
  std::vector<Warning> whole;  // races and dead code

  /// Every warning, merged by id and sorted by id.
  std::vector<Warning> all() const;
  Json warnings_json() const;
  Json to_json() const;
  static WarnStore from_json(const Json& j);
  friend bool operator==(const WarnStore&, const WarnStore&) = default;
};

struct PostprocessResult {
  WarnStore store;
  std::vector<UnknownId> reevaluated;
  std::size_t reused = 0;
};

class PostprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prunes the state, re-evaluates stable but not superstable unknowns with
/// access emission enabled, reuses `prev` for superstable ones, and derives
/// races and dead code over the result.
PostprocessResult postprocess(const minic::MiniCSystem& sys, SolverState& st, const WarnStore* prev);

/// Race warnings for the merged access records of each global.
std::vector<Warning> races(const std::map<std::string, std::vector<dom::Access>>& by_global);

struct WarningDiff {
  std::vector<Warning> added;
  std::vector<Warning> removed;
  std::vector<Warning> kept;  // with the new locations
  Json to_json() const;
};

WarningDiff diff_warnings(const std::vector<Warning>& old_ws, const std::vector<Warning>& new_ws);

}  // namespace incr
