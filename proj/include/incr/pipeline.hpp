#pragma once

// End-to-end runs over MiniC sources and the persisted state bundle.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "incr/increment.hpp"
#include "incr/minic/parser.hpp"
#include "incr/minic/system.hpp"
#include "incr/postproc.hpp"
#include "incr/tdsolver.hpp"

namespace incr {

inline constexpr int kBundleFormat = 1;

/// Options that shape analysis results; a bundle only reloads under equal ones.
struct AnalysisConfig {
  minic::AnalysisOptions analysis;
  bool wpoint_restart = false;  // also enables localized widening

  SolverOptions solver_options() const;
  Json to_json() const;
  static AnalysisConfig from_json(const Json& j);
  friend bool operator==(const AnalysisConfig& a, const AnalysisConfig& b) {
    return a.analysis == b.analysis && a.wpoint_restart == b.wpoint_restart;
  }
};

struct StateBundle {
  int format = kBundleFormat;
  std::string file;
  std::string source;
  minic::NodeIds ids;
  SolverState state;
  WarnStore warnings;
  AnalysisConfig config;

  Json to_json() const;
  static StateBundle from_json(const Json& j);
};

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::filesystem::path bundle_path(const std::filesystem::path& state_dir);
void save_bundle(const std::filesystem::path& state_dir, const StateBundle& b);
/// nullopt if no bundle exists; throws BundleError on format or option
/// mismatch.
std::optional<StateBundle> load_bundle(const std::filesystem::path& state_dir, const AnalysisConfig& cfg);

/// A parsed program with its CFGs and system under a node-id assignment.
struct Frontend {
  std::shared_ptr<const minic::Program> prog;
  std::map<std::string, minic::FunctionCfg> cfgs;
  std::unique_ptr<minic::MiniCSystem> sys;

  static std::map<std::string, minic::FunctionCfg> cfgs_of(const minic::Program& p);
  Frontend(std::shared_ptr<const minic::Program> p, std::map<std::string, minic::FunctionCfg> c,
           minic::NodeIds ids, const AnalysisConfig& cfg);
};

struct RunReport {
  RunStats solve;
  std::vector<RunStats> steps;  // prepare, changed returns, query
  std::size_t post_reevaluated = 0;
  std::size_t post_reused = 0;
  Json to_json() const;
};

/// Values of the program globals and of main's result in a state.
Json result_summary(const minic::MiniCSystem& sys, const SolverState& st);

struct AnalyzeOutcome {
  StateBundle bundle;
  RunReport report;
  Json summary;
};

AnalyzeOutcome analyze(const std::string& source, const std::string& file, const AnalysisConfig& cfg);

struct ReanalyzeOutcome {
  StateBundle bundle;
  RunReport report;
  ChangeSet changes;
  UnknownSet restarted;
  WarningDiff diff;
  Json summary;
};

ReanalyzeOutcome reanalyze(const StateBundle& prev, const std::string& source, const std::string& file,
                           const ReanalyzeOptions& opts);

struct CompareReport {
  std::size_t equal = 0;
  std::size_t incomparable = 0;
  std::size_t coarser = 0;  // incremental strictly less precise
  std::size_t finer = 0;
  std::vector<UnknownId> coarser_at;
  std::size_t total() const { return equal + incomparable + coarser + finer; }
  double coarser_fraction() const { return total() ? double(coarser) / double(total()) : 0.0; }
  Json to_json() const;
};

/// Compares the bundle's state with a from-scratch run of its own source
/// under the same node ids, over program-point unknowns present in both.
CompareReport compare(const StateBundle& b);

/// Line-delimited JSON requests on `in`, one response line each on `out`.
/// The bundle, if any, is kept in memory and written back to `state_dir`.
void serve(std::istream& in, std::ostream& out, std::optional<StateBundle> bundle,
           const std::filesystem::path& state_dir, const AnalysisConfig& cfg, const ReanalyzeOptions& opts);

std::string read_file(const std::filesystem::path& p);

}  // namespace incr
