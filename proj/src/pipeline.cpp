#include "incr/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace incr {

namespace fs = std::filesystem;
using minic::FunctionCfg;
using minic::MiniCSystem;
using minic::NodeIds;
using minic::Program;

SolverOptions AnalysisConfig::solver_options() const {
  SolverOptions o;
  o.widen = analysis.widen;
  o.restart_wpoint = wpoint_restart;
  o.localized_widening = wpoint_restart;
  return o;
}

Json AnalysisConfig::to_json() const {
  return Json{{"domain", analysis.domain == minic::IntDomain::Interval ? "interval" : "valueset"},
              {"value_set_bound", analysis.widen.value_set_bound},
              {"wpoint_restart", wpoint_restart}};
}

AnalysisConfig AnalysisConfig::from_json(const Json& j) {
  AnalysisConfig c;
  c.analysis.domain = j.at("domain").get<std::string>() == "interval" ? minic::IntDomain::Interval
                                                                      : minic::IntDomain::ValueSet;
  c.analysis.widen.value_set_bound = j.at("value_set_bound").get<std::size_t>();
  c.wpoint_restart = j.at("wpoint_restart").get<bool>();
  return c;
}

Json StateBundle::to_json() const {
  return Json{{"format", format},   {"file", file},
              {"source", source},   {"node_ids", ids.to_json()},
              {"state", incr::to_json(state)}, {"warnings", warnings.to_json()},
              {"options", config.to_json()}};
}

StateBundle StateBundle::from_json(const Json& j) {
  StateBundle b;
  b.format = j.at("format").get<int>();
  if (b.format != kBundleFormat)
    throw BundleError("state bundle format " + std::to_string(b.format) + " is not supported");
  b.file = j.at("file").get<std::string>();
  b.source = j.at("source").get<std::string>();
  b.ids = NodeIds::from_json(j.at("node_ids"));
  b.state = state_from_json(j.at("state"));
  b.warnings = WarnStore::from_json(j.at("warnings"));
  b.config = AnalysisConfig::from_json(j.at("options"));
  return b;
}

fs::path bundle_path(const fs::path& state_dir) { return state_dir / "state.json"; }

void save_bundle(const fs::path& state_dir, const StateBundle& b) {
  fs::create_directories(state_dir);
  fs::path tmp = bundle_path(state_dir);
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw BundleError("cannot write " + tmp.string());
    f << b.to_json().dump() << "\n";
  }
  fs::rename(tmp, bundle_path(state_dir));
}

std::optional<StateBundle> load_bundle(const fs::path& state_dir, const AnalysisConfig& cfg) {
  fs::path p = bundle_path(state_dir);
  if (!fs::exists(p)) return std::nullopt;
  Json j;
  try {
    j = Json::parse(read_file(p));
  } catch (const Json::exception& e) {
    throw BundleError("corrupt state bundle " + p.string() + ": " + e.what());
  }
  StateBundle b = StateBundle::from_json(j);
  if (!(b.config == cfg))
    throw BundleError("state bundle was produced with options " + b.config.to_json().dump() +
                      ", requested " + cfg.to_json().dump() + "; run analyze to start over");
  return b;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::map<std::string, FunctionCfg> Frontend::cfgs_of(const Program& p) {
  std::map<std::string, FunctionCfg> out;
  for (const auto& f : p.functions) out.emplace(f.name, minic::build_cfg(f));
  return out;
}

Frontend::Frontend(std::shared_ptr<const Program> p, std::map<std::string, FunctionCfg> c, NodeIds ids,
                   const AnalysisConfig& cfg)
    : prog(std::move(p)), cfgs(std::move(c)), sys(std::make_unique<MiniCSystem>(prog, std::move(ids), cfg.analysis)) {}

Json RunReport::to_json() const {
  auto one = [](const RunStats& s) {
    Json j{{"rhs_evals", s.rhs_evals}, {"destabilizations", s.destabilizations}, {"wpoint_restarts", s.wpoint_restarts}};
    if (!s.diagnostics.empty()) j["diagnostics"] = s.diagnostics;
    return j;
  };
  Json j = one(solve);
  if (!steps.empty()) {
    Json arr = Json::array();
    for (const auto& s : steps) arr.push_back(one(s));
    j["steps"] = arr;
  }
  j["postprocess_reevaluated"] = post_reevaluated;
  j["postprocess_reused"] = post_reused;
  return j;
}

Json result_summary(const MiniCSystem& sys, const SolverState& st) {
  Json globals = Json::object();
  for (const auto& g : sys.program().globals) {
    if (g.type != minic::Type::Int) continue;
    globals[g.name] = st.value(UnknownId::global(g.name)).str();
  }
  return Json{{"globals", globals}, {"main", st.value(sys.query()).str()}};
}

AnalyzeOutcome analyze(const std::string& source, const std::string& file, const AnalysisConfig& cfg) {
  auto prog = std::make_shared<const Program>(minic::parse(source, file));
  auto cfgs = Frontend::cfgs_of(*prog);
  NodeIds ids = minic::assign_fresh(*prog, cfgs);
  Frontend fe(prog, std::move(cfgs), ids, cfg);

  AnalyzeOutcome out;
  out.bundle.state = run(*fe.sys, SolverState{}, cfg.solver_options(), &out.report.solve);
  auto post = postprocess(*fe.sys, out.bundle.state, nullptr);
  out.report.post_reevaluated = post.reevaluated.size();
  out.report.post_reused = post.reused;
  out.bundle.file = file;
  out.bundle.source = source;
  out.bundle.ids = std::move(ids);
  out.bundle.warnings = std::move(post.store);
  out.bundle.config = cfg;
  out.summary = result_summary(*fe.sys, out.bundle.state);
  return out;
}

ReanalyzeOutcome reanalyze(const StateBundle& prev, const std::string& source, const std::string& file,
                           const ReanalyzeOptions& opts) {
  Program old_prog = minic::parse(prev.source, prev.file);
  auto prog = std::make_shared<const Program>(minic::parse(source, file));
  auto cfgs = Frontend::cfgs_of(*prog);

  ReanalyzeOutcome out;
  out.changes = detect_changes(old_prog, *prog);
  NodeIds ids = relabel_nodes(out.changes, prev.ids, *prog, cfgs);
  Frontend fe(prog, std::move(cfgs), ids, prev.config);

  out.bundle.state = prev.state;
  Reanalysis r(*fe.sys, out.bundle.state, out.changes, layout_of(prev.ids), layout_of(ids), opts,
               prev.config.solver_options());
  r.prepare();
  out.report.steps.push_back(r.step_stats());
  r.solve_changed();
  out.report.steps.push_back(r.step_stats());
  r.solve_query();
  out.report.steps.push_back(r.step_stats());
  out.report.solve = r.stats();
  out.restarted = r.restarted();

  auto post = postprocess(*fe.sys, out.bundle.state, &prev.warnings);
  out.report.post_reevaluated = post.reevaluated.size();
  out.report.post_reused = post.reused;
  out.diff = diff_warnings(prev.warnings.all(), post.store.all());
  out.bundle.file = file;
  out.bundle.source = source;
  out.bundle.ids = std::move(ids);
  out.bundle.warnings = std::move(post.store);
  out.bundle.config = prev.config;
  out.summary = result_summary(*fe.sys, out.bundle.state);
  return out;
}

Json CompareReport::to_json() const {
  Json at = Json::array();
  for (const auto& x : coarser_at) at.push_back(x.str());
  return Json{{"equal", equal},       {"incomparable", incomparable}, {"coarser", coarser},
              {"finer", finer},       {"total", total()},             {"coarser_fraction", coarser_fraction()},
              {"coarser_at", at}};
}

CompareReport compare(const StateBundle& b) {
  auto prog = std::make_shared<const Program>(minic::parse(b.source, b.file));
  Frontend fe(prog, Frontend::cfgs_of(*prog), b.ids, b.config);
  SolverState scratch = run(*fe.sys, SolverState{}, b.config.solver_options());

  CompareReport rep;
  for (const auto& [x, inc] : b.state.sigma) {
    if (x.kind() != UnknownKind::Node) continue;
    auto it = scratch.sigma.find(x);
    if (it == scratch.sigma.end()) continue;
    const AbstractValue& fresh = it->second;
    bool le = inc.leq(fresh);
    bool ge = fresh.leq(inc);
    if (le && ge) {
      ++rep.equal;
    } else if (ge) {
      ++rep.coarser;
      rep.coarser_at.push_back(x);
    } else if (le) {
      ++rep.finer;
    } else {
      ++rep.incomparable;
    }
  }
  return rep;
}

namespace {

Json warnings_array(const std::vector<Warning>& ws) {
  Json a = Json::array();
  for (const auto& w : ws) a.push_back(w.to_json());
  return a;
}

}  // namespace

void serve(std::istream& in, std::ostream& out, std::optional<StateBundle> bundle, const fs::path& state_dir,
           const AnalysisConfig& cfg, const ReanalyzeOptions& opts) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json resp = Json::object();
    bool stop = false;
    try {
      Json req = Json::parse(line);
      if (!req.is_object() || !req.contains("method") || !req["method"].is_string())
        throw std::runtime_error("request must be an object with a string 'method'");
      if (req.contains("id")) resp["id"] = req["id"];
      const std::string method = req["method"].get<std::string>();
      if (method == "reanalyze") {
        std::string path = req.value("path", bundle ? bundle->file : std::string());
        if (path.empty()) throw std::runtime_error("reanalyze needs a 'path'");
        std::string source = read_file(path);
        if (bundle) {
          auto r = reanalyze(*bundle, source, path, opts);
          resp["result"] = r.diff.to_json();
          resp["result"]["summary"] = r.summary;
          resp["result"]["stats"] = r.report.to_json();
          bundle = std::move(r.bundle);
        } else {
          auto a = analyze(source, path, cfg);
          resp["result"] = WarningDiff{a.bundle.warnings.all(), {}, {}}.to_json();
          resp["result"]["summary"] = a.summary;
          resp["result"]["stats"] = a.report.to_json();
          bundle = std::move(a.bundle);
        }
        if (!state_dir.empty()) save_bundle(state_dir, *bundle);
      } else if (method == "warnings") {
        resp["result"] = bundle ? warnings_array(bundle->warnings.all()) : Json::array();
      } else if (method == "shutdown") {
        resp["result"] = "ok";
        stop = true;
      } else {
        throw std::runtime_error("unknown method '" + method + "'");
      }
    } catch (const std::exception& e) {
      resp.erase("result");
      resp["error"] = e.what();
    }
    out << resp.dump() << "\n" << std::flush;
    if (stop) return;
  }
}

}  // namespace incr
