// incrai: analyze MiniC programs and reanalyze them incrementally.

#include <iostream>

#include "CLI11.hpp"
#include "incr/pipeline.hpp"

namespace {

using namespace incr;

struct Flags {
  std::string file;
  std::string mode = "reluctant";
  std::string restart = "minimal";
  std::string domain = "valueset";
  std::string state_dir = ".incrai";
  bool wpoint_restart = false;
  bool stats = false;
  bool fail_on_warn = false;
  bool values = false;

  AnalysisConfig config() const {
    AnalysisConfig c;
    c.analysis.domain = domain == "interval" ? minic::IntDomain::Interval : minic::IntDomain::ValueSet;
    c.wpoint_restart = wpoint_restart;
    return c;
  }
  ReanalyzeOptions reanalyze_options() const {
    ReanalyzeOptions o;
    o.mode = mode == "plain" ? ReanalyzeMode::Plain : ReanalyzeMode::Reluctant;
    o.restart = restart == "off" ? RestartPolicy::Off : RestartPolicy::Minimal;
    return o;
  }
};

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

int warn_status(const Flags& f, std::size_t n) { return f.fail_on_warn && n > 0 ? 1 : 0; }

int cmd_analyze(const Flags& f) {
  auto out = analyze(read_file(f.file), f.file, f.config());
  save_bundle(f.state_dir, out.bundle);
  Json j{{"warnings", out.bundle.warnings.warnings_json()}, {"summary", out.summary}};
  if (f.stats) j["stats"] = out.report.to_json();
  print(j);
  return warn_status(f, out.bundle.warnings.all().size());
}

int cmd_reanalyze(const Flags& f) {
  auto prev = load_bundle(f.state_dir, f.config());
  if (!prev) {
    std::cerr << "incrai: no state in " << f.state_dir << ", analyzing from scratch\n";
    return cmd_analyze(f);
  }
  auto out = reanalyze(*prev, read_file(f.file), f.file, f.reanalyze_options());
  save_bundle(f.state_dir, out.bundle);
  Json restarted = Json::array();
  for (const auto& g : out.restarted) restarted.push_back(g.str());
  Json j = out.diff.to_json();
  j["changes"] = out.changes.to_json();
  j["restarted"] = restarted;
  j["summary"] = out.summary;
  if (f.stats) j["stats"] = out.report.to_json();
  print(j);
  return warn_status(f, out.bundle.warnings.all().size());
}

int cmd_compare(const Flags& f) {
  auto b = load_bundle(f.state_dir, f.config());
  if (!b) throw std::runtime_error("no state in " + f.state_dir + "; run analyze first");
  if (!f.file.empty() && read_file(f.file) != b->source)
    throw std::runtime_error(f.file + " differs from the analyzed version; run reanalyze first");
  print(compare(*b).to_json());
  return 0;
}

int cmd_show(const Flags& f) {
  auto b = load_bundle(f.state_dir, f.config());
  if (!b) throw std::runtime_error("no state in " + f.state_dir);
  Json j{{"file", b->file}, {"options", b->config.to_json()}, {"warnings", b->warnings.warnings_json()}};
  if (f.values) {
    Json vals = Json::object();
    for (const auto& [x, v] : b->state.sigma) vals[x.str()] = v.str();
    j["values"] = vals;
  }
  print(j);
  return 0;
}

int cmd_serve(const Flags& f) {
  auto b = load_bundle(f.state_dir, f.config());
  serve(std::cin, std::cout, std::move(b), f.state_dir, f.config(), f.reanalyze_options());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental abstract interpretation of MiniC programs"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--domain", f.domain, "integer domain")->check(CLI::IsMember({"valueset", "interval"}));
    sub->add_flag("--wpoint-restart", f.wpoint_restart,
                  "reset unknowns when they first become widening points; widen locally");
    sub->add_option("--state-dir", f.state_dir, "directory holding the state bundle");
  };
  auto add_run = [&f](CLI::App* sub) {
    sub->add_option("--mode", f.mode, "destabilization mode")->check(CLI::IsMember({"plain", "reluctant"}));
    sub->add_option("--restart", f.restart, "restarting of globals")->check(CLI::IsMember({"off", "minimal"}));
    sub->add_flag("--stats", f.stats, "print solver counters");
    sub->add_flag("--fail-on-warn", f.fail_on_warn, "exit with 1 if any warning remains");
  };

  auto* an = app.add_subcommand("analyze", "analyze from scratch and store the state");
  an->add_option("file", f.file, "MiniC source")->required();
  add_common(an);
  add_run(an);

  auto* re = app.add_subcommand("reanalyze", "reanalyze incrementally against the stored state");
  re->add_option("file", f.file, "MiniC source")->required();
  add_common(re);
  add_run(re);

  auto* cmp = app.add_subcommand("compare", "compare the stored state with a from-scratch run");
  cmp->add_option("file", f.file, "MiniC source (must match the stored version)");
  add_common(cmp);

  auto* sh = app.add_subcommand("show", "print the stored warnings");
  sh->add_flag("--values", f.values, "also print every stored value");
  add_common(sh);

  auto* sv = app.add_subcommand("serve", "answer line-delimited JSON requests on stdin");
  add_common(sv);
  add_run(sv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*an) return cmd_analyze(f);
    if (*re) return cmd_reanalyze(f);
    if (*cmp) return cmd_compare(f);
    if (*sh) return cmd_show(f);
    if (*sv) return cmd_serve(f);
  } catch (const std::exception& e) {
    std::cerr << "incrai: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
