#include "incr/postproc.hpp"

#include <algorithm>
#include <cstdio>

#include "incr/increment.hpp"

namespace incr {

using dom::Access;
using dom::AccessKind;
using dom::SourceLoc;

namespace {

Json site_to_json(const dom::Site& s) { return Json{{"fn", s.fn}, {"src", s.src}, {"dst", s.dst}}; }

dom::Site site_from_json(const Json& j) {
  return {j.at("fn").get<std::string>(), j.at("src").get<std::uint32_t>(), j.at("dst").get<std::uint32_t>()};
}

void sort_locs(std::vector<SourceLoc>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

Warning make_warning(std::string kind, std::vector<std::string> provenance, const std::string& skeleton,
                     std::string message) {
  std::sort(provenance.begin(), provenance.end());
  Warning w;
  w.id = warning_id(kind, provenance, skeleton);
  w.kind = std::move(kind);
  w.message = std::move(message);
  w.provenance = std::move(provenance);
  return w;
}

/// Recomputes locations of a warning from its sites in the current CFGs.
void refresh(Warning& w, const minic::MiniCSystem& sys) {
  if (w.sites.empty()) return;
  std::vector<SourceLoc> locs;
  for (const auto& s : w.sites)
    if (auto l = sys.site_loc(s)) locs.push_back(sys.source_loc(*l));
  if (locs.empty()) return;
  sort_locs(locs);
  w.locations = std::move(locs);
}

void refresh(Access& a, const minic::MiniCSystem& sys) {
  if (auto l = sys.site_loc(a.site)) a.loc = sys.source_loc(*l);
}

/// Merges warnings that share an id (same diagnostic on several edges).
std::vector<Warning> merge_by_id(std::vector<Warning> ws) {
  std::map<std::string, Warning> m;
  for (auto& w : ws) {
    auto [it, fresh] = m.try_emplace(w.id, w);
    if (fresh) continue;
    auto& t = it->second;
    t.locations.insert(t.locations.end(), w.locations.begin(), w.locations.end());
    t.sites.insert(t.sites.end(), w.sites.begin(), w.sites.end());
    sort_locs(t.locations);
    std::sort(t.sites.begin(), t.sites.end());
    t.sites.erase(std::unique(t.sites.begin(), t.sites.end()), t.sites.end());
  }
  std::vector<Warning> out;
  for (auto& [_, w] : m) out.push_back(std::move(w));
  return out;
}

const char* kind_str(AccessKind k) { return k == AccessKind::Write ? "write" : "read"; }

}  // namespace

std::string warning_id(const std::string& kind, const std::vector<std::string>& provenance,
                       const std::string& skeleton) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  feed(kind);
  for (const auto& p : provenance) feed(p);
  feed(skeleton);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json Warning::to_json() const {
  Json locs = Json::array();
  for (const auto& l : locations) locs.push_back(dom::to_json(l));
  return Json{{"id", id}, {"kind", kind}, {"message", message}, {"locations", locs}, {"provenance", provenance}};
}

Warning Warning::from_json(const Json& j) {
  Warning w;
  w.id = j.at("id").get<std::string>();
  w.kind = j.at("kind").get<std::string>();
  w.message = j.at("message").get<std::string>();
  for (const auto& l : j.at("locations")) w.locations.push_back(dom::loc_from_json(l));
  w.provenance = j.at("provenance").get<std::vector<std::string>>();
  if (j.contains("sites"))
    for (const auto& s : j.at("sites")) w.sites.push_back(site_from_json(s));
  return w;
}

namespace {

Json warning_with_sites(const Warning& w) {
  Json j = w.to_json();
  Json sites = Json::array();
  for (const auto& s : w.sites) sites.push_back(site_to_json(s));
  j["sites"] = sites;
  return j;
}

}  // namespace

std::vector<Warning> WarnStore::all() const {
  std::vector<Warning> ws = whole;
  for (const auto& [_, v] : by_unknown) ws.insert(ws.end(), v.begin(), v.end());
  return merge_by_id(std::move(ws));
}

Json WarnStore::warnings_json() const {
  Json out = Json::array();
  for (const auto& w : all()) out.push_back(w.to_json());
  return out;
}

Json WarnStore::to_json() const {
  Json bu = Json::array();
  for (const auto& [x, ws] : by_unknown) {
    Json arr = Json::array();
    for (const auto& w : ws) arr.push_back(warning_with_sites(w));
    bu.push_back(Json::array({incr::to_json(x), arr}));
  }
  Json acc = Json::array();
  for (const auto& [x, per_global] : accesses) {
    Json m = Json::object();
    for (const auto& [g, recs] : per_global) m[g] = dom::to_json(AbstractValue(dom::AccessSet::of(recs)));
    acc.push_back(Json::array({incr::to_json(x), m}));
  }
  Json wh = Json::array();
  for (const auto& w : whole) wh.push_back(warning_with_sites(w));
  return Json{{"by_unknown", bu}, {"accesses", acc}, {"whole", wh}};
}

WarnStore WarnStore::from_json(const Json& j) {
  WarnStore s;
  for (const auto& e : j.at("by_unknown")) {
    auto& v = s.by_unknown[unknown_from_json(e.at(0))];
    for (const auto& w : e.at(1)) v.push_back(Warning::from_json(w));
  }
  for (const auto& e : j.at("accesses")) {
    auto& m = s.accesses[unknown_from_json(e.at(0))];
    for (const auto& [g, v] : e.at(1).items()) {
      AbstractValue val = dom::value_from_json(v);
      if (auto* as = val.as<dom::AccessSet>()) m[g] = as->records();
    }
  }
  for (const auto& w : j.at("whole")) s.whole.push_back(Warning::from_json(w));
  return s;
}

std::vector<Warning> races(const std::map<std::string, std::vector<Access>>& by_global) {
  std::vector<Warning> out;
  for (const auto& [g, recs] : by_global) {
    std::vector<bool> involved(recs.size(), false);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      for (std::size_t j = i + 1; j < recs.size(); ++j) {
        const auto& a = recs[i];
        const auto& b = recs[j];
        if (a.kind != AccessKind::Write && b.kind != AccessKind::Write) continue;
        if (!a.locks.disjoint(b.locks)) continue;
        involved[i] = involved[j] = true;
      }
    }
    std::vector<SourceLoc> locs;
    std::vector<dom::Site> sites;
    std::set<std::string> kinds;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (!involved[i]) continue;
      locs.push_back(recs[i].loc);
      sites.push_back(recs[i].site);
      kinds.insert(kind_str(recs[i].kind));
    }
    if (locs.empty()) continue;
    std::string skeleton = "data race on global '" + g + "'";
    std::string message = skeleton + " (";
    bool first = true;
    for (const auto& k : kinds) {
      message += (first ? "" : "/") + k;
      first = false;
    }
    message += " accesses without a common lock)";
    Warning w = make_warning("race", {UnknownId::acc(g).str()}, skeleton, message);
    sort_locs(locs);
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    w.locations = std::move(locs);
    w.sites = std::move(sites);
    out.push_back(std::move(w));
  }
  return out;
}

PostprocessResult postprocess(const minic::MiniCSystem& sys, SolverState& st, const WarnStore* prev) {
  prune(sys, st);
  UnknownSet reused_set;
  for (const auto& x : st.superstable)
    if (st.stable.count(x)) reused_set.insert(x);
  if (!reused_set.empty() && !prev)
    throw PostprocessError("superstable unknowns present but no previous warnings available");

  PostprocessResult res;
  WarnStore& out = res.store;
  const GetFn lookup = [&st](const UnknownId& y) { return st.value(y); };

  for (const auto& x : st.stable) {
    if (!sys.has_rhs(x)) continue;
    if (reused_set.count(x)) {
      ++res.reused;
      if (auto it = prev->by_unknown.find(x); it != prev->by_unknown.end()) {
        auto ws = it->second;
        for (auto& w : ws) refresh(w, sys);
        out.by_unknown[x] = std::move(ws);
      }
      if (auto it = prev->accesses.find(x); it != prev->accesses.end()) {
        auto m = it->second;
        for (auto& [_, recs] : m)
          for (auto& a : recs) refresh(a, sys);
        out.accesses[x] = std::move(m);
      }
      continue;
    }
    res.reevaluated.push_back(x);
    auto rhs = sys.rhs(x, EvalMode::Postprocess);
    std::map<std::string, std::vector<Access>> emitted;
    run_tree(*rhs, lookup, [&](const UnknownId& g, const AbstractValue& d) {
      if (g.kind() != UnknownKind::Acc) return;
      if (auto* as = d.as<dom::AccessSet>()) {
        auto& v = emitted[g.name()];
        v.insert(v.end(), as->records().begin(), as->records().end());
      }
    });
    for (auto& [g, recs] : emitted) {
      auto set = dom::AccessSet::of(recs);
      recs = set.records();
    }
    if (!emitted.empty()) out.accesses[x] = std::move(emitted);

    std::vector<Warning> ws;
    for (const auto& d : sys.diagnose(x, lookup)) {
      Warning w = make_warning(d.kind, {x.str()}, d.skeleton, d.message);
      w.sites = {d.site};
      w.locations = {sys.source_loc(d.loc)};
      ws.push_back(std::move(w));
    }
    ws = merge_by_id(std::move(ws));
    if (!ws.empty()) out.by_unknown[x] = std::move(ws);
  }

  if (sys.program().has_threads()) {
    std::map<std::string, std::vector<Access>> by_global;
    for (const auto& [_, m] : out.accesses)
      for (const auto& [g, recs] : m) by_global[g].insert(by_global[g].end(), recs.begin(), recs.end());
    for (auto& [_, recs] : by_global) std::sort(recs.begin(), recs.end());
    auto rs = races(by_global);
    out.whole.insert(out.whole.end(), rs.begin(), rs.end());
  }

  for (const auto& r : sys.dead_code(st.sigma)) {
    std::vector<std::string> prov;
    for (const auto& p : r.provenance) prov.push_back(p.str());
    std::string skeleton = "unreachable code in '" + r.fn + "'";
    Warning w = make_warning("dead-code", std::move(prov), skeleton, skeleton);
    w.locations = {sys.source_loc(r.loc)};
    out.whole.push_back(std::move(w));
  }
  out.whole = merge_by_id(std::move(out.whole));
  return res;
}

Json WarningDiff::to_json() const {
  auto arr = [](const std::vector<Warning>& v) {
    Json a = Json::array();
    for (const auto& w : v) a.push_back(w.to_json());
    return a;
  };
  return Json{{"added", arr(added)}, {"removed", arr(removed)}, {"kept", arr(kept)}};
}

WarningDiff diff_warnings(const std::vector<Warning>& old_ws, const std::vector<Warning>& new_ws) {
  std::set<std::string> old_ids, new_ids;
  for (const auto& w : old_ws) old_ids.insert(w.id);
  for (const auto& w : new_ws) new_ids.insert(w.id);
  WarningDiff d;
  for (const auto& w : new_ws) (old_ids.count(w.id) ? d.kept : d.added).push_back(w);
  for (const auto& w : old_ws)
    if (!new_ids.count(w.id)) d.removed.push_back(w);
  return d;
}

}  // namespace incr
