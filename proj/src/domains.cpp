#include "incr/domains.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

namespace incr::dom {

namespace {

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <class T>
std::vector<T> set_union(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

template <class T>
std::vector<T> set_intersection(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

template <class T>
bool subset(const std::vector<T>& a, const std::vector<T>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

template <class T, class F>
std::string braced(const std::vector<T>& v, F&& fmt) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << fmt(v[i]);
  }
  os << '}';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// ValueSet

ValueSet ValueSet::top() {
  ValueSet v;
  v.top_ = true;
  return v;
}

ValueSet ValueSet::of(std::vector<std::int64_t> elems) {
  ValueSet v;
  v.elems_ = sorted_unique(std::move(elems));
  return v;
}

bool ValueSet::contains(std::int64_t v) const {
  return top_ || std::binary_search(elems_.begin(), elems_.end(), v);
}

bool ValueSet::leq(const ValueSet& o) const {
  if (o.top_) return true;
  if (top_) return false;
  return subset(elems_, o.elems_);
}

ValueSet ValueSet::join(const ValueSet& o) const {
  if (top_ || o.top_) return top();
  ValueSet v;
  v.elems_ = set_union(elems_, o.elems_);
  return v;
}

ValueSet ValueSet::meet(const ValueSet& o) const {
  if (top_) return o;
  if (o.top_) return *this;
  ValueSet v;
  v.elems_ = set_intersection(elems_, o.elems_);
  return v;
}

ValueSet ValueSet::widen(const ValueSet& o, std::size_t bound) const {
  return join(o).capped(bound);
}

ValueSet ValueSet::narrow(const ValueSet& o) const {
  // Finite sets have finite descending chains, so refining to `o` is safe.
  return o.leq(*this) ? o : *this;
}

ValueSet ValueSet::capped(std::size_t bound) const {
  if (!top_ && elems_.size() > bound) return top();
  return *this;
}

std::string ValueSet::str() const {
  if (top_) return "T";
  return braced(elems_, [](std::int64_t x) { return std::to_string(x); });
}

// ---------------------------------------------------------------------------
// Interval

namespace {
bool lo_le(Interval::Bound a, Interval::Bound b) {  // as lower bounds
  if (!a) return true;
  if (!b) return false;
  return *a <= *b;
}
bool hi_le(Interval::Bound a, Interval::Bound b) {  // as upper bounds
  if (!b) return true;
  if (!a) return false;
  return *a <= *b;
}
}  // namespace

Interval Interval::of(Bound lo, Bound hi) {
  if (lo && hi && *lo > *hi) return Interval();
  return Interval(lo, hi);
}

bool Interval::contains(std::int64_t v) const {
  if (bot_) return false;
  return (!lo_ || *lo_ <= v) && (!hi_ || v <= *hi_);
}

bool Interval::leq(const Interval& o) const {
  if (bot_) return true;
  if (o.bot_) return false;
  return lo_le(o.lo_, lo_) && hi_le(hi_, o.hi_);
}

Interval Interval::join(const Interval& o) const {
  if (bot_) return o;
  if (o.bot_) return *this;
  return Interval(lo_le(lo_, o.lo_) ? lo_ : o.lo_, hi_le(hi_, o.hi_) ? o.hi_ : hi_);
}

Interval Interval::meet(const Interval& o) const {
  if (bot_ || o.bot_) return Interval();
  return of(lo_le(lo_, o.lo_) ? o.lo_ : lo_, hi_le(hi_, o.hi_) ? hi_ : o.hi_);
}

Interval Interval::widen(const Interval& o) const {
  if (bot_) return o;
  if (o.bot_) return *this;
  Bound lo = lo_le(lo_, o.lo_) ? lo_ : std::nullopt;
  Bound hi = hi_le(o.hi_, hi_) ? hi_ : std::nullopt;
  return Interval(lo, hi);
}

Interval Interval::narrow(const Interval& o) const {
  if (bot_ || o.bot_) return Interval();
  return of(lo_ ? lo_ : o.lo_, hi_ ? hi_ : o.hi_);
}

std::string Interval::str() const {
  if (bot_) return "bot";
  std::ostringstream os;
  if (lo_) os << '[' << *lo_; else os << "(-inf";
  os << ',';
  if (hi_) os << *hi_ << ']'; else os << "+inf)";
  return os.str();
}

// ---------------------------------------------------------------------------
// AddressSet

AddressSet AddressSet::top() {
  AddressSet a;
  a.top_ = true;
  return a;
}

AddressSet AddressSet::of(std::vector<std::string> addrs) {
  AddressSet a;
  a.addrs_ = sorted_unique(std::move(addrs));
  return a;
}

bool AddressSet::leq(const AddressSet& o) const {
  if (o.top_) return true;
  if (top_) return false;
  return subset(addrs_, o.addrs_);
}

AddressSet AddressSet::join(const AddressSet& o) const {
  if (top_ || o.top_) return top();
  AddressSet a;
  a.addrs_ = set_union(addrs_, o.addrs_);
  return a;
}

AddressSet AddressSet::narrow(const AddressSet& o) const {
  return o.leq(*this) ? o : *this;
}

std::string AddressSet::str() const {
  if (top_) return "T";
  return braced(addrs_, [](const std::string& a) {
    return a == kNull ? std::string(kNull) : "&" + a;
  });
}

// ---------------------------------------------------------------------------
// Lockset

Lockset Lockset::bot() {
  Lockset l;
  l.bot_ = true;
  return l;
}

Lockset Lockset::of(std::vector<std::string> held) {
  Lockset l;
  l.held_ = sorted_unique(std::move(held));
  return l;
}

bool Lockset::holds(const std::string& m) const {
  return bot_ || std::binary_search(held_.begin(), held_.end(), m);
}

Lockset Lockset::with(const std::string& m) const {
  if (bot_) return *this;
  auto v = held_;
  v.push_back(m);
  return of(std::move(v));
}

Lockset Lockset::without(const std::string& m) const {
  if (bot_) return *this;
  Lockset l = *this;
  l.held_.erase(std::remove(l.held_.begin(), l.held_.end(), m), l.held_.end());
  return l;
}

bool Lockset::disjoint(const Lockset& o) const {
  if (bot_ || o.bot_) return false;
  return set_intersection(held_, o.held_).empty();
}

bool Lockset::leq(const Lockset& o) const {
  if (bot_) return true;
  if (o.bot_) return false;
  return subset(o.held_, held_);
}

Lockset Lockset::join(const Lockset& o) const {
  if (bot_) return o;
  if (o.bot_) return *this;
  Lockset l;
  l.held_ = set_intersection(held_, o.held_);
  return l;
}

Lockset Lockset::narrow(const Lockset& o) const { return o.leq(*this) ? o : *this; }

std::string Lockset::str() const {
  if (bot_) return "bot";
  return braced(held_, [](const std::string& m) { return m; });
}

// ---------------------------------------------------------------------------
// Scalar

Scalar::Scalar(ValueSet v) {
  if (!v.is_bot()) rep_ = std::move(v);
}
Scalar::Scalar(Interval v) {
  if (!v.is_bot()) rep_ = std::move(v);
}
Scalar::Scalar(AddressSet v) {
  if (!v.is_bot()) rep_ = std::move(v);
}

Scalar Scalar::top() {
  Scalar s;
  s.rep_ = TopTag{};
  return s;
}

bool Scalar::is_top() const {
  if (std::holds_alternative<TopTag>(rep_)) return true;
  if (auto* v = ints()) return v->is_top();
  if (auto* v = range()) return v->is_top();
  if (auto* v = addrs()) return v->is_top();
  return false;
}

bool Scalar::leq(const Scalar& o) const {
  if (is_bot() || std::holds_alternative<TopTag>(o.rep_)) return true;
  if (o.is_bot() || std::holds_alternative<TopTag>(rep_)) return false;
  if (rep_.index() != o.rep_.index()) return false;
  return std::visit(
      [&](const auto& a) -> bool {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, BotTag> || std::is_same_v<T, TopTag>) {
          return true;
        } else {
          return a.leq(std::get<T>(o.rep_));
        }
      },
      rep_);
}

namespace {
template <class F>
Scalar scalar_combine(const Scalar& a, const Scalar& b, F&& same_kind) {
  if (a.is_bot()) return b;
  if (b.is_bot()) return a;
  if (std::holds_alternative<Scalar::TopTag>(a.rep()) ||
      std::holds_alternative<Scalar::TopTag>(b.rep()) || a.rep().index() != b.rep().index()) {
    return Scalar::top();
  }
  return std::visit(
      [&](const auto& x) -> Scalar {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Scalar::BotTag> || std::is_same_v<T, Scalar::TopTag>) {
          return a;
        } else {
          return Scalar(same_kind(x, std::get<T>(b.rep())));
        }
      },
      a.rep());
}
}  // namespace

Scalar Scalar::join(const Scalar& o) const {
  return scalar_combine(*this, o, [](const auto& x, const auto& y) { return x.join(y); });
}

Scalar Scalar::widen(const Scalar& o, const WidenConfig& cfg) const {
  return scalar_combine(*this, o, [&](const auto& x, const auto& y) {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, ValueSet>) {
      return x.widen(y, cfg.value_set_bound);
    } else {
      return x.widen(y);
    }
  });
}

Scalar Scalar::narrow(const Scalar& o) const {
  if (is_bot() || o.is_bot()) return Scalar();
  if (std::holds_alternative<TopTag>(rep_)) return o;
  if (rep_.index() != o.rep_.index()) return *this;
  return std::visit(
      [&](const auto& x) -> Scalar {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BotTag> || std::is_same_v<T, TopTag>) {
          return *this;
        } else {
          return Scalar(x.narrow(std::get<T>(o.rep_)));
        }
      },
      rep_);
}

std::string Scalar::str() const {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BotTag>) {
          return "bot";
        } else if constexpr (std::is_same_v<T, TopTag>) {
          return "T";
        } else {
          return x.str();
        }
      },
      rep_);
}

// ---------------------------------------------------------------------------
// Env

Env Env::bot() {
  Env e;
  e.bot_ = true;
  return e;
}

Scalar Env::get(const std::string& var) const {
  auto it = vars_.find(var);
  return it == vars_.end() ? Scalar() : it->second;
}

Env Env::set(const std::string& var, Scalar v) const {
  if (bot_) return *this;
  Env e = *this;
  if (v.is_bot()) {
    e.vars_.erase(var);
  } else {
    e.vars_[var] = std::move(v);
  }
  return e;
}

bool Env::leq(const Env& o) const {
  if (bot_) return true;
  if (o.bot_) return false;
  for (const auto& [k, v] : vars_) {
    if (!v.leq(o.get(k))) return false;
  }
  return true;
}

namespace {
template <class F>
Env env_pointwise(const Env& a, const Env& b, F&& f) {
  Env out;
  std::map<std::string, Scalar> merged;
  for (const auto& [k, v] : a.vars()) merged[k] = f(v, b.get(k));
  for (const auto& [k, v] : b.vars()) {
    if (!a.vars().count(k)) merged[k] = f(Scalar(), v);
  }
  for (auto& [k, v] : merged) out = out.set(k, std::move(v));
  return out;
}
}  // namespace

Env Env::join(const Env& o) const {
  if (bot_) return o;
  if (o.bot_) return *this;
  return env_pointwise(*this, o, [](const Scalar& x, const Scalar& y) { return x.join(y); });
}

Env Env::widen(const Env& o, const WidenConfig& cfg) const {
  if (bot_) return o;
  if (o.bot_) return *this;
  return env_pointwise(*this, o,
                       [&](const Scalar& x, const Scalar& y) { return x.widen(y, cfg); });
}

Env Env::narrow(const Env& o) const {
  if (bot_ || o.bot_) return bot();
  Env out;
  for (const auto& [k, v] : vars_) out = out.set(k, v.narrow(o.get(k)));
  return out;
}

std::string Env::str() const {
  if (bot_) return "bot";
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [k, v] : vars_) {
    if (!first) os << ", ";
    first = false;
    os << k << " -> " << v.str();
  }
  os << '}';
  return os.str();
}

// ---------------------------------------------------------------------------
// LocalState

LocalState::LocalState(Env env, Lockset locks) : env_(std::move(env)), locks_(std::move(locks)) {
  if (env_.is_bot() || locks_.is_bot()) {
    env_ = Env::bot();
    locks_ = Lockset::bot();
  }
}

bool LocalState::leq(const LocalState& o) const {
  return env_.leq(o.env_) && locks_.leq(o.locks_);
}

LocalState LocalState::join(const LocalState& o) const {
  return LocalState(env_.join(o.env_), locks_.join(o.locks_));
}

LocalState LocalState::widen(const LocalState& o, const WidenConfig& cfg) const {
  return LocalState(env_.widen(o.env_, cfg), locks_.widen(o.locks_));
}

LocalState LocalState::narrow(const LocalState& o) const {
  return LocalState(env_.narrow(o.env_), locks_.narrow(o.locks_));
}

std::string LocalState::str() const {
  if (is_bot()) return "bot";
  if (locks_.held().empty()) return env_.str();
  return env_.str() + " locks" + locks_.str();
}

// ---------------------------------------------------------------------------
// AccessSet

std::string SourceLoc::str() const {
  return file + ":" + std::to_string(line) + ":" + std::to_string(col);
}

bool Access::operator<(const Access& o) const {
  if (site != o.site) return site < o.site;
  if (kind != o.kind) return kind < o.kind;
  if (locks.held() != o.locks.held()) return locks.held() < o.locks.held();
  return producer < o.producer;
}

bool Access::operator==(const Access& o) const {
  return site == o.site && kind == o.kind && locks == o.locks && producer == o.producer;
}

AccessSet AccessSet::of(std::vector<Access> recs) {
  AccessSet a;
  a.recs_ = sorted_unique(std::move(recs));
  return a;
}

bool AccessSet::leq(const AccessSet& o) const { return subset(recs_, o.recs_); }

AccessSet AccessSet::join(const AccessSet& o) const {
  AccessSet a;
  a.recs_ = set_union(recs_, o.recs_);
  return a;
}

AccessSet AccessSet::narrow(const AccessSet& o) const { return o.leq(*this) ? o : *this; }

std::string AccessSet::str() const {
  return braced(recs_, [](const Access& a) {
    return std::string(a.kind == AccessKind::Write ? "W@" : "R@") + a.loc.str() +
           a.locks.str();
  });
}

// ---------------------------------------------------------------------------
// AbstractValue

void AbstractValue::normalize() {
  bool bottom = std::visit(
      [](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Bot>) {
          return false;
        } else {
          return x.is_bot();
        }
      },
      rep_);
  if (bottom) rep_ = Bot{};
}

const char* AbstractValue::kind() const {
  static constexpr const char* names[] = {"Bot", "ValueSet", "Interval", "AddressSet", "Lockset",
                                          "Scalar", "Env", "LocalState", "AccessSet"};
  return names[rep_.index()];
}

namespace {
[[noreturn]] void mismatch(const char* op, const AbstractValue& a, const AbstractValue& b) {
  throw DomainMismatch(std::string(op) + ": cannot combine " + a.kind() + " with " + b.kind());
}
}  // namespace

bool AbstractValue::leq(const AbstractValue& o) const {
  if (is_bot()) return true;
  if (o.is_bot()) return false;
  if (rep_.index() != o.rep_.index()) mismatch("leq", *this, o);
  return std::visit(
      [&](const auto& a) -> bool {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Bot>) {
          return true;
        } else {
          return a.leq(std::get<T>(o.rep_));
        }
      },
      rep_);
}

AbstractValue AbstractValue::join(const AbstractValue& o) const {
  if (is_bot()) return o;
  if (o.is_bot()) return *this;
  if (rep_.index() != o.rep_.index()) mismatch("join", *this, o);
  return std::visit(
      [&](const auto& a) -> AbstractValue {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Bot>) {
          return o;
        } else {
          return AbstractValue(a.join(std::get<T>(o.rep_)));
        }
      },
      rep_);
}

AbstractValue AbstractValue::widen(const AbstractValue& o, const WidenConfig& cfg) const {
  if (is_bot()) return o;
  if (o.is_bot()) return *this;
  if (rep_.index() != o.rep_.index()) mismatch("widen", *this, o);
  return std::visit(
      [&](const auto& a) -> AbstractValue {
        using T = std::decay_t<decltype(a)>;
        const auto& b = std::get<T>(o.rep_);
        if constexpr (std::is_same_v<T, Bot>) {
          return o;
        } else if constexpr (std::is_same_v<T, ValueSet>) {
          return AbstractValue(a.widen(b, cfg.value_set_bound));
        } else if constexpr (std::is_same_v<T, Scalar> || std::is_same_v<T, Env> ||
                             std::is_same_v<T, LocalState>) {
          return AbstractValue(a.widen(b, cfg));
        } else {
          return AbstractValue(a.widen(b));
        }
      },
      rep_);
}

AbstractValue AbstractValue::narrow(const AbstractValue& o) const {
  if (is_bot() || o.is_bot()) return AbstractValue();
  if (rep_.index() != o.rep_.index()) mismatch("narrow", *this, o);
  return std::visit(
      [&](const auto& a) -> AbstractValue {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Bot>) {
          return a;
        } else {
          return AbstractValue(a.narrow(std::get<T>(o.rep_)));
        }
      },
      rep_);
}

std::string AbstractValue::str() const {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Bot>) {
          return "bot";
        } else {
          return x.str();
        }
      },
      rep_);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json bound_json(Interval::Bound b) { return b ? Json(*b) : Json(nullptr); }
Interval::Bound bound_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::int64_t>();
}

Json lockset_json(const Lockset& l) {
  if (l.is_bot()) return Json{{"t", "Lockset"}, {"bot", true}};
  return Json{{"t", "Lockset"}, {"v", l.held()}};
}

Lockset lockset_from(const Json& j) {
  if (j.value("bot", false)) return Lockset::bot();
  return Lockset::of(j.at("v").get<std::vector<std::string>>());
}

Json env_json(const Env& e) {
  if (e.is_bot()) return Json{{"t", "Env"}, {"bot", true}};
  Json vars = Json::object();
  for (const auto& [k, v] : e.vars()) vars[k] = to_json(v);
  return Json{{"t", "Env"}, {"v", vars}};
}

Env env_from(const Json& j) {
  if (j.value("bot", false)) return Env::bot();
  Env e;
  for (const auto& [k, v] : j.at("v").items()) e = e.set(k, scalar_from_json(v));
  return e;
}

Json access_json(const Access& a) {
  return Json{{"fn", a.site.fn},
              {"src", a.site.src},
              {"dst", a.site.dst},
              {"kind", a.kind == AccessKind::Write ? "write" : "read"},
              {"locks", a.locks.held()},
              {"producer", a.producer},
              {"loc", to_json(a.loc)}};
}

Access access_from(const Json& j) {
  Access a;
  a.site = Site{j.at("fn").get<std::string>(), j.at("src").get<std::uint32_t>(),
                j.at("dst").get<std::uint32_t>()};
  a.kind = j.at("kind").get<std::string>() == "write" ? AccessKind::Write : AccessKind::Read;
  a.locks = Lockset::of(j.at("locks").get<std::vector<std::string>>());
  a.producer = j.at("producer").get<std::string>();
  a.loc = loc_from_json(j.at("loc"));
  return a;
}

}  // namespace

Json to_json(const SourceLoc& l) { return Json{{"file", l.file}, {"line", l.line}, {"col", l.col}}; }

SourceLoc loc_from_json(const Json& j) {
  return SourceLoc{j.at("file").get<std::string>(), j.at("line").get<int>(), j.at("col").get<int>()};
}

Json to_json(const Scalar& s) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Scalar::BotTag>) {
          return Json{{"t", "Bot"}};
        } else if constexpr (std::is_same_v<T, Scalar::TopTag>) {
          return Json{{"t", "Top"}};
        } else {
          return to_json(AbstractValue(x));
        }
      },
      s.rep());
}

Scalar scalar_from_json(const Json& j) {
  const auto t = j.at("t").get<std::string>();
  if (t == "Top") return Scalar::top();
  if (t == "Bot") return Scalar();
  AbstractValue v = value_from_json(j);
  if (auto* x = v.as<ValueSet>()) return *x;
  if (auto* x = v.as<Interval>()) return *x;
  if (auto* x = v.as<AddressSet>()) return *x;
  throw DomainMismatch("not a scalar encoding: " + t);
}

Json to_json(const AbstractValue& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AbstractValue::Bot>) {
          return Json{{"t", "Bot"}};
        } else if constexpr (std::is_same_v<T, ValueSet>) {
          if (x.is_top()) return Json{{"t", "ValueSet"}, {"top", true}};
          return Json{{"t", "ValueSet"}, {"v", x.elements()}};
        } else if constexpr (std::is_same_v<T, Interval>) {
          return Json{{"t", "Interval"}, {"lo", bound_json(x.lo())}, {"hi", bound_json(x.hi())}};
        } else if constexpr (std::is_same_v<T, AddressSet>) {
          if (x.is_top()) return Json{{"t", "AddressSet"}, {"top", true}};
          return Json{{"t", "AddressSet"}, {"v", x.addresses()}};
        } else if constexpr (std::is_same_v<T, Lockset>) {
          return lockset_json(x);
        } else if constexpr (std::is_same_v<T, Scalar>) {
          return Json{{"t", "Scalar"}, {"v", to_json(x)}};
        } else if constexpr (std::is_same_v<T, Env>) {
          return env_json(x);
        } else if constexpr (std::is_same_v<T, LocalState>) {
          return Json{{"t", "LocalState"}, {"env", env_json(x.env())}, {"locks", lockset_json(x.locks())}};
        } else {
          Json recs = Json::array();
          for (const auto& a : x.records()) recs.push_back(access_json(a));
          return Json{{"t", "AccessSet"}, {"v", recs}};
        }
      },
      v.rep());
}

AbstractValue value_from_json(const Json& j) {
  const auto t = j.at("t").get<std::string>();
  if (t == "Bot") return AbstractValue();
  if (t == "ValueSet") {
    if (j.value("top", false)) return ValueSet::top();
    return ValueSet::of(j.at("v").get<std::vector<std::int64_t>>());
  }
  if (t == "Interval") return Interval::of(bound_from(j.at("lo")), bound_from(j.at("hi")));
  if (t == "AddressSet") {
    if (j.value("top", false)) return AddressSet::top();
    return AddressSet::of(j.at("v").get<std::vector<std::string>>());
  }
  if (t == "Lockset") return lockset_from(j);
  if (t == "Scalar") return scalar_from_json(j.at("v"));
  if (t == "Env") return env_from(j);
  if (t == "LocalState") return LocalState(env_from(j.at("env")), lockset_from(j.at("locks")));
  if (t == "AccessSet") {
    std::vector<Access> recs;
    for (const auto& r : j.at("v")) recs.push_back(access_from(r));
    return AccessSet::of(std::move(recs));
  }
  throw DomainMismatch("unknown value tag: " + t);
}

}  // namespace incr::dom
