#pragma once

// Lattice value domains shared by the solver and the MiniC analyses.
//
// Every domain provides leq/join/widen/narrow and structural equality on a
// normalized representation (sorted, de-duplicated sets). AbstractValue is
// the tagged union the solver stores per unknown; any domain-specific bottom
// collapses to the universal Bot alternative so that equality checks in the
// solver never distinguish "empty set" from "unreached".

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace incr::dom {

using Json = nlohmann::json;

/// Thrown when two values from different lattices are combined.
class DomainMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct WidenConfig {
  /// Cardinality above which value-set widening (and arithmetic) yields Top.
  std::size_t value_set_bound = 8;
};

// ---------------------------------------------------------------------------
// ValueSet: Top or a finite set of 64-bit integers.

class ValueSet {
 public:
  ValueSet() = default;
  static ValueSet top();
  static ValueSet of(std::vector<std::int64_t> elems);
  static ValueSet singleton(std::int64_t v) { return of({v}); }

  bool is_top() const { return top_; }
  bool is_bot() const { return !top_ && elems_.empty(); }
  const std::vector<std::int64_t>& elements() const { return elems_; }
  bool contains(std::int64_t v) const;

  bool leq(const ValueSet& o) const;
  ValueSet join(const ValueSet& o) const;
  ValueSet meet(const ValueSet& o) const;
  ValueSet widen(const ValueSet& o, std::size_t bound) const;
  ValueSet narrow(const ValueSet& o) const;

  /// Caps the cardinality: more than `bound` elements becomes Top.
  ValueSet capped(std::size_t bound) const;

  std::string str() const;
  friend bool operator==(const ValueSet&, const ValueSet&) = default;

 private:
  bool top_ = false;
  std::vector<std::int64_t> elems_;
};

// ---------------------------------------------------------------------------
// Interval: [lo, hi] with optional infinite bounds, or Bot.

class Interval {
 public:
  using Bound = std::optional<std::int64_t>;  // nullopt = infinite

  Interval() = default;  // Bot
  static Interval top() { return Interval(std::nullopt, std::nullopt); }
  static Interval of(Bound lo, Bound hi);
  static Interval constant(std::int64_t v) { return of(v, v); }

  bool is_bot() const { return bot_; }
  bool is_top() const { return !bot_ && !lo_ && !hi_; }
  Bound lo() const { return lo_; }
  Bound hi() const { return hi_; }
  bool contains(std::int64_t v) const;

  bool leq(const Interval& o) const;
  Interval join(const Interval& o) const;
  Interval meet(const Interval& o) const;
  Interval widen(const Interval& o) const;
  Interval narrow(const Interval& o) const;

  std::string str() const;
  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  Interval(Bound lo, Bound hi) : bot_(false), lo_(lo), hi_(hi) {}
  bool bot_ = true;
  Bound lo_;
  Bound hi_;
};

// ---------------------------------------------------------------------------
// AddressSet: finite set of global addresses (plus "null"), or Top.

class AddressSet {
 public:
  static constexpr const char* kNull = "null";

  AddressSet() = default;
  static AddressSet top();
  static AddressSet of(std::vector<std::string> addrs);

  bool is_top() const { return top_; }
  bool is_bot() const { return !top_ && addrs_.empty(); }
  const std::vector<std::string>& addresses() const { return addrs_; }

  bool leq(const AddressSet& o) const;
  AddressSet join(const AddressSet& o) const;
  AddressSet widen(const AddressSet& o) const { return join(o); }
  AddressSet narrow(const AddressSet& o) const;

  std::string str() const;
  friend bool operator==(const AddressSet&, const AddressSet&) = default;

 private:
  bool top_ = false;
  std::vector<std::string> addrs_;
};

// ---------------------------------------------------------------------------
// Lockset: must-set of held mutexes. Larger set = lower in the lattice; the
// distinguished Bot stands for "all mutexes" (unreachable). Join intersects.

class Lockset {
 public:
  Lockset() = default;  // empty set = Top
  static Lockset bot();
  static Lockset of(std::vector<std::string> held);

  bool is_bot() const { return bot_; }
  const std::vector<std::string>& held() const { return held_; }
  bool holds(const std::string& m) const;
  Lockset with(const std::string& m) const;
  Lockset without(const std::string& m) const;
  bool disjoint(const Lockset& o) const;

  bool leq(const Lockset& o) const;
  Lockset join(const Lockset& o) const;
  Lockset widen(const Lockset& o) const { return join(o); }
  Lockset narrow(const Lockset& o) const;

  std::string str() const;
  friend bool operator==(const Lockset&, const Lockset&) = default;

 private:
  bool bot_ = false;
  std::vector<std::string> held_;
};

// ---------------------------------------------------------------------------
// Scalar: the value of one program variable. Integers come from either the
// value-set or the interval domain; pointers are address sets; a generic Top
// absorbs type mixes ("ret -> T" before anything is known).

class Scalar {
 public:
  struct BotTag {
    friend bool operator==(BotTag, BotTag) { return true; }
  };
  struct TopTag {
    friend bool operator==(TopTag, TopTag) { return true; }
  };
  using Rep = std::variant<BotTag, TopTag, ValueSet, Interval, AddressSet>;

  Scalar() = default;
  Scalar(ValueSet v);    // NOLINT(google-explicit-constructor)
  Scalar(Interval v);    // NOLINT(google-explicit-constructor)
  Scalar(AddressSet v);  // NOLINT(google-explicit-constructor)
  static Scalar bot() { return Scalar(); }
  static Scalar top();

  bool is_bot() const { return std::holds_alternative<BotTag>(rep_); }
  bool is_top() const;
  const Rep& rep() const { return rep_; }
  const ValueSet* ints() const { return std::get_if<ValueSet>(&rep_); }
  const Interval* range() const { return std::get_if<Interval>(&rep_); }
  const AddressSet* addrs() const { return std::get_if<AddressSet>(&rep_); }

  bool leq(const Scalar& o) const;
  Scalar join(const Scalar& o) const;
  Scalar widen(const Scalar& o, const WidenConfig& cfg) const;
  Scalar narrow(const Scalar& o) const;

  std::string str() const;
  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  Rep rep_;
};

// ---------------------------------------------------------------------------
// Env: local variable name -> Scalar, or the distinguished Bot ("no state").
// Variables absent from the map are Bot; Bot scalars are never stored.

class Env {
 public:
  Env() = default;  // the empty, reachable environment
  static Env bot();

  bool is_bot() const { return bot_; }
  const std::map<std::string, Scalar>& vars() const { return vars_; }
  Scalar get(const std::string& var) const;
  Env set(const std::string& var, Scalar v) const;

  bool leq(const Env& o) const;
  Env join(const Env& o) const;
  Env widen(const Env& o, const WidenConfig& cfg) const;
  Env narrow(const Env& o) const;

  std::string str() const;
  friend bool operator==(const Env&, const Env&) = default;

 private:
  bool bot_ = false;
  std::map<std::string, Scalar> vars_;
};

// ---------------------------------------------------------------------------
// LocalState: environment paired with held locks; Bot jointly.

class LocalState {
 public:
  LocalState() = default;
  LocalState(Env env, Lockset locks);
  static LocalState bot() { return LocalState(Env::bot(), Lockset::bot()); }

  bool is_bot() const { return env_.is_bot(); }
  const Env& env() const { return env_; }
  const Lockset& locks() const { return locks_; }
  LocalState with_env(Env env) const { return LocalState(std::move(env), locks_); }
  LocalState with_locks(Lockset l) const { return LocalState(env_, std::move(l)); }

  bool leq(const LocalState& o) const;
  LocalState join(const LocalState& o) const;
  LocalState widen(const LocalState& o, const WidenConfig& cfg) const;
  LocalState narrow(const LocalState& o) const;

  std::string str() const;
  friend bool operator==(const LocalState&, const LocalState&) = default;

 private:
  Env env_;
  Lockset locks_;
};

// ---------------------------------------------------------------------------
// AccessSet: accumulated shared-memory accesses (write-only during solving).

enum class AccessKind { Read, Write };

struct SourceLoc {
  std::string file;
  int line = 0;
  int col = 0;
  std::string str() const;
  friend auto operator<=>(const SourceLoc&, const SourceLoc&) = default;
};

/// Where in the CFG an access or diagnostic originates: the edge src -> dst of
/// function `fn`. Survives code motion, unlike SourceLoc.
struct Site {
  std::string fn;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  friend auto operator<=>(const Site&, const Site&) = default;
};

struct Access {
  Site site;
  AccessKind kind = AccessKind::Read;
  Lockset locks;
  std::string producer;  // canonical id of the unknown that emitted it
  SourceLoc loc;         // refreshed from the CFG; not part of identity

  bool operator<(const Access& o) const;
  bool operator==(const Access& o) const;
};

class AccessSet {
 public:
  AccessSet() = default;
  static AccessSet of(std::vector<Access> recs);

  bool is_bot() const { return recs_.empty(); }
  const std::vector<Access>& records() const { return recs_; }

  bool leq(const AccessSet& o) const;
  AccessSet join(const AccessSet& o) const;
  AccessSet widen(const AccessSet& o) const { return join(o); }
  AccessSet narrow(const AccessSet& o) const;

  std::string str() const;
  friend bool operator==(const AccessSet&, const AccessSet&) = default;

 private:
  std::vector<Access> recs_;
};

// ---------------------------------------------------------------------------
// AbstractValue: what the solver stores for an unknown.

class AbstractValue {
 public:
  struct Bot {
    friend bool operator==(Bot, Bot) { return true; }
  };
  using Rep = std::variant<Bot, ValueSet, Interval, AddressSet, Lockset, Scalar,
                           Env, LocalState, AccessSet>;

  AbstractValue() = default;
  template <class T>
    requires std::is_constructible_v<Rep, T>
  AbstractValue(T v) : rep_(std::move(v)) {  // NOLINT(google-explicit-constructor)
    normalize();
  }

  static AbstractValue bot() { return AbstractValue(); }
  bool is_bot() const { return std::holds_alternative<Bot>(rep_); }
  const Rep& rep() const { return rep_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&rep_);
  }
  /// Name of the held alternative ("Bot", "ValueSet", ...).
  const char* kind() const;

  bool leq(const AbstractValue& o) const;
  AbstractValue join(const AbstractValue& o) const;
  AbstractValue widen(const AbstractValue& o, const WidenConfig& cfg = {}) const;
  AbstractValue narrow(const AbstractValue& o) const;

  std::string str() const;
  friend bool operator==(const AbstractValue&, const AbstractValue&) = default;

 private:
  void normalize();
  Rep rep_;
};

inline bool leq(const AbstractValue& a, const AbstractValue& b) { return a.leq(b); }
inline AbstractValue join(const AbstractValue& a, const AbstractValue& b) { return a.join(b); }
inline AbstractValue widen(const AbstractValue& a, const AbstractValue& b,
                           const WidenConfig& cfg = {}) {
  return a.widen(b, cfg);
}
inline AbstractValue narrow(const AbstractValue& a, const AbstractValue& b) {
  return a.narrow(b);
}

// Canonical JSON: {"t":"ValueSet","v":[0,1]} etc. Sets are emitted ascending.
Json to_json(const AbstractValue& v);
AbstractValue value_from_json(const Json& j);
Json to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j);
Json to_json(const SourceLoc& l);
SourceLoc loc_from_json(const Json& j);

}  // namespace incr::dom
