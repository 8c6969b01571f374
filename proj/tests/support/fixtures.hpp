#pragma once

// Small MiniC programs shared by the test suites.

#include <memory>
#include <string>
#include <vector>

#include "incr/pipeline.hpp"

namespace incr::testing {

/// A thread writing through a pointer to `g` while main reads it. `c` is the
/// constant stored by the thread.
inline std::string thread_example(int c = 1) {
  return "atomic int g = 0;\n"
         "void* foo(void* p) {\n"
         "  *p = " + std::to_string(c) + ";\n"
         "  return NULL;\n"
         "}\n"
         "int main() {\n"
         "  create(foo, &g);\n"
         "  return g;\n"
         "}\n";
}

/// Outer loop resetting i, inner loop counting j; the inner body keeps
/// 1 <= i <= 10.
inline std::string hybrid_loops() {
  return "int main() {\n"
         "  int i = 0;\n"
         "  int j = 0;\n"
         "  while (1) {\n"
         "    i = i + 1;\n"
         "    j = 0;\n"
         "    while (j < 10) {\n"
         "      j = j + 1;\n"
         "    }\n"
         "    if (i > 9) {\n"
         "      i = 0;\n"
         "    }\n"
         "  }\n"
         "  return 0;\n"
         "}\n";
}

/// A worker increments a shared counter; `locked` decides whether the
/// increment is guarded like the read in main.
inline std::string counter_workers(bool locked) {
  std::string inc = locked ? "  lock(m);\n  counter = counter + 1;\n  unlock(m);\n" : "  counter = counter + 1;\n";
  return "int counter = 0;\n"
         "mutex m;\n"
         "void* worker(void* arg) {\n" +
         inc +
         "  return NULL;\n"
         "}\n"
         "int main() {\n"
         "  int seen = 0;\n"
         "  create(worker, NULL);\n"
         "  lock(m);\n"
         "  seen = counter;\n"
         "  unlock(m);\n"
         "  return seen;\n"
         "}\n";
}

/// Parses `source` and builds its system with fresh node ids.
inline Frontend frontend(const std::string& source, const AnalysisConfig& cfg = {},
                         const std::string& file = "input.c") {
  auto prog = std::make_shared<const minic::Program>(minic::parse(source, file));
  auto cfgs = Frontend::cfgs_of(*prog);
  auto ids = minic::assign_fresh(*prog, cfgs);
  return Frontend(prog, std::move(cfgs), std::move(ids), cfg);
}

/// Value of a program global holding exactly `v`.
inline AbstractValue global_set(std::vector<std::int64_t> v) {
  return AbstractValue(dom::Scalar(dom::ValueSet::of(std::move(v))));
}

/// The calling context {p -> {&g}} of the thread in thread_example().
inline Context pg_context() { return {{"p", AbstractValue(dom::Scalar(dom::AddressSet::of({"g"})))}}; }
inline UnknownId foo_at(std::uint32_t n) { return UnknownId::node("foo", n, pg_context()); }
inline UnknownId main_at(std::uint32_t n) { return UnknownId::node("main", n); }

}  // namespace incr::testing
