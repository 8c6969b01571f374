#pragma once

// Generated MiniC programs and random edits on them.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace incr::testing {

struct FnModel {
  std::string name;
  bool thread = false;  // `void* name(void* p)`, started with create
  bool has_param = true;
  int init = 0;
  int offset = 0;
  int loop_bound = 0;  // 0: no loop
  std::vector<int> extra;  // `a = a + c;` lines
  int write_global = -1;
  int write_const = 0;
  int lock = -1;  // mutex guarding the write, -1 for none
  std::vector<std::pair<int, int>> calls;  // (callee index, constant argument)
  std::vector<std::pair<int, int>> creates;  // (thread index, global index)
  int read_global = -1;
  bool return_b = false;
  int ret_const = 0;
};

struct ProgramModel {
  int globals = 0;
  int mutexes = 0;
  std::vector<FnModel> fns;      // callable functions, called only by lower indices
  std::vector<FnModel> threads;  // thread bodies
  std::string render() const;
};

struct CorpusOptions {
  int functions = 200;
  int threads = 4;
  int globals = 6;
  int mutexes = 2;
};

ProgramModel generate(std::mt19937_64& rng, const CorpusOptions& opts);

/// Applies one random body edit to one function and returns its name.
std::string mutate(std::mt19937_64& rng, ProgramModel& p);

/// Changes a constant in `fn`'s global write (or return, if it writes none).
void edit_constant(ProgramModel& p, const std::string& fn);

}  // namespace incr::testing
