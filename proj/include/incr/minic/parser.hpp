#pragma once

#include <stdexcept>
#include <string>

#include "incr/minic/ast.hpp"

namespace incr::minic {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, Loc loc, const std::string& msg);
  const std::string& file() const { return file_; }
  Loc loc() const { return loc_; }

 private:
  std::string file_;
  Loc loc_;
};

/// Parses and checks a MiniC translation unit: unique definitions, declared
/// identifiers, a `main` function, and the well-formedness of calls.
Program parse(const std::string& text, const std::string& file = "input.c");

}  // namespace incr::minic
