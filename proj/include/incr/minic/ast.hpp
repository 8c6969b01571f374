#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace incr::minic {

struct Loc {
  int line = 0;
  int col = 0;
};

enum class Type { Int, Ptr, Void, Mutex };
const char* type_name(Type t);

enum class BinOp { Add, Sub, Mul, Lt, Gt, Eq, Ne };
const char* binop_str(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Int, Null, Var, AddrOf, Deref, Bin };
  Kind kind = Kind::Int;
  std::int64_t value = 0;  // Int
  std::string name;        // Var / AddrOf / Deref
  BinOp op = BinOp::Add;   // Bin
  ExprPtr lhs, rhs;        // Bin
  Loc loc;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum class Kind {
    Decl,    // type name (= expr)?
    Assign,  // name = expr
    Store,   // *name = expr
    Call,    // (name =)? callee(args)
    While,
    If,
    Return,  // return expr?
    Lock,
    Unlock,
    Create,  // create(callee, args[0])
    Assert,
  };
  Kind kind = Kind::Assign;
  Type type = Type::Int;  // Decl
  std::string name;       // target variable / mutex; empty for bare calls
  std::string callee;     // Call / Create
  ExprPtr expr;           // value, condition, or return value (may be null)
  std::vector<ExprPtr> args;
  Block body;
  Block orelse;
  bool has_else = false;
  Loc loc;
};

struct Param {
  Type type = Type::Int;
  std::string name;
};

struct Function {
  Type ret = Type::Int;
  std::string name;
  std::vector<Param> params;
  Block body;
  Loc loc;
};

struct Global {
  Type type = Type::Int;  // Int or Mutex
  bool atomic = false;
  std::string name;
  std::int64_t init = 0;
  bool has_init = false;
  Loc loc;
};

struct Program {
  std::string file;
  std::vector<Global> globals;
  std::vector<Function> functions;

  const Function* find(const std::string& name) const;
  const Global* global(const std::string& name) const;
  bool has_threads() const;  // contains a create statement
};

/// Canonical text of a function without source locations; used for change
/// detection.
std::string canonical_body(const Function& f);
std::string canonical_header(const Function& f);
/// Canonical text of all global declarations (the pseudo-function "init").
std::string canonical_globals(const Program& p);

std::string expr_str(const Expr& e);

}  // namespace incr::minic
