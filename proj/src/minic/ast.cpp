#include "incr/minic/ast.hpp"

#include <sstream>

namespace incr::minic {

const char* type_name(Type t) {
  switch (t) {
    case Type::Int: return "int";
    case Type::Ptr: return "void*";
    case Type::Void: return "void";
    case Type::Mutex: return "mutex";
  }
  return "?";
}

const char* binop_str(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
  }
  return "?";
}

const Function* Program::find(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const Global* Program::global(const std::string& name) const {
  for (const auto& g : globals) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

namespace {
bool block_creates(const Block& b) {
  for (const auto& s : b) {
    if (s.kind == Stmt::Kind::Create) return true;
    if (block_creates(s.body) || block_creates(s.orelse)) return true;
  }
  return false;
}
}  // namespace

bool Program::has_threads() const {
  for (const auto& f : functions) {
    if (block_creates(f.body)) return true;
  }
  return false;
}

std::string expr_str(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Int: return std::to_string(e.value);
    case Expr::Kind::Null: return "NULL";
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::AddrOf: return "&" + e.name;
    case Expr::Kind::Deref: return "*" + e.name;
    case Expr::Kind::Bin:
      return "(" + expr_str(*e.lhs) + " " + binop_str(e.op) + " " + expr_str(*e.rhs) + ")";
  }
  return "?";
}

namespace {

void print_block(std::ostringstream& os, const Block& b);

void print_stmt(std::ostringstream& os, const Stmt& s) {
  auto opt = [](const ExprPtr& e) { return e ? expr_str(*e) : std::string(); };
  switch (s.kind) {
    case Stmt::Kind::Decl:
      os << type_name(s.type) << ' ' << s.name;
      if (s.expr) os << " = " << expr_str(*s.expr);
      os << ';';
      break;
    case Stmt::Kind::Assign: os << s.name << " = " << expr_str(*s.expr) << ';'; break;
    case Stmt::Kind::Store: os << '*' << s.name << " = " << expr_str(*s.expr) << ';'; break;
    case Stmt::Kind::Call:
      if (!s.name.empty()) os << s.name << " = ";
      os << s.callee << '(';
      for (std::size_t i = 0; i < s.args.size(); ++i) os << (i ? ", " : "") << expr_str(*s.args[i]);
      os << ");";
      break;
    case Stmt::Kind::While:
      os << "while (" << expr_str(*s.expr) << ") ";
      print_block(os, s.body);
      break;
    case Stmt::Kind::If:
      os << "if (" << expr_str(*s.expr) << ") ";
      print_block(os, s.body);
      if (s.has_else) {
        os << " else ";
        print_block(os, s.orelse);
      }
      break;
    case Stmt::Kind::Return: os << "return " << opt(s.expr) << ';'; break;
    case Stmt::Kind::Lock: os << "lock(" << s.name << ");"; break;
    case Stmt::Kind::Unlock: os << "unlock(" << s.name << ");"; break;
    case Stmt::Kind::Create:
      os << "create(" << s.callee << ", " << expr_str(*s.args.at(0)) << ");";
      break;
    case Stmt::Kind::Assert: os << "assert(" << expr_str(*s.expr) << ");"; break;
  }
}

void print_block(std::ostringstream& os, const Block& b) {
  os << '{';
  for (const auto& s : b) {
    print_stmt(os, s);
    os << ' ';
  }
  os << '}';
}

}  // namespace

std::string canonical_header(const Function& f) {
  std::ostringstream os;
  os << type_name(f.ret) << ' ' << f.name << '(';
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    os << (i ? ", " : "") << type_name(f.params[i].type) << ' ' << f.params[i].name;
  }
  os << ')';
  return os.str();
}

std::string canonical_body(const Function& f) {
  std::ostringstream os;
  print_block(os, f.body);
  return os.str();
}

std::string canonical_globals(const Program& p) {
  std::ostringstream os;
  for (const auto& g : p.globals) {
    if (g.atomic) os << "atomic ";
    os << type_name(g.type) << ' ' << g.name;
    if (g.has_init) os << " = " << g.init;
    os << "; ";
  }
  return os.str();
}

}  // namespace incr::minic
