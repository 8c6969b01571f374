#include "incr/minic/parser.hpp"

#include <cctype>
#include <map>
#include <set>

namespace incr::minic {

ParseError::ParseError(std::string file, Loc loc, const std::string& msg)
    : std::runtime_error(file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) +
                         ": " + msg),
      file_(std::move(file)),
      loc_(loc) {}

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  Loc loc;
};

class Lexer {
 public:
  Lexer(const std::string& src, const std::string& file) : src_(src), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Int;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text += advance();
        }
        try {
          t.value = std::stoll(t.text);
        } catch (const std::out_of_range&) {
          throw ParseError(file_, t.loc, "integer literal out of range");
        }
      } else {
        t.kind = Tok::Punct;
        std::string two = src_.substr(pos_, 2);
        if (two == "==" || two == "!=") {
          t.text = two;
          advance();
          advance();
        } else if (std::string("(){};,=*&+-<>").find(c) != std::string::npos) {
          t.text = std::string(1, advance());
        } else {
          throw ParseError(file_, t.loc, std::string("unexpected character '") + c + "'");
        }
      }
      out.push_back(t);
    }
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.compare(pos_, 2, "//") == 0) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.compare(pos_, 2, "/*") == 0) {
        Loc start{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0) advance();
        if (pos_ >= src_.size()) throw ParseError(file_, start, "unterminated comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  const std::string& src_;
  const std::string& file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string> kKeywords = {"atomic", "int",  "void",   "mutex",  "while",
                                         "if",     "else", "return", "lock",   "unlock",
                                         "create", "assert", "NULL"};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file) : toks_(std::move(toks)), file_(std::move(file)) {}

  Program program() {
    Program p;
    p.file = file_;
    while (peek().kind != Tok::End) {
      if (is("mutex")) {
        Global g;
        g.loc = next().loc;
        g.type = Type::Mutex;
        g.name = ident();
        expect(";");
        p.globals.push_back(g);
        continue;
      }
      bool atomic = accept("atomic");
      Loc loc = peek().loc;
      Type t = type();
      std::string name = ident();
      if (!atomic && is("(")) {
        p.functions.push_back(function(t, name, loc));
        continue;
      }
      if (t != Type::Int) fail(loc, "globals must be int or mutex");
      Global g;
      g.type = Type::Int;
      g.atomic = atomic;
      g.name = name;
      g.loc = loc;
      if (accept("=")) {
        g.has_init = true;
        g.init = int_literal();
      }
      expect(";");
      p.globals.push_back(g);
    }
    return p;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is(const std::string& s, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind != Tok::End && t.kind != Tok::Int && t.text == s;
  }
  bool accept(const std::string& s) {
    if (!is(s)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(Loc loc, const std::string& msg) const { throw ParseError(file_, loc, msg); }
  void expect(const std::string& s) {
    if (!accept(s)) {
      const auto& t = peek();
      fail(t.loc, "expected '" + s + "' but found " + describe(t));
    }
  }
  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  std::string ident() {
    const auto& t = peek();
    if (t.kind != Tok::Ident || kKeywords.count(t.text)) {
      fail(t.loc, "expected identifier but found " + describe(t));
    }
    return next().text;
  }

  std::int64_t int_literal() {
    bool neg = accept("-");
    const auto& t = peek();
    if (t.kind != Tok::Int) fail(t.loc, "expected integer literal but found " + describe(t));
    std::int64_t v = next().value;
    return neg ? -v : v;
  }

  bool at_type() const { return is("int") || is("void"); }

  Type type() {
    Loc loc = peek().loc;
    Type t;
    if (accept("int")) {
      t = Type::Int;
    } else if (accept("void")) {
      t = Type::Void;
    } else {
      fail(loc, "expected type but found " + describe(peek()));
    }
    if (accept("*")) t = Type::Ptr;
    return t;
  }

  Function function(Type ret, std::string name, Loc loc) {
    Function f;
    f.ret = ret;
    f.name = std::move(name);
    f.loc = loc;
    expect("(");
    if (is("void") && is(")", 1)) {
      next();
    } else if (!is(")")) {
      do {
        Param p;
        Loc ploc = peek().loc;
        p.type = type();
        if (p.type == Type::Void) fail(ploc, "parameter cannot have type void");
        p.name = ident();
        f.params.push_back(p);
      } while (accept(","));
    }
    expect(")");
    f.body = block();
    return f;
  }

  Block block() {
    Block b;
    if (!accept("{")) {
      statement(b);
      return b;
    }
    while (!accept("}")) {
      if (peek().kind == Tok::End) fail(peek().loc, "unexpected end of input in block");
      statement(b);
    }
    return b;
  }

  void statement(Block& out) {
    Stmt s;
    s.loc = peek().loc;
    if (at_type()) {
      s.kind = Stmt::Kind::Decl;
      s.type = type();
      if (s.type == Type::Void) fail(s.loc, "variable cannot have type void");
      s.name = ident();
      if (accept("=")) {
        if (peek().kind == Tok::Ident && is("(", 1) && !kKeywords.count(peek().text)) {
          out.push_back(s);
          out.push_back(call(s.name, peek().loc));
          return;
        }
        s.expr = expr();
      }
      expect(";");
      out.push_back(s);
      return;
    }
    if (accept("*")) {
      s.kind = Stmt::Kind::Store;
      s.name = ident();
      expect("=");
      s.expr = expr();
      expect(";");
    } else if (accept("while")) {
      s.kind = Stmt::Kind::While;
      expect("(");
      s.expr = expr();
      expect(")");
      s.body = block();
    } else if (accept("if")) {
      s.kind = Stmt::Kind::If;
      expect("(");
      s.expr = expr();
      expect(")");
      s.body = block();
      if (accept("else")) {
        s.has_else = true;
        s.orelse = block();
      }
    } else if (accept("return")) {
      s.kind = Stmt::Kind::Return;
      if (!is(";")) s.expr = expr();
      expect(";");
    } else if (is("lock") || is("unlock")) {
      s.kind = next().text == "lock" ? Stmt::Kind::Lock : Stmt::Kind::Unlock;
      expect("(");
      s.name = ident();
      expect(")");
      expect(";");
    } else if (accept("create")) {
      s.kind = Stmt::Kind::Create;
      expect("(");
      s.callee = ident();
      expect(",");
      s.args.push_back(expr());
      expect(")");
      expect(";");
    } else if (accept("assert")) {
      s.kind = Stmt::Kind::Assert;
      expect("(");
      s.expr = expr();
      expect(")");
      expect(";");
    } else if (peek().kind == Tok::Ident && is("(", 1)) {
      out.push_back(call("", s.loc));
      return;
    } else {
      s.kind = Stmt::Kind::Assign;
      s.name = ident();
      expect("=");
      if (peek().kind == Tok::Ident && is("(", 1) && !kKeywords.count(peek().text)) {
        out.push_back(call(s.name, s.loc));
        return;
      }
      s.expr = expr();
      expect(";");
    }
    out.push_back(std::move(s));
  }

  Stmt call(std::string target, Loc loc) {
    Stmt s;
    s.kind = Stmt::Kind::Call;
    s.loc = loc;
    s.name = std::move(target);
    s.callee = ident();
    expect("(");
    if (!is(")")) {
      do {
        s.args.push_back(expr());
      } while (accept(","));
    }
    expect(")");
    expect(";");
    return s;
  }

  ExprPtr bin(BinOp op, ExprPtr l, ExprPtr r, Loc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Bin;
    e->op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    e->loc = loc;
    return e;
  }

  ExprPtr expr() {
    ExprPtr l = additive();
    while (true) {
      Loc loc = peek().loc;
      BinOp op;
      if (accept("<")) op = BinOp::Lt;
      else if (accept(">")) op = BinOp::Gt;
      else if (accept("==")) op = BinOp::Eq;
      else if (accept("!=")) op = BinOp::Ne;
      else return l;
      l = bin(op, l, additive(), loc);
    }
  }

  ExprPtr additive() {
    ExprPtr l = multiplicative();
    while (true) {
      Loc loc = peek().loc;
      BinOp op;
      if (accept("+")) op = BinOp::Add;
      else if (accept("-")) op = BinOp::Sub;
      else return l;
      l = bin(op, l, multiplicative(), loc);
    }
  }

  ExprPtr multiplicative() {
    ExprPtr l = primary();
    while (is("*")) {
      Loc loc = next().loc;
      l = bin(BinOp::Mul, l, primary(), loc);
    }
    return l;
  }

  ExprPtr primary() {
    auto e = std::make_shared<Expr>();
    e->loc = peek().loc;
    if (accept("(")) {
      ExprPtr inner = expr();
      expect(")");
      return inner;
    }
    if (peek().kind == Tok::Int || is("-")) {
      e->kind = Expr::Kind::Int;
      e->value = int_literal();
    } else if (accept("NULL")) {
      e->kind = Expr::Kind::Null;
    } else if (accept("&")) {
      e->kind = Expr::Kind::AddrOf;
      e->name = ident();
    } else if (accept("*")) {
      e->kind = Expr::Kind::Deref;
      e->name = ident();
    } else {
      e->kind = Expr::Kind::Var;
      e->name = ident();
    }
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string file_;
};

// ---------------------------------------------------------------------------
// Name resolution and well-formedness.

class Checker {
 public:
  Checker(const Program& p) : p_(p) {}

  void run() {
    std::set<std::string> names;
    for (const auto& g : p_.globals) {
      if (!names.insert(g.name).second) fail(g.loc, "duplicate definition of '" + g.name + "'");
      reserved(g.name, g.loc);
    }
    for (const auto& f : p_.functions) {
      if (!names.insert(f.name).second) fail(f.loc, "duplicate definition of '" + f.name + "'");
      if (f.name == "init" || f.name == "__main") fail(f.loc, "reserved function name '" + f.name + "'");
    }
    const Function* main = p_.find("main");
    if (!main) fail({1, 1}, "no function 'main'");
    if (!main->params.empty()) fail(main->loc, "'main' must not take parameters");
    for (const auto& f : p_.functions) function(f);
  }

 private:
  [[noreturn]] void fail(Loc loc, const std::string& msg) const { throw ParseError(p_.file, loc, msg); }

  void reserved(const std::string& name, Loc loc) const {
    if (name == "ret") fail(loc, "'ret' is reserved");
  }

  void function(const Function& f) {
    locals_.clear();
    for (const auto& prm : f.params) {
      reserved(prm.name, f.loc);
      if (!locals_.emplace(prm.name, prm.type).second) {
        fail(f.loc, "duplicate parameter '" + prm.name + "'");
      }
    }
    block(f.body);
  }

  const Global* mutex(const std::string& name, Loc loc) const {
    const Global* g = p_.global(name);
    if (!g || g->type != Type::Mutex) fail(loc, "'" + name + "' is not a mutex");
    return g;
  }

  void variable(const std::string& name, Loc loc) const {
    if (locals_.count(name)) return;
    const Global* g = p_.global(name);
    if (!g) fail(loc, "unknown identifier '" + name + "'");
    if (g->type == Type::Mutex) fail(loc, "mutex '" + name + "' used as a value");
  }

  void expr(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::Int:
      case Expr::Kind::Null:
        return;
      case Expr::Kind::Var:
      case Expr::Kind::Deref:
        variable(e.name, e.loc);
        return;
      case Expr::Kind::AddrOf: {
        if (locals_.count(e.name)) fail(e.loc, "address of local '" + e.name + "' is not supported");
        const Global* g = p_.global(e.name);
        if (!g) fail(e.loc, "unknown identifier '" + e.name + "'");
        if (g->type == Type::Mutex) fail(e.loc, "address of mutex '" + e.name + "' is not supported");
        return;
      }
      case Expr::Kind::Bin:
        expr(*e.lhs);
        expr(*e.rhs);
        return;
    }
  }

  const Function& callee(const Stmt& s) const {
    const Function* f = p_.find(s.callee);
    if (!f) fail(s.loc, "unknown function '" + s.callee + "'");
    return *f;
  }

  void block(const Block& b) {
    for (const auto& s : b) stmt(s);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Decl:
        reserved(s.name, s.loc);
        if (s.expr) expr(*s.expr);
        if (!locals_.emplace(s.name, s.type).second) fail(s.loc, "duplicate local '" + s.name + "'");
        break;
      case Stmt::Kind::Assign:
        variable(s.name, s.loc);
        expr(*s.expr);
        break;
      case Stmt::Kind::Store:
        variable(s.name, s.loc);
        expr(*s.expr);
        break;
      case Stmt::Kind::Call: {
        const Function& f = callee(s);
        if (f.params.size() != s.args.size()) {
          fail(s.loc, "'" + f.name + "' expects " + std::to_string(f.params.size()) + " arguments");
        }
        for (const auto& a : s.args) expr(*a);
        if (!s.name.empty()) variable(s.name, s.loc);
        break;
      }
      case Stmt::Kind::While:
        expr(*s.expr);
        block(s.body);
        break;
      case Stmt::Kind::If:
        expr(*s.expr);
        block(s.body);
        block(s.orelse);
        break;
      case Stmt::Kind::Return:
        if (s.expr) expr(*s.expr);
        break;
      case Stmt::Kind::Lock:
      case Stmt::Kind::Unlock:
        mutex(s.name, s.loc);
        break;
      case Stmt::Kind::Create: {
        const Function& f = callee(s);
        if (f.params.size() > 1) fail(s.loc, "thread function '" + f.name + "' takes at most one parameter");
        expr(*s.args.at(0));
        break;
      }
      case Stmt::Kind::Assert:
        expr(*s.expr);
        break;
    }
  }

  const Program& p_;
  std::map<std::string, Type> locals_;
};

}  // namespace

Program parse(const std::string& text, const std::string& file) {
  Lexer lex(text, file);
  Parser parser(lex.run(), file);
  Program p = parser.program();
  Checker(p).run();
  return p;
}

}  // namespace incr::minic
