#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procshade/glsl/diag.hpp"
#include "procshade/glsl/ir.hpp"
#include "procshade/glsl/lexer.hpp"

namespace procshade::glsl {

class Parser {
 public:
  // Parses preprocessed source into untyped AST arenas; name resolution and
  // type checking happen in a later pass.
  static ShaderProgram parse(std::string preprocessed) {
    Parser p(preprocessed);
    p.prog_.source = std::move(preprocessed);
    p.parse_translation_unit();
    return std::move(p.prog_);
  }

 private:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ShaderProgram prog_;

  // --- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_end() const { return cur().kind == TokKind::End; }
  int line() const { return cur().line; }

  bool is_punct(std::string_view p) const {
    return cur().kind == TokKind::Punct && cur().text == p;
  }
  bool is_ident(std::string_view w) const {
    return cur().kind == TokKind::Ident && cur().text == w;
  }
  bool accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    ++pos_;
    return true;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail(line(), "expected '" + std::string(p) + "', got '" + cur().text + "'");
  }
  bool accept_ident(std::string_view w) {
    if (!is_ident(w)) return false;
    ++pos_;
    return true;
  }
  std::string expect_name() {
    if (cur().kind != TokKind::Ident) fail(line(), "expected identifier, got '" + cur().text + "'");
    std::string s = cur().text;
    ++pos_;
    return s;
  }

  // --- type names and qualifiers -------------------------------------------

  static std::optional<GType> type_from_name(std::string_view w) {
    if (w == "void") return t_void();
    if (w == "float") return t_float();
    if (w == "int" || w == "uint") return t_int();
    if (w == "bool") return t_bool();
    if (w == "vec2") return t_vec(2);
    if (w == "vec3") return t_vec(3);
    if (w == "vec4") return t_vec(4);
    if (w == "mat2") return t_mat(2);
    if (w == "mat3") return t_mat(3);
    if (w == "mat4") return t_mat(4);
    return std::nullopt;
  }

  static bool is_unsupported_type_name(std::string_view w) {
    static const std::set<std::string_view> kBad = {
        "ivec2", "ivec3", "ivec4", "bvec2", "bvec3", "bvec4", "uvec2", "uvec3", "uvec4",
        "mat2x2", "mat2x3", "mat2x4", "mat3x2", "mat3x3", "mat3x4", "mat4x2", "mat4x3",
        "mat4x4", "double", "dvec2", "dvec3", "dvec4", "sampler2D", "sampler3D",
        "samplerCube", "sampler2DArray", "sampler2DShadow", "isampler2D", "usampler2D",
        "image2D", "atomic_uint"};
    return kBad.count(w) > 0;
  }

  bool cur_is_type_name() const {
    return cur().kind == TokKind::Ident && type_from_name(cur().text).has_value();
  }

  static bool is_qualifier_word(std::string_view w) {
    return w == "const" || w == "uniform" || w == "in" || w == "out" || w == "inout" ||
           w == "highp" || w == "mediump" || w == "lowp" || w == "flat" || w == "varying" ||
           w == "attribute";
  }

  struct Quals {
    bool is_const = false, is_uniform = false, is_in = false, is_out = false, is_inout = false;
    bool any = false;
  };

  Quals parse_qualifiers() {
    Quals q;
    while (cur().kind == TokKind::Ident && is_qualifier_word(cur().text)) {
      const std::string& w = cur().text;
      if (w == "const") q.is_const = true;
      if (w == "uniform") q.is_uniform = true;
      if (w == "in" || w == "varying" || w == "attribute") q.is_in = true;
      if (w == "out") q.is_out = true;
      if (w == "inout") q.is_inout = true;
      q.any = true;
      ++pos_;
    }
    return q;
  }

  GType expect_type() {
    if (cur().kind != TokKind::Ident) fail(line(), "expected a type, got '" + cur().text + "'");
    if (is_unsupported_type_name(cur().text))
      fail(line(), "unsupported type '" + cur().text + "'");
    auto t = type_from_name(cur().text);
    if (!t) fail(line(), "unknown type '" + cur().text + "'");
    ++pos_;
    return *t;
  }

  // --- arena helpers --------------------------------------------------------

  ExprId add_expr(Expr e) {
    prog_.exprs.push_back(std::move(e));
    return static_cast<ExprId>(prog_.exprs.size() - 1);
  }
  StmtId add_stmt(Stmt s) {
    prog_.stmts.push_back(std::move(s));
    return static_cast<StmtId>(prog_.stmts.size() - 1);
  }

  // --- top level -------------------------------------------------------------

  void parse_translation_unit() {
    while (!at_end()) {
      if (accept_punct(";")) continue;
      if (is_ident("precision")) {
        pos_ += 3;  // precision <qual> <type>
        expect_punct(";");
        continue;
      }
      if (is_ident("struct")) fail(line(), "struct declarations are not supported");
      if (is_ident("layout")) fail(line(), "layout qualifiers are not supported");
      parse_global_or_function();
    }
  }

  void parse_global_or_function() {
    const int ln = line();
    Quals q = parse_qualifiers();
    GType type = expect_type();
    std::string name = expect_name();

    if (is_punct("(")) {
      parse_function(type, std::move(name), ln);
      return;
    }
    // one or more global declarators
    for (;;) {
      GlobalVar g;
      g.name = std::move(name);
      g.type = type;
      g.is_uniform = q.is_uniform;
      g.is_out = q.is_out;
      g.is_const = q.is_const;
      if (accept_punct("[")) {
        g.array_len = parse_array_size();
        expect_punct("]");
      }
      if (accept_punct("=")) {
        if (g.array_len > 0 || cur_is_array_constructor()) {
          g.array_init = parse_array_constructor(g.type, g.array_len, ln);
          if (g.array_len == 0) g.array_len = static_cast<std::int32_t>(g.array_init.size());
        } else {
          g.init = parse_assignment();
        }
      }
      if (g.type.is_void()) fail(ln, "variable of void type");
      prog_.globals.push_back(std::move(g));
      if (accept_punct(",")) {
        name = expect_name();
        continue;
      }
      expect_punct(";");
      break;
    }
  }

  std::int32_t parse_array_size() {
    if (cur().kind != TokKind::IntLit)
      fail(line(), "array size must be an integer literal");
    std::int32_t n = static_cast<std::int32_t>(cur().ival);
    if (n <= 0 || n > 4096) fail(line(), "array size out of range");
    ++pos_;
    return n;
  }

  bool cur_is_array_constructor() const {
    // e.g. float[3](...) or float[](...)
    if (!cur_is_type_name()) return false;
    return peek(1).kind == TokKind::Punct && peek(1).text == "[";
  }

  std::vector<ExprId> parse_array_constructor(const GType& elem, std::int32_t declared_len,
                                              int ln) {
    GType t = expect_type();
    if (!(t == elem)) fail(ln, "array constructor type mismatch");
    expect_punct("[");
    std::int32_t n = 0;
    if (!is_punct("]")) n = parse_array_size();
    expect_punct("]");
    expect_punct("(");
    std::vector<ExprId> items;
    if (!is_punct(")")) {
      do {
        items.push_back(parse_assignment());
      } while (accept_punct(","));
    }
    expect_punct(")");
    if (n > 0 && static_cast<std::int32_t>(items.size()) != n)
      fail(ln, "array constructor element count mismatch");
    if (declared_len > 0 && static_cast<std::int32_t>(items.size()) != declared_len)
      fail(ln, "array initializer length does not match declaration");
    if (items.empty()) fail(ln, "empty array constructor");
    return items;
  }

  void parse_function(GType ret, std::string name, int ln) {
    Function fn;
    fn.name = std::move(name);
    fn.ret = ret;
    expect_punct("(");
    if (!is_punct(")")) {
      if (is_ident("void") && peek(1).kind == TokKind::Punct && peek(1).text == ")") {
        ++pos_;
      } else {
        do {
          Param p;
          Quals q = parse_qualifiers();
          if (q.is_inout)
            p.qual = ParamQual::InOut;
          else if (q.is_out)
            p.qual = ParamQual::Out;
          else
            p.qual = ParamQual::In;
          p.type = expect_type();
          if (p.type.is_void()) fail(line(), "void parameter");
          if (cur().kind == TokKind::Ident && !is_qualifier_word(cur().text) &&
              !type_from_name(cur().text))
            p.name = expect_name();
          if (is_punct("[")) fail(line(), "array parameters are not supported");
          fn.params.push_back(std::move(p));
        } while (accept_punct(","));
      }
    }
    expect_punct(")");
    if (accept_punct(";")) {
      register_function(std::move(fn), ln, /*defined=*/false);
      return;
    }
    if (!is_punct("{")) fail(line(), "expected function body");
    fn.body = parse_compound();
    fn.defined = true;
    register_function(std::move(fn), ln, /*defined=*/true);
  }

  void register_function(Function fn, int ln, bool defined) {
    // merge with a matching prototype if present
    for (auto& existing : prog_.fns) {
      if (existing.name != fn.name || existing.params.size() != fn.params.size()) continue;
      bool same = existing.ret == fn.ret;
      for (std::size_t i = 0; same && i < fn.params.size(); ++i)
        same = existing.params[i].type == fn.params[i].type;
      if (!same) continue;
      if (defined) {
        if (existing.defined) fail(ln, "function '" + fn.name + "' redefined");
        existing = std::move(fn);
      }
      return;
    }
    prog_.fns.push_back(std::move(fn));
  }

  // --- statements ------------------------------------------------------------

  StmtId parse_compound() {
    Stmt s;
    s.kind = StmtKind::Compound;
    s.line = line();
    expect_punct("{");
    while (!is_punct("}")) {
      if (at_end()) fail(line(), "unterminated block");
      s.body.push_back(parse_statement());
    }
    expect_punct("}");
    return add_stmt(std::move(s));
  }

  bool statement_starts_declaration() const {
    if (cur().kind != TokKind::Ident) return false;
    if (is_qualifier_word(cur().text)) return true;
    if (!type_from_name(cur().text)) return false;
    // "vec2 p" is a declaration, "vec2(...)" is a constructor expression
    return peek(1).kind == TokKind::Ident;
  }

  StmtId parse_statement() {
    const int ln = line();
    if (is_punct("{")) return parse_compound();
    if (accept_punct(";")) {
      Stmt s;
      s.kind = StmtKind::Empty;
      s.line = ln;
      return add_stmt(std::move(s));
    }
    if (is_ident("if")) {
      ++pos_;
      Stmt s;
      s.kind = StmtKind::If;
      s.line = ln;
      expect_punct("(");
      s.expr = parse_expression();
      expect_punct(")");
      s.s_then = parse_statement();
      if (accept_ident("else")) s.s_else = parse_statement();
      return add_stmt(std::move(s));
    }
    if (is_ident("for")) {
      ++pos_;
      Stmt s;
      s.kind = StmtKind::For;
      s.line = ln;
      expect_punct("(");
      if (accept_punct(";")) {
        s.for_init = -1;
      } else if (statement_starts_declaration()) {
        s.for_init = parse_declaration_statement();
      } else {
        Stmt init;
        init.kind = StmtKind::ExprStmt;
        init.line = ln;
        init.expr = parse_expression();
        expect_punct(";");
        s.for_init = add_stmt(std::move(init));
      }
      if (!is_punct(";")) s.expr = parse_expression();
      expect_punct(";");
      if (!is_punct(")")) s.for_iter = parse_expression();
      expect_punct(")");
      s.loop_body = parse_statement();
      return add_stmt(std::move(s));
    }
    if (is_ident("while")) {
      ++pos_;
      Stmt s;
      s.kind = StmtKind::While;
      s.line = ln;
      expect_punct("(");
      s.expr = parse_expression();
      expect_punct(")");
      s.loop_body = parse_statement();
      return add_stmt(std::move(s));
    }
    if (is_ident("do")) {
      ++pos_;
      Stmt s;
      s.kind = StmtKind::DoWhile;
      s.line = ln;
      s.loop_body = parse_statement();
      if (!accept_ident("while")) fail(line(), "expected 'while' after do-body");
      expect_punct("(");
      s.expr = parse_expression();
      expect_punct(")");
      expect_punct(";");
      return add_stmt(std::move(s));
    }
    if (is_ident("return")) {
      ++pos_;
      Stmt s;
      s.kind = StmtKind::Return;
      s.line = ln;
      if (!is_punct(";")) s.expr = parse_expression();
      expect_punct(";");
      return add_stmt(std::move(s));
    }
    if (is_ident("break")) {
      ++pos_;
      expect_punct(";");
      Stmt s;
      s.kind = StmtKind::Break;
      s.line = ln;
      return add_stmt(std::move(s));
    }
    if (is_ident("continue")) {
      ++pos_;
      expect_punct(";");
      Stmt s;
      s.kind = StmtKind::Continue;
      s.line = ln;
      return add_stmt(std::move(s));
    }
    if (is_ident("discard")) {
      ++pos_;
      expect_punct(";");
      Stmt s;
      s.kind = StmtKind::Discard;
      s.line = ln;
      return add_stmt(std::move(s));
    }
    if (is_ident("struct")) fail(ln, "struct declarations are not supported");
    if (statement_starts_declaration()) return parse_declaration_statement();
    Stmt s;
    s.kind = StmtKind::ExprStmt;
    s.line = ln;
    s.expr = parse_expression();
    expect_punct(";");
    return add_stmt(std::move(s));
  }

  StmtId parse_declaration_statement() {
    const int ln = line();
    parse_qualifiers();  // const / precision qualifiers carry no runtime meaning here
    GType type = expect_type();
    if (type.is_void()) fail(ln, "variable of void type");
    Stmt s;
    s.kind = StmtKind::Decl;
    s.line = ln;
    for (;;) {
      DeclItem item;
      item.name = expect_name();
      item.type = type;
      if (accept_punct("[")) {
        if (!is_punct("]")) item.array_len = parse_array_size();
        expect_punct("]");
        if (item.array_len == 0 && !is_punct("=")) fail(ln, "unsized array needs an initializer");
      }
      if (accept_punct("=")) {
        if (item.array_len > 0 || cur_is_array_constructor()) {
          item.array_init = parse_array_constructor(type, item.array_len, ln);
          item.array_len = static_cast<std::int32_t>(item.array_init.size());
        } else {
          item.init = parse_assignment();
        }
      }
      s.decls.push_back(std::move(item));
      if (accept_punct(",")) continue;
      expect_punct(";");
      break;
    }
    return add_stmt(std::move(s));
  }

  // --- expressions -----------------------------------------------------------

  ExprId parse_expression() {
    ExprId e = parse_assignment();
    while (is_punct(",")) {
      const int ln = line();
      ++pos_;
      Expr node;
      node.kind = ExprKind::Comma;
      node.line = ln;
      node.a = e;
      node.b = parse_assignment();
      e = add_expr(std::move(node));
    }
    return e;
  }

  static bool is_assign_op(std::string_view p) {
    return p == "=" || p == "+=" || p == "-=" || p == "*=" || p == "/=" || p == "%=" ||
           p == "&=" || p == "|=" || p == "^=" || p == "<<=" || p == ">>=";
  }

  ExprId parse_assignment() {
    ExprId lhs = parse_ternary();
    if (cur().kind == TokKind::Punct && is_assign_op(cur().text)) {
      Expr node;
      node.kind = ExprKind::Assign;
      node.line = line();
      node.name = cur().text;  // the operator, e.g. "+="
      ++pos_;
      node.a = lhs;
      node.b = parse_assignment();
      return add_expr(std::move(node));
    }
    return lhs;
  }

  ExprId parse_ternary() {
    ExprId cond = parse_binary(0);
    if (!is_punct("?")) return cond;
    Expr node;
    node.kind = ExprKind::Ternary;
    node.line = line();
    ++pos_;
    node.a = cond;
    node.b = parse_expression();
    expect_punct(":");
    node.c = parse_assignment();
    return add_expr(std::move(node));
  }

  struct OpInfo {
    std::string_view text;
    BinOp op;
    int prec;
  };

  static const OpInfo* binary_op_info(std::string_view p) {
    static const OpInfo kOps[] = {
        {"||", BinOp::LogOr, 1},   {"^^", BinOp::LogXor, 2},  {"&&", BinOp::LogAnd, 3},
        {"|", BinOp::BitOr, 4},    {"^", BinOp::BitXor, 5},   {"&", BinOp::BitAnd, 6},
        {"==", BinOp::Eq, 7},      {"!=", BinOp::Ne, 7},      {"<", BinOp::Lt, 8},
        {">", BinOp::Gt, 8},       {"<=", BinOp::Le, 8},      {">=", BinOp::Ge, 8},
        {"<<", BinOp::Shl, 9},     {">>", BinOp::Shr, 9},     {"+", BinOp::Add, 10},
        {"-", BinOp::Sub, 10},     {"*", BinOp::Mul, 11},     {"/", BinOp::Div, 11},
        {"%", BinOp::Mod, 11},
    };
    for (const auto& o : kOps)
      if (o.text == p) return &o;
    return nullptr;
  }

  ExprId parse_binary(int min_prec) {
    ExprId lhs = parse_unary();
    for (;;) {
      if (cur().kind != TokKind::Punct) return lhs;
      const OpInfo* info = binary_op_info(cur().text);
      if (!info || info->prec < min_prec) return lhs;
      Expr node;
      node.kind = ExprKind::Binary;
      node.bin_op = info->op;
      node.line = line();
      ++pos_;
      node.a = lhs;
      node.b = parse_binary(info->prec + 1);
      lhs = add_expr(std::move(node));
    }
  }

  ExprId parse_unary() {
    const int ln = line();
    if (cur().kind == TokKind::Punct) {
      const std::string& p = cur().text;
      UnOp op;
      bool matched = true;
      if (p == "-")
        op = UnOp::Neg;
      else if (p == "+")
        op = UnOp::Pos;
      else if (p == "!")
        op = UnOp::Not;
      else if (p == "~")
        op = UnOp::BitNot;
      else if (p == "++")
        op = UnOp::PreInc;
      else if (p == "--")
        op = UnOp::PreDec;
      else
        matched = false;
      if (matched) {
        ++pos_;
        Expr node;
        node.kind = ExprKind::Unary;
        node.un_op = op;
        node.line = ln;
        node.a = parse_unary();
        return add_expr(std::move(node));
      }
    }
    return parse_postfix();
  }

  ExprId parse_postfix() {
    ExprId e = parse_primary();
    for (;;) {
      const int ln = line();
      if (accept_punct("[")) {
        Expr node;
        node.kind = ExprKind::Index;
        node.line = ln;
        node.a = e;
        node.b = parse_expression();
        expect_punct("]");
        e = add_expr(std::move(node));
        continue;
      }
      if (is_punct(".")) {
        ++pos_;
        Expr node;
        node.kind = ExprKind::Swizzle;
        node.line = ln;
        node.a = e;
        node.name = expect_name();
        e = add_expr(std::move(node));
        continue;
      }
      if (is_punct("++") || is_punct("--")) {
        Expr node;
        node.kind = ExprKind::Postfix;
        node.post_inc = cur().text == "++";
        node.line = ln;
        ++pos_;
        node.a = e;
        e = add_expr(std::move(node));
        continue;
      }
      return e;
    }
  }

  std::vector<ExprId> parse_call_args() {
    std::vector<ExprId> args;
    expect_punct("(");
    if (!is_punct(")")) {
      do {
        args.push_back(parse_assignment());
      } while (accept_punct(","));
    }
    expect_punct(")");
    return args;
  }

  ExprId parse_primary() {
    const int ln = line();
    if (cur().kind == TokKind::FloatLit) {
      Expr node;
      node.kind = ExprKind::FloatLit;
      node.num = cur().fval;
      node.line = ln;
      ++pos_;
      return add_expr(std::move(node));
    }
    if (cur().kind == TokKind::IntLit) {
      Expr node;
      node.kind = ExprKind::IntLit;
      node.inum = cur().ival;
      node.line = ln;
      ++pos_;
      return add_expr(std::move(node));
    }
    if (is_ident("true") || is_ident("false")) {
      Expr node;
      node.kind = ExprKind::BoolLit;
      node.inum = is_ident("true") ? 1 : 0;
      node.line = ln;
      ++pos_;
      return add_expr(std::move(node));
    }
    if (accept_punct("(")) {
      ExprId e = parse_expression();
      expect_punct(")");
      return e;
    }
    if (cur().kind == TokKind::Ident) {
      if (is_unsupported_type_name(cur().text))
        fail(ln, "unsupported type '" + cur().text + "'");
      auto type = type_from_name(cur().text);
      if (type && !type->is_void()) {
        ++pos_;
        if (is_punct("[")) fail(ln, "array constructors are only supported as initializers");
        Expr node;
        node.kind = ExprKind::Construct;
        node.construct_type = *type;
        node.line = ln;
        node.args = parse_call_args();
        return add_expr(std::move(node));
      }
      std::string name = expect_name();
      if (is_punct("(")) {
        Expr node;
        node.kind = ExprKind::Call;
        node.name = std::move(name);
        node.line = ln;
        node.args = parse_call_args();
        return add_expr(std::move(node));
      }
      Expr node;
      node.kind = ExprKind::VarRef;
      node.name = std::move(name);
      node.line = ln;
      return add_expr(std::move(node));
    }
    fail(ln, "unexpected token '" + cur().text + "'");
  }
};

}  // namespace procshade::glsl
