#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "procshade/glsl/diag.hpp"
#include "procshade/glsl/ir.hpp"

namespace procshade::glsl {

enum class Builtin : std::uint16_t {
  None = 0,
  Radians, Degrees, Sin, Cos, Tan, Asin, Acos, Atan, Atan2, Sinh, Cosh, Tanh,
  Exp, Log, Exp2, Log2, Sqrt, InverseSqrt,
  Floor, Ceil, Fract, Trunc, Round, Sign, Abs,
  Pow, Mod, Min, Max, Step,
  Clamp, Mix, Smoothstep,
  Length, Distance, Dot, Cross, Normalize, Faceforward, Reflect, Refract,
  MatrixCompMult, Transpose,
};

// Name resolution + static type check over the parsed AST. Fills slots,
// expression types, callee indices and the program's I/O layout. Failures
// carry GL-style logs so rejected shaders keep a useful reason.
class Resolver {
 public:
  static void run(ShaderProgram& p) { Resolver(p).resolve_all(); }

 private:
  explicit Resolver(ShaderProgram& p) : p_(p) {}

  ShaderProgram& p_;

  struct VarInfo {
    std::int32_t slot = -1;
    GType type{};
    std::int32_t array_len = 0;
    bool is_global = false;
    bool readonly = false;
  };

  std::vector<std::map<std::string, VarInfo, std::less<>>> scopes_;
  std::int32_t next_local_ = 0;
  Function* cur_fn_ = nullptr;

  // --- helpers ---------------------------------------------------------------

  Expr& E(ExprId id) { return p_.exprs[id]; }
  Stmt& S(StmtId id) { return p_.stmts[id]; }

  static bool is_float_shape(const GType& t) {
    return t.base == Base::Float && !t.is_mat();
  }
  static bool is_gen_float(const GType& t) { return is_float_shape(t); }
  static bool num_scalar(const GType& t) { return t.is_numeric_scalar(); }

  // int scalar promotes to float scalar wherever a float is expected
  static bool matches_float_scalar(const GType& t) {
    return t == t_float() || t == t_int();
  }
  static bool same_gen(const GType& a, const GType& b) {
    if (is_gen_float(a) && is_gen_float(b) && a.comps == b.comps) return true;
    if (matches_float_scalar(a) && matches_float_scalar(b)) return true;
    return false;
  }

  const VarInfo* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void declare(const std::string& name, VarInfo info, int line) {
    auto& scope = scopes_.back();
    if (scope.count(name)) fail(line, "redeclaration of '" + name + "'");
    scope[name] = info;
  }

  std::int32_t alloc_local(std::int32_t count) {
    std::int32_t s = next_local_;
    next_local_ += count;
    if (cur_fn_ && next_local_ > cur_fn_->frame_slots) cur_fn_->frame_slots = next_local_;
    return s;
  }

  // --- top level ---------------------------------------------------------------

  void resolve_all() {
    // global layout: slot per variable, arrays take consecutive slots
    std::int32_t next = 0;
    scopes_.emplace_back();

    {
      GlobalVar frag;
      frag.name = "gl_FragCoord";
      frag.type = t_vec(4);
      p_.globals.push_back(frag);
    }

    for (auto& g : p_.globals) {
      g.slot = next;
      next += std::max<std::int32_t>(1, g.array_len);
      VarInfo info;
      info.slot = g.slot;
      info.type = g.type;
      info.array_len = g.array_len;
      info.is_global = true;
      info.readonly = g.is_uniform || g.is_const || g.name == "gl_FragCoord";
      declare(g.name, info, 0);
      if (g.name == "gl_FragCoord") p_.fragcoord_slot = g.slot;
      if (g.is_uniform && g.array_len == 0) p_.uniform_slots[g.name] = g.slot;
      if (g.is_out && p_.out_slot < 0) {
        if (!(g.type == t_vec(4) || g.type == t_vec(3)))
          fail(0, "color output '" + g.name + "' must be vec3 or vec4");
        p_.out_slot = g.slot;
        p_.out_type = g.type;
      }
    }
    p_.global_slots = next;

    // global initializers resolve in the global scope
    for (auto& g : p_.globals) {
      if (g.init >= 0) {
        GType t = resolve_expr(g.init);
        if (!assignable(g.type, t)) fail(E(g.init).line, "initializer type mismatch for '" + g.name + "'");
      }
      for (ExprId e : g.array_init) {
        GType t = resolve_expr(e);
        if (!assignable(g.type, t)) fail(E(e).line, "array initializer type mismatch for '" + g.name + "'");
      }
    }

    for (std::size_t i = 0; i < p_.fns.size(); ++i) {
      Function& fn = p_.fns[i];
      if (!fn.defined) continue;
      cur_fn_ = &fn;
      next_local_ = 0;
      fn.frame_slots = 0;
      scopes_.emplace_back();
      for (auto& param : fn.params) {
        param.slot = alloc_local(1);
        VarInfo info;
        info.slot = param.slot;
        info.type = param.type;
        declare(param.name.empty() ? "$unnamed" + std::to_string(param.slot) : param.name, info,
                0);
      }
      resolve_stmt(fn.body);
      scopes_.pop_back();
      cur_fn_ = nullptr;
      if (fn.name == "main") {
        if (!fn.params.empty() || !(fn.ret == t_void()))
          fail(0, "main must be declared as 'void main()'");
        p_.main_fn = static_cast<std::int32_t>(i);
      }
    }
    if (p_.main_fn < 0) fail(0, "no 'void main()' entry point");
    if (p_.out_slot < 0) fail(0, "no color output variable declared");
  }

  // --- statements ---------------------------------------------------------------

  void resolve_stmt(StmtId sid) {
    Stmt& s = S(sid);
    switch (s.kind) {
      case StmtKind::Compound: {
        scopes_.emplace_back();
        for (StmtId c : s.body) resolve_stmt(c);
        scopes_.pop_back();
        return;
      }
      case StmtKind::Decl: {
        for (auto& d : s.decls) {
          d.slot = alloc_local(std::max<std::int32_t>(1, d.array_len));
          if (d.init >= 0) {
            GType t = resolve_expr(d.init);
            if (!assignable(d.type, t))
              fail(s.line, "cannot initialize " + type_name(d.type) + " '" + d.name + "' from " +
                               type_name(t));
          }
          for (ExprId e : d.array_init) {
            GType t = resolve_expr(e);
            if (!assignable(d.type, t)) fail(s.line, "array initializer type mismatch");
          }
          VarInfo info;
          info.slot = d.slot;
          info.type = d.type;
          info.array_len = d.array_len;
          declare(d.name, info, s.line);
        }
        return;
      }
      case StmtKind::ExprStmt:
        resolve_expr(s.expr);
        return;
      case StmtKind::If: {
        require_bool(s.expr, s.line);
        resolve_stmt(s.s_then);
        if (s.s_else >= 0) resolve_stmt(s.s_else);
        return;
      }
      case StmtKind::For: {
        scopes_.emplace_back();
        if (s.for_init >= 0) resolve_stmt(s.for_init);
        if (s.expr >= 0) require_bool(s.expr, s.line);
        if (s.for_iter >= 0) resolve_expr(s.for_iter);
        resolve_stmt(s.loop_body);
        scopes_.pop_back();
        return;
      }
      case StmtKind::While:
      case StmtKind::DoWhile: {
        require_bool(s.expr, s.line);
        resolve_stmt(s.loop_body);
        return;
      }
      case StmtKind::Return: {
        if (s.expr >= 0) {
          GType t = resolve_expr(s.expr);
          if (cur_fn_->ret == t_void()) fail(s.line, "returning a value from a void function");
          if (!assignable(cur_fn_->ret, t))
            fail(s.line, "return type mismatch in '" + cur_fn_->name + "'");
        } else if (!(cur_fn_->ret == t_void())) {
          fail(s.line, "non-void function '" + cur_fn_->name + "' returns no value");
        }
        return;
      }
      case StmtKind::Break:
      case StmtKind::Continue:
      case StmtKind::Discard:
      case StmtKind::Empty:
        return;
    }
  }

  void require_bool(ExprId e, int line) {
    GType t = resolve_expr(e);
    if (!(t == t_bool())) fail(line, "condition must be bool, got " + type_name(t));
  }

  // assignment compatibility: exact, or int scalar -> float scalar
  static bool assignable(const GType& dst, const GType& src) {
    if (dst == src) return true;
    if (dst == t_float() && src == t_int()) return true;
    return false;
  }

  // --- expressions ---------------------------------------------------------------

  GType resolve_expr(ExprId id, bool allow_array = false) {
    Expr& e = E(id);
    switch (e.kind) {
      case ExprKind::FloatLit:
        return e.type = t_float();
      case ExprKind::IntLit:
        return e.type = t_int();
      case ExprKind::BoolLit:
        return e.type = t_bool();
      case ExprKind::VarRef: {
        const VarInfo* v = lookup(e.name);
        if (!v) fail(e.line, "undeclared identifier '" + e.name + "'");
        e.slot = v->slot;
        e.is_global = v->is_global;
        e.array_len = v->array_len;
        if (v->array_len > 0 && !allow_array)
          fail(e.line, "array '" + e.name + "' must be indexed");
        return e.type = v->type;
      }
      case ExprKind::Swizzle: {
        GType base = resolve_expr(e.a);
        if (!base.is_vec()) fail(e.line, "swizzle on non-vector of type " + type_name(base));
        decode_swizzle(e, base.comps);
        return e.type = (e.swiz_n == 1 ? t_float() : t_vec(e.swiz_n));
      }
      case ExprKind::Index: {
        GType base = resolve_expr(e.a, /*allow_array=*/true);
        GType idx = resolve_expr(e.b);
        if (!(idx == t_int())) fail(e.line, "index must be an int");
        Expr& basex = E(e.a);
        if (basex.kind == ExprKind::VarRef && basex.array_len > 0) return e.type = base;
        if (base.is_mat()) return e.type = t_vec(base.comps);
        if (base.is_vec()) return e.type = t_float();
        fail(e.line, "cannot index a " + type_name(base));
      }
      case ExprKind::Call:
        return e.type = resolve_call(e);
      case ExprKind::Construct:
        return e.type = resolve_construct(e);
      case ExprKind::Unary: {
        GType a = resolve_expr(e.a);
        switch (e.un_op) {
          case UnOp::Neg:
          case UnOp::Pos:
            if (a == t_bool() || a.is_void()) fail(e.line, "bad operand for unary +/-");
            return e.type = a;
          case UnOp::Not:
            if (!(a == t_bool())) fail(e.line, "operand of ! must be bool");
            return e.type = t_bool();
          case UnOp::BitNot:
            if (!(a == t_int())) fail(e.line, "operand of ~ must be int");
            return e.type = t_int();
          case UnOp::PreInc:
          case UnOp::PreDec:
            check_lvalue(e.a);
            if (a == t_bool() || a.is_void()) fail(e.line, "bad operand for ++/--");
            return e.type = a;
        }
        return e.type = a;
      }
      case ExprKind::Postfix: {
        GType a = resolve_expr(e.a);
        check_lvalue(e.a);
        if (a == t_bool() || a.is_void()) fail(e.line, "bad operand for ++/--");
        return e.type = a;
      }
      case ExprKind::Binary:
        return e.type = resolve_binary(e);
      case ExprKind::Assign: {
        GType lhs = resolve_expr(e.a);
        GType rhs = resolve_expr(e.b);
        check_lvalue(e.a);
        if (e.name == "=") {
          if (!assignable(lhs, rhs))
            fail(e.line, "cannot assign " + type_name(rhs) + " to " + type_name(lhs));
          return e.type = lhs;
        }
        // compound: infer via the base operator, then require assignability
        Expr probe;
        probe.kind = ExprKind::Binary;
        probe.line = e.line;
        probe.a = e.a;
        probe.b = e.b;
        probe.bin_op = compound_op(e.name, e.line);
        GType r = binary_result(probe.bin_op, lhs, rhs, e.line);
        if (!assignable(lhs, r) && !(lhs.is_vec() && r == lhs) && !(lhs.is_mat() && r == lhs))
          fail(e.line, "result of compound assignment does not fit " + type_name(lhs));
        return e.type = lhs;
      }
      case ExprKind::Ternary: {
        require_bool(e.a, e.line);
        GType b = resolve_expr(e.b);
        GType c = resolve_expr(e.c);
        if (b == c) return e.type = b;
        if (matches_float_scalar(b) && matches_float_scalar(c)) return e.type = t_float();
        fail(e.line, "ternary branches have mismatched types");
      }
      case ExprKind::Comma: {
        resolve_expr(e.a);
        return e.type = resolve_expr(e.b);
      }
    }
    fail(e.line, "internal: unhandled expression kind");
  }

  static BinOp compound_op(const std::string& text, int line) {
    if (text == "+=") return BinOp::Add;
    if (text == "-=") return BinOp::Sub;
    if (text == "*=") return BinOp::Mul;
    if (text == "/=") return BinOp::Div;
    if (text == "%=") return BinOp::Mod;
    if (text == "&=") return BinOp::BitAnd;
    if (text == "|=") return BinOp::BitOr;
    if (text == "^=") return BinOp::BitXor;
    if (text == "<<=") return BinOp::Shl;
    if (text == ">>=") return BinOp::Shr;
    fail(line, "unknown compound assignment " + text);
  }

  void decode_swizzle(Expr& e, int base_comps) {
    static const std::string kSets[3] = {"xyzw", "rgba", "stpq"};
    const std::string& m = e.name;
    if (m.empty() || m.size() > 4) fail(e.line, "bad swizzle '." + m + "'");
    int set = -1;
    for (int s = 0; s < 3; ++s)
      if (kSets[s].find(m[0]) != std::string::npos) set = s;
    if (set < 0) fail(e.line, "bad swizzle '." + m + "'");
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::size_t idx = kSets[set].find(m[i]);
      if (idx == std::string::npos) fail(e.line, "bad swizzle '." + m + "'");
      if (static_cast<int>(idx) >= base_comps)
        fail(e.line, "swizzle '." + m + "' out of range for vec" + std::to_string(base_comps));
      e.swiz[i] = static_cast<std::uint8_t>(idx);
    }
    e.swiz_n = static_cast<std::uint8_t>(m.size());
  }

  void check_lvalue(ExprId id) {
    Expr& e = E(id);
    switch (e.kind) {
      case ExprKind::VarRef: {
        const VarInfo* v = lookup(e.name);
        if (v && v->readonly) fail(e.line, "'" + e.name + "' is read-only");
        return;
      }
      case ExprKind::Swizzle: {
        for (int i = 0; i < e.swiz_n; ++i)
          for (int j = i + 1; j < e.swiz_n; ++j)
            if (e.swiz[i] == e.swiz[j])
              fail(e.line, "swizzle used as lvalue has duplicate components");
        check_lvalue(e.a);
        return;
      }
      case ExprKind::Index:
        check_lvalue(e.a);
        return;
      default:
        fail(e.line, "expression is not assignable");
    }
  }

  GType resolve_binary(Expr& e) {
    GType a = resolve_expr(e.a);
    GType b = resolve_expr(e.b);
    return binary_result(e.bin_op, a, b, e.line);
  }

  static GType binary_result(BinOp op, const GType& a, const GType& b, int line) {
    auto num = [&](const GType& t) { return !t.is_void() && t.base != Base::Bool; };
    switch (op) {
      case BinOp::Add:
      case BinOp::Sub:
      case BinOp::Div:
      case BinOp::Mul: {
        if (!num(a) || !num(b)) fail(line, "arithmetic on non-numeric operands");
        const bool amat = a.is_mat(), bmat = b.is_mat();
        if (amat && bmat) {
          if (a.cols != b.cols) fail(line, "matrix size mismatch");
          return a;  // linear product for Mul, componentwise otherwise
        }
        if (amat || bmat) {
          const GType& m = amat ? a : b;
          const GType& o = amat ? b : a;
          if (o.is_scalar()) return m;
          if (o.is_vec() && op == BinOp::Mul) {
            if (o.comps != m.cols) fail(line, "matrix/vector size mismatch");
            return t_vec(m.comps);
          }
          fail(line, "invalid matrix operand combination");
        }
        if (a.is_vec() && b.is_vec()) {
          if (a.comps != b.comps) fail(line, "vector size mismatch");
          return a;
        }
        if (a.is_vec() && b.is_scalar()) return a;
        if (b.is_vec() && a.is_scalar()) return b;
        // scalar op scalar
        if (a == t_int() && b == t_int()) return t_int();
        return t_float();
      }
      case BinOp::Mod:
        if (a == t_int() && b == t_int()) return t_int();
        fail(line, "% requires int operands (use mod() for floats)");
      case BinOp::Shl:
      case BinOp::Shr:
      case BinOp::BitAnd:
      case BinOp::BitOr:
      case BinOp::BitXor:
        if (a == t_int() && b == t_int()) return t_int();
        fail(line, "bitwise operators require int operands");
      case BinOp::Lt:
      case BinOp::Gt:
      case BinOp::Le:
      case BinOp::Ge:
        if (num_scalar(a) && num_scalar(b)) return t_bool();
        fail(line, "relational operators require numeric scalars");
      case BinOp::Eq:
      case BinOp::Ne:
        if (a == b || (num_scalar(a) && num_scalar(b))) return t_bool();
        fail(line, "cannot compare " + type_name(a) + " with " + type_name(b));
      case BinOp::LogAnd:
      case BinOp::LogOr:
      case BinOp::LogXor:
        if (a == t_bool() && b == t_bool()) return t_bool();
        fail(line, "logical operators require bool operands");
    }
    fail(line, "internal: unhandled binary operator");
  }

  GType resolve_construct(Expr& e) {
    const GType target = e.construct_type;
    std::vector<GType> args;
    args.reserve(e.args.size());
    for (ExprId a : e.args) args.push_back(resolve_expr(a));
    if (args.empty()) fail(e.line, "constructor needs arguments");
    for (const GType& t : args)
      if (t.is_void() ) fail(e.line, "void argument in constructor");

    if (target.is_scalar()) {
      if (args.size() != 1 || !args[0].is_scalar())
        fail(e.line, type_name(target) + " constructor takes one scalar");
      return target;
    }
    auto flat_count = [](const GType& t) { return t.element_count(); };
    if (target.is_vec()) {
      if (args.size() == 1 && args[0].is_scalar()) return target;  // broadcast
      if (args.size() == 1 && flat_count(args[0]) >= target.comps) return target;  // truncate
      int total = 0;
      for (const GType& t : args) {
        if (t.base == Base::Bool && !t.is_scalar()) fail(e.line, "bool in vector constructor");
        total += flat_count(t);
      }
      if (total != target.comps)
        fail(e.line, "vec" + std::to_string(target.comps) + " constructor needs " +
                         std::to_string(target.comps) + " components, got " + std::to_string(total));
      return target;
    }
    // matrix
    if (args.size() == 1 && args[0].is_scalar()) return target;  // diagonal
    if (args.size() == 1 && args[0].is_mat()) return target;     // corner copy
    int total = 0;
    for (const GType& t : args) {
      if (t.is_mat()) fail(e.line, "matrix argument in mixed matrix constructor");
      total += flat_count(t);
    }
    if (total != target.element_count())
      fail(e.line, type_name(target) + " constructor component count mismatch");
    return target;
  }

  GType resolve_call(Expr& e) {
    std::vector<GType> args;
    args.reserve(e.args.size());
    for (ExprId a : e.args) args.push_back(resolve_expr(a));

    // user functions shadow builtins
    for (std::size_t i = 0; i < p_.fns.size(); ++i) {
      const Function& fn = p_.fns[i];
      if (fn.name != e.name || fn.params.size() != args.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; ok && k < args.size(); ++k)
        ok = assignable(fn.params[k].type, args[k]) ||
             (fn.params[k].qual != ParamQual::In && fn.params[k].type == args[k]);
      if (!ok) continue;
      if (!fn.defined) fail(e.line, "function '" + e.name + "' declared but never defined");
      // out/inout arguments must be lvalues of the exact type
      for (std::size_t k = 0; k < args.size(); ++k) {
        if (fn.params[k].qual != ParamQual::In) {
          if (!(fn.params[k].type == args[k]))
            fail(e.line, "out parameter type mismatch in call to '" + e.name + "'");
          check_lvalue(e.args[k]);
        }
      }
      e.fn_index = static_cast<std::int32_t>(i);
      return fn.ret;
    }
    auto [builtin, ret] = resolve_builtin(e.name, args, e.line);
    e.builtin = static_cast<std::int32_t>(builtin);
    return ret;
  }

  static std::pair<Builtin, GType> resolve_builtin(const std::string& name,
                                                   const std::vector<GType>& args, int line) {
    const std::size_t n = args.size();
    auto gen1 = [&](Builtin b) -> std::pair<Builtin, GType> {
      if (n != 1 || !(is_gen_float(args[0]) || args[0] == t_int()))
        fail(line, "bad arguments for " + name);
      return {b, args[0] == t_int() ? t_float() : args[0]};
    };
    auto gen2 = [&](Builtin b, bool scalar_second_ok) -> std::pair<Builtin, GType> {
      if (n != 2) fail(line, "bad arguments for " + name);
      GType a = args[0], c = args[1];
      if (same_gen(a, c)) return {b, a == t_int() && c == t_int() ? t_float() : (a.is_vec() ? a : t_float())};
      if (scalar_second_ok && a.is_vec() && matches_float_scalar(c)) return {b, a};
      fail(line, "bad arguments for " + name);
    };

    if (name == "radians") return gen1(Builtin::Radians);
    if (name == "degrees") return gen1(Builtin::Degrees);
    if (name == "sin") return gen1(Builtin::Sin);
    if (name == "cos") return gen1(Builtin::Cos);
    if (name == "tan") return gen1(Builtin::Tan);
    if (name == "asin") return gen1(Builtin::Asin);
    if (name == "acos") return gen1(Builtin::Acos);
    if (name == "sinh") return gen1(Builtin::Sinh);
    if (name == "cosh") return gen1(Builtin::Cosh);
    if (name == "tanh") return gen1(Builtin::Tanh);
    if (name == "exp") return gen1(Builtin::Exp);
    if (name == "log") return gen1(Builtin::Log);
    if (name == "exp2") return gen1(Builtin::Exp2);
    if (name == "log2") return gen1(Builtin::Log2);
    if (name == "sqrt") return gen1(Builtin::Sqrt);
    if (name == "inversesqrt") return gen1(Builtin::InverseSqrt);
    if (name == "floor") return gen1(Builtin::Floor);
    if (name == "ceil") return gen1(Builtin::Ceil);
    if (name == "fract") return gen1(Builtin::Fract);
    if (name == "trunc") return gen1(Builtin::Trunc);
    if (name == "round") return gen1(Builtin::Round);

    if (name == "abs" || name == "sign") {
      if (n != 1) fail(line, name + " takes one argument");
      if (args[0] == t_int()) return {name == "abs" ? Builtin::Abs : Builtin::Sign, t_int()};
      if (is_gen_float(args[0]))
        return {name == "abs" ? Builtin::Abs : Builtin::Sign, args[0]};
      fail(line, "bad arguments for " + name);
    }
    if (name == "atan") {
      if (n == 1) return gen1(Builtin::Atan);
      return gen2(Builtin::Atan2, false);
    }
    if (name == "pow") return gen2(Builtin::Pow, false);
    if (name == "mod") return gen2(Builtin::Mod, true);
    if (name == "min" || name == "max") {
      Builtin b = name == "min" ? Builtin::Min : Builtin::Max;
      if (n == 2 && args[0] == t_int() && args[1] == t_int()) return {b, t_int()};
      return gen2(b, true);
    }
    if (name == "step") {
      if (n != 2) fail(line, "step takes two arguments");
      GType edge = args[0], x = args[1];
      if (same_gen(edge, x)) return {Builtin::Step, x.is_vec() ? x : t_float()};
      if (matches_float_scalar(edge) && x.is_vec()) return {Builtin::Step, x};
      fail(line, "bad arguments for step");
    }
    if (name == "clamp") {
      if (n != 3) fail(line, "clamp takes three arguments");
      if (args[0] == t_int() && args[1] == t_int() && args[2] == t_int())
        return {Builtin::Clamp, t_int()};
      GType x = args[0];
      if (!is_gen_float(x) && !matches_float_scalar(x)) fail(line, "bad arguments for clamp");
      bool scalars = matches_float_scalar(args[1]) && matches_float_scalar(args[2]);
      bool same = same_gen(x, args[1]) && same_gen(x, args[2]);
      if (!scalars && !same) fail(line, "bad arguments for clamp");
      return {Builtin::Clamp, x.is_vec() ? x : t_float()};
    }
    if (name == "mix") {
      if (n != 3) fail(line, "mix takes three arguments");
      GType x = args[0], y = args[1], a = args[2];
      if (!same_gen(x, y)) fail(line, "mix operands must match");
      if (same_gen(x, a) || matches_float_scalar(a))
        return {Builtin::Mix, x.is_vec() ? x : t_float()};
      fail(line, "bad arguments for mix");
    }
    if (name == "smoothstep") {
      if (n != 3) fail(line, "smoothstep takes three arguments");
      GType e0 = args[0], e1 = args[1], x = args[2];
      if (!same_gen(e0, e1)) fail(line, "smoothstep edges must match");
      if (same_gen(e0, x) || (matches_float_scalar(e0) && x.is_vec()))
        return {Builtin::Smoothstep, x.is_vec() ? x : t_float()};
      fail(line, "bad arguments for smoothstep");
    }
    if (name == "length" || name == "distance" || name == "dot") {
      std::size_t want = name == "length" ? 1 : 2;
      if (n != want) fail(line, name + " argument count");
      for (const GType& t : args)
        if (!(is_gen_float(t) || t == t_int())) fail(line, "bad arguments for " + name);
      if (want == 2 && !same_gen(args[0], args[1])) fail(line, name + " operands must match");
      Builtin b = name == "length" ? Builtin::Length
                  : name == "distance" ? Builtin::Distance
                                       : Builtin::Dot;
      return {b, t_float()};
    }
    if (name == "cross") {
      if (n != 2 || !(args[0] == t_vec(3)) || !(args[1] == t_vec(3)))
        fail(line, "cross requires two vec3");
      return {Builtin::Cross, t_vec(3)};
    }
    if (name == "normalize") {
      if (n != 1 || !is_gen_float(args[0])) fail(line, "bad arguments for normalize");
      return {Builtin::Normalize, args[0]};
    }
    if (name == "faceforward") {
      if (n != 3 || !is_gen_float(args[0]) || !same_gen(args[0], args[1]) ||
          !same_gen(args[0], args[2]))
        fail(line, "bad arguments for faceforward");
      return {Builtin::Faceforward, args[0]};
    }
    if (name == "reflect") {
      if (n != 2 || !is_gen_float(args[0]) || !same_gen(args[0], args[1]))
        fail(line, "bad arguments for reflect");
      return {Builtin::Reflect, args[0]};
    }
    if (name == "refract") {
      if (n != 3 || !is_gen_float(args[0]) || !same_gen(args[0], args[1]) ||
          !matches_float_scalar(args[2]))
        fail(line, "bad arguments for refract");
      return {Builtin::Refract, args[0]};
    }
    if (name == "matrixCompMult") {
      if (n != 2 || !args[0].is_mat() || !(args[0] == args[1]))
        fail(line, "matrixCompMult requires two equal matrices");
      return {Builtin::MatrixCompMult, args[0]};
    }
    if (name == "transpose") {
      if (n != 1 || !args[0].is_mat()) fail(line, "transpose requires a matrix");
      return {Builtin::Transpose, args[0]};
    }
    fail(line, "unknown function '" + name + "'");
  }
};

}  // namespace procshade::glsl
