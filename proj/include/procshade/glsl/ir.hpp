#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace procshade::glsl {

// ---------------------------------------------------------------------------
// Types. The evaluator covers the GLSL 3.30 subset the corpus dialects need:
// scalars (float/int/bool), float vectors, square float matrices, and 1-D
// arrays of those. Unsupported constructs fail at compile with a log, which
// the corpus pipeline records as a rejection reason.
// ---------------------------------------------------------------------------

enum class Base : std::uint8_t { Void, Bool, Int, Float };

struct GType {
  Base base = Base::Void;
  std::uint8_t comps = 1;  // vector size (1 for scalars)
  std::uint8_t cols = 0;   // matrix column count (0 unless matrix)

  bool operator==(const GType&) const = default;

  bool is_void() const { return base == Base::Void; }
  bool is_scalar() const { return cols == 0 && comps == 1 && base != Base::Void; }
  bool is_vec() const { return cols == 0 && comps > 1; }
  bool is_mat() const { return cols > 0; }
  bool is_float_kind() const { return base == Base::Float; }
  bool is_numeric_scalar() const {
    return is_scalar() && (base == Base::Float || base == Base::Int);
  }
  int element_count() const { return is_mat() ? cols * comps : comps; }
};

inline GType t_void() { return {Base::Void, 1, 0}; }
inline GType t_bool() { return {Base::Bool, 1, 0}; }
inline GType t_int() { return {Base::Int, 1, 0}; }
inline GType t_float() { return {Base::Float, 1, 0}; }
inline GType t_vec(int n) { return {Base::Float, static_cast<std::uint8_t>(n), 0}; }
inline GType t_mat(int n) {
  return {Base::Float, static_cast<std::uint8_t>(n), static_cast<std::uint8_t>(n)};
}

inline std::string type_name(const GType& t) {
  if (t.is_void()) return "void";
  if (t.is_mat()) return "mat" + std::to_string(t.cols);
  if (t.is_vec()) return "vec" + std::to_string(t.comps);
  switch (t.base) {
    case Base::Bool: return "bool";
    case Base::Int: return "int";
    case Base::Float: return "float";
    default: return "void";
  }
}

// Runtime value. Matrices are stored column-major: element (row r, col c) at
// f[c * rows + r]. Int and bool scalars live in `i`.
struct Value {
  GType type{};
  std::int32_t i = 0;
  std::array<float, 16> f{};

  static Value of_float(float x) {
    Value v;
    v.type = t_float();
    v.f[0] = x;
    return v;
  }
  static Value of_int(std::int32_t x) {
    Value v;
    v.type = t_int();
    v.i = x;
    v.f[0] = static_cast<float>(x);
    return v;
  }
  static Value of_bool(bool b) {
    Value v;
    v.type = t_bool();
    v.i = b ? 1 : 0;
    v.f[0] = b ? 1.0f : 0.0f;
    return v;
  }
  static Value zero(const GType& t) {
    Value v;
    v.type = t;
    return v;
  }

  float scalar_float() const { return type.base == Base::Float ? f[0] : static_cast<float>(i); }
  std::int32_t scalar_int() const {
    return type.base == Base::Float ? static_cast<std::int32_t>(f[0]) : i;
  }
  bool truthy() const { return type.base == Base::Float ? f[0] != 0.0f : i != 0; }
};

// ---------------------------------------------------------------------------
// AST. Nodes live in flat arenas inside ShaderProgram and reference each
// other by index; -1 means "absent".
// ---------------------------------------------------------------------------

using ExprId = std::int32_t;
using StmtId = std::int32_t;

enum class ExprKind : std::uint8_t {
  FloatLit,
  IntLit,
  BoolLit,
  VarRef,
  Swizzle,     // a.<swiz>
  Index,       // a[b]
  Call,        // user function or builtin
  Construct,   // vec3(...), float(...), mat2(...)
  Unary,       // op a
  Postfix,     // a++ / a--
  Binary,      // a op b
  Assign,      // a op= b ("=" when op empty)
  Ternary,     // a ? b : c
  Comma,       // a, b
};

enum class BinOp : std::uint8_t {
  Add, Sub, Mul, Div, Mod,
  Lt, Gt, Le, Ge, Eq, Ne,
  LogAnd, LogOr, LogXor,
  BitAnd, BitOr, BitXor, Shl, Shr,
};

enum class UnOp : std::uint8_t { Neg, Pos, Not, BitNot, PreInc, PreDec };

struct Expr {
  ExprKind kind;
  GType type{};  // filled during resolve
  ExprId a = -1, b = -1, c = -1;
  std::vector<ExprId> args;
  double num = 0;
  std::int64_t inum = 0;
  std::string name;  // identifier / member text / callee
  std::uint8_t swiz[4] = {0, 0, 0, 0};
  std::uint8_t swiz_n = 0;
  BinOp bin_op{};
  UnOp un_op{};
  bool post_inc = false;  // Postfix: ++ vs --
  // resolution results
  std::int32_t slot = -1;
  bool is_global = false;
  std::int32_t array_len = 0;  // for VarRef to arrays
  std::int32_t fn_index = -1;
  std::int32_t builtin = -1;
  GType construct_type{};
  int line = 0;
};

enum class StmtKind : std::uint8_t {
  Compound,
  Decl,
  ExprStmt,
  If,
  For,
  While,
  DoWhile,
  Return,
  Break,
  Continue,
  Discard,
  Empty,
};

struct DeclItem {
  std::string name;
  GType type{};
  std::int32_t slot = -1;
  std::int32_t array_len = 0;  // 0 = not an array
  ExprId init = -1;
  std::vector<ExprId> array_init;
};

struct Stmt {
  StmtKind kind;
  std::vector<StmtId> body;  // compound
  std::vector<DeclItem> decls;
  ExprId expr = -1;        // ExprStmt / Return value / condition for If-While-DoWhile
  StmtId s_then = -1, s_else = -1;
  StmtId for_init = -1;    // Decl or ExprStmt
  ExprId for_iter = -1;
  StmtId loop_body = -1;
  int line = 0;
};

enum class ParamQual : std::uint8_t { In, Out, InOut };

struct Param {
  std::string name;
  GType type{};
  ParamQual qual = ParamQual::In;
  std::int32_t slot = -1;
};

struct Function {
  std::string name;
  GType ret{};
  std::vector<Param> params;
  StmtId body = -1;
  std::int32_t frame_slots = 0;
  bool defined = false;
};

struct GlobalVar {
  std::string name;
  GType type{};
  std::int32_t slot = -1;
  std::int32_t array_len = 0;
  ExprId init = -1;
  std::vector<ExprId> array_init;
  bool is_uniform = false;
  bool is_out = false;
  bool is_const = false;
};

// Compiled shader: AST arenas plus resolved layout. Immutable after compile;
// safe to share across threads (execution state lives in ShaderExec).
struct ShaderProgram {
  std::string source;  // preprocessed text (for diagnostics)
  std::vector<Expr> exprs;
  std::vector<Stmt> stmts;
  std::vector<Function> fns;
  std::vector<GlobalVar> globals;
  std::int32_t main_fn = -1;
  std::int32_t out_slot = -1;      // slot of the color output variable
  GType out_type{};
  std::int32_t fragcoord_slot = -1;
  std::int32_t global_slots = 0;
  std::map<std::string, std::int32_t, std::less<>> uniform_slots;  // name -> slot
};

}  // namespace procshade::glsl
