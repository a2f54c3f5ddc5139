#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "procshade/glsl/ir.hpp"
#include "procshade/glsl/resolve.hpp"

namespace procshade::glsl {

// Thrown when a frame exceeds its wall-clock budget (runaway loop guard).
struct EvalTimeout {};

// Runtime faults that static checking cannot rule out (call stack overflow).
struct EvalRuntimeError {
  std::string message;
};

// Executes a compiled ShaderProgram pixel by pixel. One ShaderExec holds the
// mutable state for one thread; the program itself is shared and immutable.
class ShaderExec {
 public:
  explicit ShaderExec(const ShaderProgram& p) : prog_(p) {
    template_.resize(p.global_slots);
    for (const GlobalVar& g : p.globals) {
      const std::int32_t count = std::max<std::int32_t>(1, g.array_len);
      for (std::int32_t k = 0; k < count; ++k) template_[g.slot + k] = Value::zero(g.type);
    }
    globals_.resize(p.global_slots);
    stack_.resize(kStackSlots);
  }

  void set_uniform(std::string_view name, std::initializer_list<float> comps) {
    auto it = prog_.uniform_slots.find(name);
    if (it == prog_.uniform_slots.end()) return;  // unused uniforms are fine
    Value& v = template_[it->second];
    int i = 0;
    for (float c : comps) {
      if (i >= v.type.element_count()) break;
      v.f[i++] = c;
    }
    if (v.type.base == Base::Int) v.i = static_cast<std::int32_t>(v.f[0]);
  }

  void set_deadline(std::chrono::steady_clock::time_point deadline) {
    deadline_ = deadline;
    has_deadline_ = true;
  }
  void clear_deadline() { has_deadline_ = false; }

  // Evaluates one fragment. `fx`, `fy` are gl_FragCoord.xy (pixel center,
  // origin bottom-left as in GL). Returns the raw color; quantization clamps.
  std::array<float, 4> run_pixel(float fx, float fy) {
    std::copy(template_.begin(), template_.end(), globals_.begin());
    Value& frag = globals_[prog_.fragcoord_slot];
    frag.f[0] = fx;
    frag.f[1] = fy;
    frag.f[2] = 0.5f;
    frag.f[3] = 1.0f;

    discarded_ = false;
    fp_ = 0;
    sp_ = 0;
    steps_ = kCheckInterval;

    try {
      for (const GlobalVar& g : prog_.globals) {
        if (g.init >= 0) globals_[g.slot] = convert(eval(g.init), g.type);
        for (std::size_t k = 0; k < g.array_init.size(); ++k)
          globals_[g.slot + static_cast<std::int32_t>(k)] =
              convert(eval(g.array_init[k]), g.type);
      }
      call_user(prog_.main_fn, nullptr, 0);
    } catch (const EvalDiscard&) {
      // discard: the fragment keeps the clear color
    }

    std::array<float, 4> rgba{0.0f, 0.0f, 0.0f, 1.0f};
    if (discarded_) return rgba;
    const Value& out = globals_[prog_.out_slot];
    for (int i = 0; i < out.type.comps && i < 4; ++i) rgba[i] = out.f[i];
    return rgba;
  }

  std::array<std::uint8_t, 3> run_pixel_rgb8(float fx, float fy) {
    const auto c = run_pixel(fx, fy);
    auto q = [](float v) {
      if (!(v == v)) return std::uint8_t{0};  // NaN renders black
      return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    };
    return {q(c[0]), q(c[1]), q(c[2])};
  }

 private:
  static constexpr std::size_t kStackSlots = 1 << 14;
  static constexpr std::uint64_t kCheckInterval = 1 << 16;
  static constexpr int kMaxCallDepth = 200;
  static constexpr int kMaxCallArgs = 16;

  const ShaderProgram& prog_;
  std::vector<Value> template_;
  std::vector<Value> globals_;
  std::vector<Value> stack_;
  std::int32_t fp_ = 0;
  std::int32_t sp_ = 0;
  int call_depth_ = 0;
  bool discarded_ = false;
  Value ret_{};
  std::uint64_t steps_ = kCheckInterval;
  bool has_deadline_ = false;
  std::chrono::steady_clock::time_point deadline_{};

  enum class Flow : std::uint8_t { Normal, Break, Continue, Return, Discard };

  void tick() {
    if (--steps_ == 0) {
      steps_ = kCheckInterval;
      if (has_deadline_ && std::chrono::steady_clock::now() > deadline_) throw EvalTimeout{};
    }
  }

  const Expr& X(ExprId id) const { return prog_.exprs[id]; }
  const Stmt& T(StmtId id) const { return prog_.stmts[id]; }

  Value* slot_ptr(const Expr& var) {
    return var.is_global ? &globals_[var.slot] : &stack_[fp_ + var.slot];
  }

  // --- lvalues -----------------------------------------------------------------

  // A resolved write target: a storage Value plus an optional component map.
  struct LV {
    Value* storage = nullptr;
    bool whole = true;
    std::uint8_t count = 0;
    std::uint8_t map[4] = {0, 0, 0, 0};
  };

  LV resolve_lv(ExprId id) {
    const Expr& e = X(id);
    switch (e.kind) {
      case ExprKind::VarRef: {
        LV lv;
        lv.storage = slot_ptr(e);
        return lv;
      }
      case ExprKind::Index: {
        const Expr& base = X(e.a);
        const std::int32_t idx = eval(e.b).scalar_int();
        if (base.kind == ExprKind::VarRef && base.array_len > 0) {
          LV lv;
          const std::int32_t k = std::clamp(idx, 0, base.array_len - 1);
          lv.storage = slot_ptr(base) + k;
          return lv;
        }
        LV lv = resolve_lv(e.a);
        const GType& bt = base.type;
        if (bt.is_mat()) {
          const int rows = bt.comps;
          const int c = std::clamp(idx, 0, bt.cols - 1);
          lv.whole = false;
          lv.count = static_cast<std::uint8_t>(rows);
          for (int r = 0; r < rows; ++r) lv.map[r] = static_cast<std::uint8_t>(c * rows + r);
          return lv;
        }
        // vector component (possibly through an existing map)
        const int comps = lv.whole ? bt.comps : lv.count;
        const int k = std::clamp(idx, 0, comps - 1);
        const std::uint8_t phys = lv.whole ? static_cast<std::uint8_t>(k) : lv.map[k];
        lv.whole = false;
        lv.count = 1;
        lv.map[0] = phys;
        return lv;
      }
      case ExprKind::Swizzle: {
        LV lv = resolve_lv(e.a);
        std::uint8_t composed[4];
        for (int i = 0; i < e.swiz_n; ++i)
          composed[i] = lv.whole ? e.swiz[i] : lv.map[e.swiz[i]];
        lv.whole = false;
        lv.count = e.swiz_n;
        for (int i = 0; i < e.swiz_n; ++i) lv.map[i] = composed[i];
        return lv;
      }
      default:
        throw EvalRuntimeError{"not an lvalue at line " + std::to_string(e.line)};
    }
  }

  Value lv_read(const LV& lv, const GType& as_type) {
    if (lv.whole) return *lv.storage;
    Value v = Value::zero(as_type);
    for (int i = 0; i < lv.count; ++i) v.f[i] = lv.storage->f[lv.map[i]];
    if (as_type.base == Base::Int) v.i = static_cast<std::int32_t>(v.f[0]);
    return v;
  }

  void lv_write(const LV& lv, const Value& v) {
    if (lv.whole) {
      Value nv = convert(v, lv.storage->type);
      *lv.storage = nv;
      return;
    }
    if (lv.count == 1) {
      lv.storage->f[lv.map[0]] = v.scalar_float();
      return;
    }
    for (int i = 0; i < lv.count; ++i) lv.storage->f[lv.map[i]] = v.f[i];
  }

  // --- conversions ----------------------------------------------------------------

  static Value convert(const Value& v, const GType& target) {
    if (v.type == target) return v;
    Value out = Value::zero(target);
    if (target == t_float()) {
      out.f[0] = v.scalar_float();
      return out;
    }
    if (target == t_int()) {
      out.i = v.type.base == Base::Float ? static_cast<std::int32_t>(v.f[0]) : v.i;
      out.f[0] = static_cast<float>(out.i);
      return out;
    }
    if (target == t_bool()) {
      out.i = v.truthy() ? 1 : 0;
      out.f[0] = static_cast<float>(out.i);
      return out;
    }
    // shapes match except int->float scalar was handled; copy components
    out = v;
    out.type = target;
    return out;
  }

  static Value make_float_shape(const Value& v, int comps) {
    // broadcast scalars; pass vectors through
    Value out = Value::zero(t_vec(comps));
    if (comps == 1) out.type = t_float();
    if (v.type.is_scalar()) {
      const float s = v.scalar_float();
      for (int i = 0; i < comps; ++i) out.f[i] = s;
    } else {
      for (int i = 0; i < comps; ++i) out.f[i] = v.f[i];
    }
    return out;
  }

  // --- statements -------------------------------------------------------------------

  Flow exec(StmtId sid) {
    tick();
    const Stmt& s = T(sid);
    switch (s.kind) {
      case StmtKind::Compound:
        for (StmtId c : s.body) {
          Flow f = exec(c);
          if (f != Flow::Normal) return f;
        }
        return Flow::Normal;
      case StmtKind::Decl:
        for (const DeclItem& d : s.decls) {
          const std::int32_t count = std::max<std::int32_t>(1, d.array_len);
          for (std::int32_t k = 0; k < count; ++k)
            stack_[fp_ + d.slot + k] = Value::zero(d.type);
          if (d.init >= 0) stack_[fp_ + d.slot] = convert(eval(d.init), d.type);
          for (std::size_t k = 0; k < d.array_init.size(); ++k)
            stack_[fp_ + d.slot + static_cast<std::int32_t>(k)] =
                convert(eval(d.array_init[k]), d.type);
        }
        return Flow::Normal;
      case StmtKind::ExprStmt:
        eval(s.expr);
        return Flow::Normal;
      case StmtKind::If:
        if (eval(s.expr).truthy()) return exec(s.s_then);
        if (s.s_else >= 0) return exec(s.s_else);
        return Flow::Normal;
      case StmtKind::For: {
        if (s.for_init >= 0) exec(s.for_init);
        for (;;) {
          tick();
          if (s.expr >= 0 && !eval(s.expr).truthy()) break;
          Flow f = exec(s.loop_body);
          if (f == Flow::Break) break;
          if (f == Flow::Return || f == Flow::Discard) return f;
          if (s.for_iter >= 0) eval(s.for_iter);
        }
        return Flow::Normal;
      }
      case StmtKind::While:
        for (;;) {
          tick();
          if (!eval(s.expr).truthy()) break;
          Flow f = exec(s.loop_body);
          if (f == Flow::Break) break;
          if (f == Flow::Return || f == Flow::Discard) return f;
        }
        return Flow::Normal;
      case StmtKind::DoWhile:
        for (;;) {
          tick();
          Flow f = exec(s.loop_body);
          if (f == Flow::Break) break;
          if (f == Flow::Return || f == Flow::Discard) return f;
          if (!eval(s.expr).truthy()) break;
        }
        return Flow::Normal;
      case StmtKind::Return:
        ret_ = s.expr >= 0 ? eval(s.expr) : Value{};
        return Flow::Return;
      case StmtKind::Break:
        return Flow::Break;
      case StmtKind::Continue:
        return Flow::Continue;
      case StmtKind::Discard:
        discarded_ = true;
        return Flow::Discard;
      case StmtKind::Empty:
        return Flow::Normal;
    }
    return Flow::Normal;
  }

  // --- calls ------------------------------------------------------------------------

  Value call_user(std::int32_t fn_index, const ExprId* arg_ids, std::size_t n_args) {
    const Function& fn = prog_.fns[fn_index];
    if (++call_depth_ > kMaxCallDepth) {
      --call_depth_;
      throw EvalRuntimeError{"call depth limit exceeded in '" + fn.name + "'"};
    }
    std::array<Value, kMaxCallArgs> argv;
    std::array<LV, kMaxCallArgs> out_refs;
    std::array<bool, kMaxCallArgs> has_out{};
    if (n_args > kMaxCallArgs) {
      --call_depth_;
      throw EvalRuntimeError{"too many call arguments"};
    }
    for (std::size_t i = 0; i < n_args; ++i) {
      const Param& p = fn.params[i];
      if (p.qual == ParamQual::In) {
        argv[i] = convert(eval(arg_ids[i]), p.type);
      } else {
        out_refs[i] = resolve_lv(arg_ids[i]);
        has_out[i] = true;
        argv[i] = p.qual == ParamQual::InOut ? lv_read(out_refs[i], p.type)
                                             : Value::zero(p.type);
      }
    }

    const std::int32_t saved_fp = fp_;
    const std::int32_t base = sp_;
    if (base + fn.frame_slots > static_cast<std::int32_t>(stack_.size())) {
      --call_depth_;
      throw EvalRuntimeError{"evaluation stack overflow in '" + fn.name + "'"};
    }
    fp_ = base;
    sp_ = base + fn.frame_slots;
    for (std::size_t i = 0; i < n_args; ++i) stack_[fp_ + fn.params[i].slot] = argv[i];

    ret_ = Value::zero(fn.ret);
    Flow f = exec(fn.body);
    Value result = f == Flow::Return ? ret_ : Value::zero(fn.ret);

    // copy out/inout parameters back (targets resolved in the caller frame)
    std::array<Value, kMaxCallArgs> outv;
    for (std::size_t i = 0; i < n_args; ++i)
      if (has_out[i]) outv[i] = stack_[fp_ + fn.params[i].slot];

    sp_ = base;
    fp_ = saved_fp;
    --call_depth_;
    for (std::size_t i = 0; i < n_args; ++i)
      if (has_out[i]) lv_write(out_refs[i], outv[i]);

    if (f == Flow::Discard) {
      discarded_ = true;
      // unwind to the top; the pixel result is the clear color
      throw EvalDiscard{};
    }
    return result;
  }

  struct EvalDiscard {};

  // --- expressions -------------------------------------------------------------------

  Value eval(ExprId id) {
    tick();
    const Expr& e = X(id);
    switch (e.kind) {
      case ExprKind::FloatLit:
        return Value::of_float(static_cast<float>(e.num));
      case ExprKind::IntLit:
        return Value::of_int(static_cast<std::int32_t>(e.inum));
      case ExprKind::BoolLit:
        return Value::of_bool(e.inum != 0);
      case ExprKind::VarRef:
        return *slot_ptr(e);
      case ExprKind::Swizzle: {
        const Value base = eval(e.a);
        if (e.swiz_n == 1) return Value::of_float(base.f[e.swiz[0]]);
        Value v = Value::zero(t_vec(e.swiz_n));
        for (int i = 0; i < e.swiz_n; ++i) v.f[i] = base.f[e.swiz[i]];
        return v;
      }
      case ExprKind::Index: {
        const Expr& b = X(e.a);
        if (b.kind == ExprKind::VarRef && b.array_len > 0) {
          const std::int32_t idx = std::clamp(eval(e.b).scalar_int(), 0, b.array_len - 1);
          return *(slot_ptr(b) + idx);
        }
        const Value base = eval(e.a);
        const std::int32_t raw = eval(e.b).scalar_int();
        if (base.type.is_mat()) {
          const int rows = base.type.comps;
          const int c = std::clamp(raw, 0, base.type.cols - 1);
          Value v = Value::zero(t_vec(rows));
          for (int r = 0; r < rows; ++r) v.f[r] = base.f[c * rows + r];
          return v;
        }
        const int k = std::clamp(raw, 0, base.type.comps - 1);
        return Value::of_float(base.f[k]);
      }
      case ExprKind::Call:
        if (e.fn_index >= 0)
          return call_user(e.fn_index, e.args.data(), e.args.size());
        return eval_builtin(e);
      case ExprKind::Construct:
        return eval_construct(e);
      case ExprKind::Unary:
        return eval_unary(e);
      case ExprKind::Postfix: {
        LV lv = resolve_lv(e.a);
        const Value old = lv_read(lv, X(e.a).type);
        lv_write(lv, add_one(old, e.post_inc ? 1.0f : -1.0f));
        return old;
      }
      case ExprKind::Binary:
        return eval_binary(e);
      case ExprKind::Assign:
        return eval_assign(e);
      case ExprKind::Ternary:
        return eval(e.a).truthy() ? convert(eval(e.b), e.type) : convert(eval(e.c), e.type);
      case ExprKind::Comma:
        eval(e.a);
        return eval(e.b);
    }
    throw EvalRuntimeError{"internal: unhandled expression"};
  }

  static Value add_one(const Value& v, float delta) {
    Value out = v;
    if (v.type == t_int()) {
      out.i = v.i + static_cast<std::int32_t>(delta);
      out.f[0] = static_cast<float>(out.i);
      return out;
    }
    for (int i = 0; i < v.type.element_count(); ++i) out.f[i] = v.f[i] + delta;
    return out;
  }

  Value eval_unary(const Expr& e) {
    if (e.un_op == UnOp::PreInc || e.un_op == UnOp::PreDec) {
      LV lv = resolve_lv(e.a);
      const Value nv = add_one(lv_read(lv, X(e.a).type), e.un_op == UnOp::PreInc ? 1.0f : -1.0f);
      lv_write(lv, nv);
      return nv;
    }
    Value a = eval(e.a);
    switch (e.un_op) {
      case UnOp::Pos:
        return a;
      case UnOp::Neg: {
        if (a.type == t_int()) return Value::of_int(-a.i);
        Value out = a;
        for (int i = 0; i < a.type.element_count(); ++i) out.f[i] = -a.f[i];
        return out;
      }
      case UnOp::Not:
        return Value::of_bool(!a.truthy());
      case UnOp::BitNot:
        return Value::of_int(~a.scalar_int());
      default:
        return a;
    }
  }

  Value eval_assign(const Expr& e) {
    const Value rhs = eval(e.b);
    LV lv = resolve_lv(e.a);
    const GType& lt = X(e.a).type;
    Value nv;
    if (e.name == "=") {
      nv = convert(rhs, lt);
    } else {
      const Value cur = lv_read(lv, lt);
      nv = convert(apply_binop(compound_base(e.name), cur, rhs, e.line), lt);
    }
    lv_write(lv, nv);
    return nv;
  }

  static BinOp compound_base(const std::string& text) {
    if (text == "+=") return BinOp::Add;
    if (text == "-=") return BinOp::Sub;
    if (text == "*=") return BinOp::Mul;
    if (text == "/=") return BinOp::Div;
    if (text == "%=") return BinOp::Mod;
    if (text == "&=") return BinOp::BitAnd;
    if (text == "|=") return BinOp::BitOr;
    if (text == "^=") return BinOp::BitXor;
    if (text == "<<=") return BinOp::Shl;
    return BinOp::Shr;
  }

  Value eval_binary(const Expr& e) {
    switch (e.bin_op) {
      case BinOp::LogAnd: {
        if (!eval(e.a).truthy()) return Value::of_bool(false);
        return Value::of_bool(eval(e.b).truthy());
      }
      case BinOp::LogOr: {
        if (eval(e.a).truthy()) return Value::of_bool(true);
        return Value::of_bool(eval(e.b).truthy());
      }
      default:
        break;
    }
    const Value a = eval(e.a);
    const Value b = eval(e.b);
    return apply_binop(e.bin_op, a, b, e.line);
  }

  static Value apply_binop(BinOp op, const Value& a, const Value& b, int line) {
    switch (op) {
      case BinOp::Add:
      case BinOp::Sub:
      case BinOp::Mul:
      case BinOp::Div:
        return arith(op, a, b);
      case BinOp::Mod: {
        const std::int32_t d = b.scalar_int();
        return Value::of_int(d == 0 ? 0 : wrap_mod(a.scalar_int(), d));
      }
      case BinOp::Shl:
        return Value::of_int(static_cast<std::int32_t>(
            static_cast<std::uint32_t>(a.scalar_int()) << (b.scalar_int() & 31)));
      case BinOp::Shr:
        return Value::of_int(a.scalar_int() >> (b.scalar_int() & 31));
      case BinOp::BitAnd:
        return Value::of_int(a.scalar_int() & b.scalar_int());
      case BinOp::BitOr:
        return Value::of_int(a.scalar_int() | b.scalar_int());
      case BinOp::BitXor:
        return Value::of_int(a.scalar_int() ^ b.scalar_int());
      case BinOp::Lt:
        return Value::of_bool(a.scalar_float() < b.scalar_float());
      case BinOp::Gt:
        return Value::of_bool(a.scalar_float() > b.scalar_float());
      case BinOp::Le:
        return Value::of_bool(a.scalar_float() <= b.scalar_float());
      case BinOp::Ge:
        return Value::of_bool(a.scalar_float() >= b.scalar_float());
      case BinOp::Eq:
        return Value::of_bool(values_equal(a, b));
      case BinOp::Ne:
        return Value::of_bool(!values_equal(a, b));
      case BinOp::LogXor:
        return Value::of_bool(a.truthy() != b.truthy());
      case BinOp::LogAnd:
      case BinOp::LogOr:
        break;  // handled by the caller (short circuit)
    }
    throw EvalRuntimeError{"internal: bad binary op at line " + std::to_string(line)};
  }

  static std::int32_t wrap_mod(std::int32_t a, std::int32_t b) {
    if (b == -1) return 0;  // INT_MIN % -1 traps
    return a % b;
  }

  static bool values_equal(const Value& a, const Value& b) {
    if (a.type.is_scalar() && b.type.is_scalar()) {
      if (a.type == t_int() && b.type == t_int()) return a.i == b.i;
      if (a.type == t_bool() && b.type == t_bool()) return a.i == b.i;
      return a.scalar_float() == b.scalar_float();
    }
    if (!(a.type == b.type)) return false;
    const int n = a.type.element_count();
    for (int i = 0; i < n; ++i)
      if (a.f[i] != b.f[i]) return false;
    return true;
  }

  static Value arith(BinOp op, const Value& a, const Value& b) {
    const bool amat = a.type.is_mat(), bmat = b.type.is_mat();
    if (amat || bmat) return mat_arith(op, a, b);
    if (a.type == t_int() && b.type == t_int()) {
      const std::int64_t x = a.i, y = b.i;
      std::int64_t r = 0;
      switch (op) {
        case BinOp::Add: r = x + y; break;
        case BinOp::Sub: r = x - y; break;
        case BinOp::Mul: r = x * y; break;
        case BinOp::Div: r = y == 0 ? 0 : x / y; break;
        default: break;
      }
      return Value::of_int(static_cast<std::int32_t>(r));
    }
    const int comps = std::max(a.type.is_vec() ? a.type.comps : 1,
                               b.type.is_vec() ? b.type.comps : 1);
    Value out = Value::zero(comps == 1 ? t_float() : t_vec(comps));
    const bool abro = !a.type.is_vec();
    const bool bbro = !b.type.is_vec();
    const float as = a.scalar_float();
    const float bs = b.scalar_float();
    for (int i = 0; i < comps; ++i) {
      const float x = abro ? as : a.f[i];
      const float y = bbro ? bs : b.f[i];
      switch (op) {
        case BinOp::Add: out.f[i] = x + y; break;
        case BinOp::Sub: out.f[i] = x - y; break;
        case BinOp::Mul: out.f[i] = x * y; break;
        case BinOp::Div: out.f[i] = x / y; break;
        default: break;
      }
    }
    return out;
  }

  static Value mat_arith(BinOp op, const Value& a, const Value& b) {
    const bool amat = a.type.is_mat(), bmat = b.type.is_mat();
    if (amat && bmat) {
      const int n = a.type.cols;
      if (op == BinOp::Mul) {
        // column-major linear product
        Value out = Value::zero(t_mat(n));
        for (int c = 0; c < n; ++c)
          for (int r = 0; r < n; ++r) {
            float acc = 0;
            for (int k = 0; k < n; ++k) acc += a.f[k * n + r] * b.f[c * n + k];
            out.f[c * n + r] = acc;
          }
        return out;
      }
      Value out = Value::zero(t_mat(n));
      for (int i = 0; i < n * n; ++i) {
        switch (op) {
          case BinOp::Add: out.f[i] = a.f[i] + b.f[i]; break;
          case BinOp::Sub: out.f[i] = a.f[i] - b.f[i]; break;
          case BinOp::Div: out.f[i] = a.f[i] / b.f[i]; break;
          default: break;
        }
      }
      return out;
    }
    const Value& m = amat ? a : b;
    const Value& o = amat ? b : a;
    const int n = m.type.cols;
    if (o.type.is_vec() && op == BinOp::Mul) {
      Value out = Value::zero(t_vec(n));
      if (amat) {
        // m * v
        for (int r = 0; r < n; ++r) {
          float acc = 0;
          for (int c = 0; c < n; ++c) acc += m.f[c * n + r] * o.f[c];
          out.f[r] = acc;
        }
      } else {
        // v * m: dot of the vector with each column
        for (int c = 0; c < n; ++c) {
          float acc = 0;
          for (int r = 0; r < n; ++r) acc += o.f[r] * m.f[c * n + r];
          out.f[c] = acc;
        }
      }
      return out;
    }
    // matrix op scalar, componentwise
    const float s = o.scalar_float();
    Value out = Value::zero(m.type);
    for (int i = 0; i < n * n; ++i) {
      const float x = amat ? m.f[i] : s;
      const float y = amat ? s : m.f[i];
      switch (op) {
        case BinOp::Add: out.f[i] = x + y; break;
        case BinOp::Sub: out.f[i] = x - y; break;
        case BinOp::Mul: out.f[i] = x * y; break;
        case BinOp::Div: out.f[i] = x / y; break;
        default: break;
      }
    }
    return out;
  }

  Value eval_construct(const Expr& e) {
    const GType target = e.construct_type;
    if (target.is_scalar()) {
      const Value v = eval(e.args[0]);
      return convert(v, target);
    }
    if (target.is_vec()) {
      Value out = Value::zero(target);
      if (e.args.size() == 1) {
        const Value v = eval(e.args[0]);
        if (v.type.is_scalar()) {
          const float s = v.scalar_float();
          for (int i = 0; i < target.comps; ++i) out.f[i] = s;
          return out;
        }
        for (int i = 0; i < target.comps; ++i) out.f[i] = v.f[i];
        return out;
      }
      int k = 0;
      for (ExprId a : e.args) {
        const Value v = eval(a);
        const int n = v.type.is_scalar() ? 1 : v.type.element_count();
        for (int i = 0; i < n && k < target.comps; ++i)
          out.f[k++] = v.type.is_scalar() ? v.scalar_float() : v.f[i];
      }
      return out;
    }
    // matrix
    const int n = target.cols;
    Value out = Value::zero(target);
    if (e.args.size() == 1) {
      const Value v = eval(e.args[0]);
      if (v.type.is_scalar()) {
        const float s = v.scalar_float();
        for (int i = 0; i < n; ++i) out.f[i * n + i] = s;
        return out;
      }
      // corner copy from another matrix, identity elsewhere
      const int m = v.type.cols;
      for (int i = 0; i < n; ++i) out.f[i * n + i] = 1.0f;
      for (int c = 0; c < std::min(n, m); ++c)
        for (int r = 0; r < std::min(n, m); ++r) out.f[c * n + r] = v.f[c * m + r];
      return out;
    }
    int k = 0;
    for (ExprId a : e.args) {
      const Value v = eval(a);
      const int cnt = v.type.is_scalar() ? 1 : v.type.element_count();
      for (int i = 0; i < cnt && k < n * n; ++i)
        out.f[k++] = v.type.is_scalar() ? v.scalar_float() : v.f[i];
    }
    return out;
  }

  // --- builtins ----------------------------------------------------------------------

  Value eval_builtin(const Expr& e) {
    const Builtin b = static_cast<Builtin>(e.builtin);
    auto arg = [&](int i) { return eval(e.args[i]); };

    auto cw1 = [&](auto fn) {
      Value v = make_float_shape(arg(0), X(e.args[0]).type.is_vec() ? X(e.args[0]).type.comps : 1);
      for (int i = 0; i < v.type.element_count(); ++i) v.f[i] = fn(v.f[i]);
      return v;
    };
    auto shape_of = [&]() {
      int comps = 1;
      for (ExprId a : e.args) comps = std::max<int>(comps, X(a).type.is_vec() ? X(a).type.comps : 1);
      return comps;
    };
    auto cw2 = [&](auto fn) {
      const int comps = shape_of();
      Value x = make_float_shape(arg(0), comps);
      Value y = make_float_shape(arg(1), comps);
      for (int i = 0; i < comps; ++i) x.f[i] = fn(x.f[i], y.f[i]);
      return x;
    };
    auto cw3 = [&](auto fn) {
      const int comps = shape_of();
      Value x = make_float_shape(arg(0), comps);
      Value y = make_float_shape(arg(1), comps);
      Value z = make_float_shape(arg(2), comps);
      for (int i = 0; i < comps; ++i) x.f[i] = fn(x.f[i], y.f[i], z.f[i]);
      return x;
    };

    switch (b) {
      case Builtin::Radians: return cw1([](float x) { return x * 0.01745329251994329577f; });
      case Builtin::Degrees: return cw1([](float x) { return x * 57.29577951308232088f; });
      case Builtin::Sin: return cw1([](float x) { return std::sin(x); });
      case Builtin::Cos: return cw1([](float x) { return std::cos(x); });
      case Builtin::Tan: return cw1([](float x) { return std::tan(x); });
      case Builtin::Asin: return cw1([](float x) { return std::asin(x); });
      case Builtin::Acos: return cw1([](float x) { return std::acos(x); });
      case Builtin::Atan: return cw1([](float x) { return std::atan(x); });
      case Builtin::Sinh: return cw1([](float x) { return std::sinh(x); });
      case Builtin::Cosh: return cw1([](float x) { return std::cosh(x); });
      case Builtin::Tanh: return cw1([](float x) { return std::tanh(x); });
      case Builtin::Exp: return cw1([](float x) { return std::exp(x); });
      case Builtin::Log: return cw1([](float x) { return std::log(x); });
      case Builtin::Exp2: return cw1([](float x) { return std::exp2(x); });
      case Builtin::Log2: return cw1([](float x) { return std::log2(x); });
      case Builtin::Sqrt: return cw1([](float x) { return std::sqrt(x); });
      case Builtin::InverseSqrt: return cw1([](float x) { return 1.0f / std::sqrt(x); });
      case Builtin::Floor: return cw1([](float x) { return std::floor(x); });
      case Builtin::Ceil: return cw1([](float x) { return std::ceil(x); });
      case Builtin::Fract: return cw1([](float x) { return x - std::floor(x); });
      case Builtin::Trunc: return cw1([](float x) { return std::trunc(x); });
      case Builtin::Round: return cw1([](float x) { return std::round(x); });
      case Builtin::Atan2: return cw2([](float y, float x) { return std::atan2(y, x); });
      case Builtin::Pow: return cw2([](float x, float y) { return std::pow(x, y); });
      case Builtin::Mod: return cw2([](float x, float y) { return x - y * std::floor(x / y); });
      case Builtin::Step: return cw2([](float edge, float x) { return x < edge ? 0.0f : 1.0f; });
      case Builtin::Mix:
        return cw3([](float x, float y, float a) { return x * (1.0f - a) + y * a; });
      case Builtin::Smoothstep:
        return cw3([](float e0, float e1, float x) {
          const float t = std::clamp((x - e0) / (e1 - e0), 0.0f, 1.0f);
          return t * t * (3.0f - 2.0f * t);
        });

      case Builtin::Abs: {
        const Value v = arg(0);
        if (v.type == t_int()) return Value::of_int(std::abs(v.i));
        return cw1([](float x) { return std::fabs(x); });
      }
      case Builtin::Sign: {
        const Value v = arg(0);
        if (v.type == t_int()) return Value::of_int((v.i > 0) - (v.i < 0));
        return cw1([](float x) { return static_cast<float>((x > 0.0f) - (x < 0.0f)); });
      }
      case Builtin::Min: {
        const Value x = arg(0);
        const Value y = arg(1);
        if (x.type == t_int() && y.type == t_int()) return Value::of_int(std::min(x.i, y.i));
        const int comps = shape_of();
        Value a = make_float_shape(x, comps), c = make_float_shape(y, comps);
        for (int i = 0; i < comps; ++i) a.f[i] = std::min(a.f[i], c.f[i]);
        return a;
      }
      case Builtin::Max: {
        const Value x = arg(0);
        const Value y = arg(1);
        if (x.type == t_int() && y.type == t_int()) return Value::of_int(std::max(x.i, y.i));
        const int comps = shape_of();
        Value a = make_float_shape(x, comps), c = make_float_shape(y, comps);
        for (int i = 0; i < comps; ++i) a.f[i] = std::max(a.f[i], c.f[i]);
        return a;
      }
      case Builtin::Clamp: {
        const Value x = arg(0);
        const Value lo = arg(1);
        const Value hi = arg(2);
        if (x.type == t_int() && lo.type == t_int() && hi.type == t_int())
          return Value::of_int(std::clamp(x.i, lo.i, hi.i));
        const int comps = shape_of();
        Value a = make_float_shape(x, comps);
        Value l = make_float_shape(lo, comps);
        Value h = make_float_shape(hi, comps);
        for (int i = 0; i < comps; ++i) a.f[i] = std::clamp(a.f[i], l.f[i], h.f[i]);
        return a;
      }

      case Builtin::Length:
      case Builtin::Distance: {
        const int comps = shape_of();
        Value x = make_float_shape(arg(0), comps);
        if (b == Builtin::Distance) {
          const Value y = make_float_shape(arg(1), comps);
          for (int i = 0; i < comps; ++i) x.f[i] -= y.f[i];
        }
        float acc = 0;
        for (int i = 0; i < comps; ++i) acc += x.f[i] * x.f[i];
        return Value::of_float(std::sqrt(acc));
      }
      case Builtin::Dot: {
        const int comps = shape_of();
        const Value x = make_float_shape(arg(0), comps);
        const Value y = make_float_shape(arg(1), comps);
        float acc = 0;
        for (int i = 0; i < comps; ++i) acc += x.f[i] * y.f[i];
        return Value::of_float(acc);
      }
      case Builtin::Cross: {
        const Value a = arg(0);
        const Value c = arg(1);
        Value out = Value::zero(t_vec(3));
        out.f[0] = a.f[1] * c.f[2] - a.f[2] * c.f[1];
        out.f[1] = a.f[2] * c.f[0] - a.f[0] * c.f[2];
        out.f[2] = a.f[0] * c.f[1] - a.f[1] * c.f[0];
        return out;
      }
      case Builtin::Normalize: {
        const Value v = arg(0);
        const int comps = v.type.element_count();
        float acc = 0;
        for (int i = 0; i < comps; ++i) acc += v.f[i] * v.f[i];
        const float inv = 1.0f / std::sqrt(acc);
        Value out = v;
        for (int i = 0; i < comps; ++i) out.f[i] = v.f[i] * inv;
        return out;
      }
      case Builtin::Faceforward: {
        const int comps = shape_of();
        const Value n = make_float_shape(arg(0), comps);
        const Value i = make_float_shape(arg(1), comps);
        const Value nref = make_float_shape(arg(2), comps);
        float d = 0;
        for (int k = 0; k < comps; ++k) d += nref.f[k] * i.f[k];
        Value out = n;
        if (d >= 0)
          for (int k = 0; k < comps; ++k) out.f[k] = -n.f[k];
        return out;
      }
      case Builtin::Reflect: {
        const int comps = shape_of();
        const Value i = make_float_shape(arg(0), comps);
        const Value n = make_float_shape(arg(1), comps);
        float d = 0;
        for (int k = 0; k < comps; ++k) d += n.f[k] * i.f[k];
        Value out = i;
        for (int k = 0; k < comps; ++k) out.f[k] = i.f[k] - 2.0f * d * n.f[k];
        return out;
      }
      case Builtin::Refract: {
        const int comps = X(e.args[0]).type.is_vec() ? X(e.args[0]).type.comps : 1;
        const Value i = make_float_shape(arg(0), comps);
        const Value n = make_float_shape(arg(1), comps);
        const float eta = arg(2).scalar_float();
        float d = 0;
        for (int k = 0; k < comps; ++k) d += n.f[k] * i.f[k];
        const float k = 1.0f - eta * eta * (1.0f - d * d);
        Value out = Value::zero(i.type);
        if (k >= 0.0f) {
          const float c = eta * d + std::sqrt(k);
          for (int q = 0; q < comps; ++q) out.f[q] = eta * i.f[q] - c * n.f[q];
        }
        return out;
      }
      case Builtin::MatrixCompMult: {
        const Value a = arg(0);
        const Value c = arg(1);
        Value out = a;
        for (int i = 0; i < a.type.element_count(); ++i) out.f[i] = a.f[i] * c.f[i];
        return out;
      }
      case Builtin::Transpose: {
        const Value m = arg(0);
        const int n = m.type.cols;
        Value out = Value::zero(m.type);
        for (int c = 0; c < n; ++c)
          for (int r = 0; r < n; ++r) out.f[r * n + c] = m.f[c * n + r];
        return out;
      }
      case Builtin::None:
        break;
    }
    throw EvalRuntimeError{"internal: unhandled builtin"};
  }
};

}  // namespace procshade::glsl
