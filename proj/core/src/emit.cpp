#include "ttune/emit.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ttune {

namespace {

constexpr const char* kVersion = "0.1.0";

using Vars = std::vector<std::pair<std::string, std::string>>;

std::string subst(std::string text, const Vars& vars) {
  for (const auto& [key, value] : vars) {
    const std::string tok = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = text.find(tok, pos)) != std::string::npos) {
      text.replace(pos, tok.size(), value);
      pos += value.size();
    }
  }
  return text;
}

EmitDialect make_c_omp() {
  EmitDialect d;
  d.name = "c-omp";
  d.source_extension = "cpp";
  d.header_extension = "h";
  auto& s = d.slots;
  s["banner"] =
      "/* {entry}\n"
      " * tensor transpose kernel generated by ttune {version}\n"
      " * problem: {problem}\n"
      " * plan: {plan}\n"
      " */\n";
  s["include"] = "#include \"{include}\"\n";
  s["header"] =
      "#ifndef {guard}\n"
      "#define {guard}\n"
      "\n"
      "/* B = alpha * transpose(A) + beta * B\n"
      " * problem: {problem}\n"
      " * plan: {plan}\n"
      " */\n"
      "#ifdef __cplusplus\n"
      "extern \"C\" {\n"
      "#endif\n"
      "\n"
      "void {entry}(const {ta}* A, {tb}* B, {tw} alpha, {tw} beta);\n"
      "\n"
      "#ifdef __cplusplus\n"
      "}\n"
      "#endif\n"
      "\n"
      "#endif\n";
  s["fn_open"] =
      "static void {name}(const {ta}* a, long lda, {tb}* b, long ldb{extra}, {tw} alpha, {tw} "
      "beta) {\n";
  s["fn_close"] = "}\n";
  s["entry_open"] = "void {entry}(const {ta}* A, {tb}* B, {tw} alpha, {tw} beta) {\n";
  s["decl_long"] = "{indent}const long {name} = {value};\n";
  s["decl"] = "{indent}{type} {name} = {value};\n";
  s["assign"] = "{indent}{lhs} = {rhs};\n";
  s["loop_inc"] = "{indent}for (long {var} = {begin}; {var} < {limit}; ++{var}) {\n";
  s["loop_step"] = "{indent}for (long {var} = {begin}; {var} < {limit}; {var} += {step}) {\n";
  s["close"] = "{indent}}\n";
  s["call"] = "{indent}{name}({args});\n";
  s["parallel_main"] = "#pragma omp parallel\n#pragma omp for collapse({n}) schedule(static)\n";
  s["parallel_for"] = "#pragma omp parallel for collapse({n}) schedule(static)\n";
  s["prefetch"] = "{indent}__builtin_prefetch({addr}, {rw});\n";
  s["stream_hint"] = "#pragma vector nontemporal\n";
  s["marker_main"] = "{indent}/* main loops */\n";
  s["marker_remainder"] = "{indent}/* remainder loops */\n";
  s["comment"] = "{indent}/* {text} */\n";
  s["if_open"] = "{indent}if ({cond}) {\n";
  s["block_open"] = "{indent}{\n";
  s["blank"] = "\n";
  return d;
}

const std::map<std::string, EmitDialect>& registry() {
  static const std::map<std::string, EmitDialect> reg = [] {
    std::map<std::string, EmitDialect> m;
    EmitDialect omp = make_c_omp();
    EmitDialect plain = omp;
    plain.name = "c-plain";
    plain.source_extension = "c";
    plain.slots["parallel_main"] = "";
    plain.slots["parallel_for"] = "";
    m[omp.name] = std::move(omp);
    m[plain.name] = std::move(plain);
    return m;
  }();
  return reg;
}

std::string num(std::int64_t v) { return std::to_string(v); }

struct Ctx {
  const TransposeProblem* p = nullptr;
  const CandidatePlan* plan = nullptr;
  const EmitDialect* dial = nullptr;
  int C = 1;
  std::string ta, tb, tw;
  Vars base;
  std::ostringstream out;
  int depth = 1;

  void put(const std::string& slot, Vars vars = {}) {
    const auto it = dial->slots.find(slot);
    if (it == dial->slots.end()) throw std::logic_error("emit: dialect lacks slot " + slot);
    if (it->second.empty()) return;
    vars.emplace_back("indent", std::string(static_cast<std::size_t>(depth) * 2, ' '));
    vars.insert(vars.end(), base.begin(), base.end());
    out << subst(it->second, vars);
  }
};

std::string var_of(int axis) { return "i" + num(axis + 1); }

// A-side element offset term of one axis
std::string a_term(int axis, const std::string& var) {
  if (axis == 0) return var;
  return var + " * lda" + num(axis);
}

// B-side element offset term of one axis
std::string b_term(const Ctx& c, int axis, const std::string& var) {
  const int k = c.p->perm.map[static_cast<std::size_t>(axis)];
  if (k == 1) return var;
  return var + " * ldb" + num(k - 1);
}

std::string join_terms(const std::vector<std::string>& terms) {
  if (terms.empty()) return "0";
  std::string out = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) out += " + " + terms[i];
  return out;
}

// element offset -> scalar subscript
std::string at(const Ctx& c, const std::string& elem_offset, int component = 0) {
  if (c.C == 1) return elem_offset;
  std::string s = "(" + elem_offset + ") * 2";
  if (component) s += " + 1";
  return s;
}

std::string update_rhs(const Ctx& c, const std::string& a, const std::string& b) {
  const bool ss = c.plan->streaming_stores;
  if (c.ta == c.tb) return ss ? "alpha * " + a : "alpha * " + a + " + beta * " + b;
  if (c.ta == "float")
    return ss ? "alpha * (double)" + a : "alpha * (double)" + a + " + beta * " + b;
  return ss ? "(float)(alpha * " + a + ")"
            : "(float)(alpha * " + a + " + beta * (double)" + b + ")";
}

void emit_update(Ctx& c, const std::string& a_off, const std::string& b_off) {
  for (int q = 0; q < c.C; ++q) {
    const std::string be = "B[" + at(c, b_off, q) + "]";
    c.put("assign", {{"lhs", be}, {"rhs", update_rhs(c, "A[" + at(c, a_off, q) + "]", be)}});
  }
}

bool is_pow2(int w) { return w >= 1 && (w & (w - 1)) == 0; }

std::string micro_name(const Ctx& c) {
  return "transpose_micro_" + num(c.plan->micro_width) + "x" + num(c.plan->micro_width);
}

std::string macro_name(const Ctx& c) {
  std::string n = "transpose_" + num(c.plan->block_a) + "x" + num(c.plan->block_b);
  if (c.plan->prefetch_distance > 0) n += "_pf" + num(c.plan->prefetch_distance);
  return n;
}

std::string tvar(const Ctx& c, int r, int col, int q) {
  std::string n = "t" + num(r) + "_" + num(col);
  if (c.C == 2) n += "_" + num(q);
  return n;
}

// micro element (r, col) subscripts into the a / b tile arguments
std::string micro_elem(const std::string& stride_name, int fast, int slow) {
  if (slow == 0) return num(fast);
  if (fast == 0) return num(slow) + " * " + stride_name;
  return num(fast) + " + " + num(slow) + " * " + stride_name;
}

void emit_micro_fn(Ctx& c) {
  const int w = c.plan->micro_width;
  c.put("fn_open", {{"name", micro_name(c)}, {"extra", ""}});
  c.depth = 1;
  if (is_pow2(w) && w >= 2 && w <= 32) {
    for (int r = 0; r < w; ++r)
      for (int col = 0; col < w; ++col)
        for (int q = 0; q < c.C; ++q)
          c.put("decl", {{"type", c.ta},
                         {"name", tvar(c, r, col, q)},
                         {"value", "a[" + at(c, micro_elem("lda", col, r), q) + "]"}});
    c.put("decl", {{"type", c.ta}, {"name", "t"}, {"value", "0"}});
    for (int h = w / 2; h >= 1; h /= 2)
      for (int r = 0; r < w; ++r) {
        if (r & h) continue;
        for (int col = 0; col < w; ++col) {
          if (!(col & h)) continue;
          for (int q = 0; q < c.C; ++q) {
            const std::string x = tvar(c, r, col, q), y = tvar(c, r + h, col - h, q);
            c.put("assign", {{"lhs", "t"}, {"rhs", x}});
            c.put("assign", {{"lhs", x}, {"rhs", y}});
            c.put("assign", {{"lhs", y}, {"rhs", "t"}});
          }
        }
      }
    if (c.plan->streaming_stores) c.put("stream_hint");
    for (int r = 0; r < w; ++r)
      for (int col = 0; col < w; ++col)
        for (int q = 0; q < c.C; ++q) {
          const std::string be = "b[" + at(c, micro_elem("ldb", col, r), q) + "]";
          c.put("assign", {{"lhs", be}, {"rhs", update_rhs(c, tvar(c, r, col, q), be)}});
        }
  } else {
    c.put("loop_inc", {{"var", "u"}, {"begin", "0"}, {"limit", num(w)}});
    ++c.depth;
    c.put("loop_inc", {{"var", "v"}, {"begin", "0"}, {"limit", num(w)}});
    ++c.depth;
    if (c.plan->streaming_stores) c.put("stream_hint");
    for (int q = 0; q < c.C; ++q) {
      const std::string be = "b[" + at(c, "u * ldb + v", q) + "]";
      c.put("assign",
            {{"lhs", be}, {"rhs", update_rhs(c, "a[" + at(c, "v * lda + u", q) + "]", be)}});
    }
    --c.depth;
    c.put("close");
    --c.depth;
    c.put("close");
  }
  c.depth = 0;
  c.put("fn_close");
}

void emit_macro_fn(Ctx& c) {
  const int w = c.plan->micro_width;
  const std::int64_t ba = c.plan->block_a, bb = c.plan->block_b;
  const int d = c.plan->prefetch_distance;
  std::string extra;
  if (d > 0) extra = ", const " + c.ta + "* a_pf, " + c.tb + "* b_pf";
  c.put("fn_open", {{"name", macro_name(c)}, {"extra", extra}});
  c.depth = 1;
  c.put("loop_step", {{"var", "ua"}, {"begin", "0"}, {"limit", num(ba)}, {"step", num(w)}});
  ++c.depth;
  c.put("loop_step", {{"var", "ub"}, {"begin", "0"}, {"limit", num(bb)}, {"step", num(w)}});
  ++c.depth;
  if (d > 0) {
    const std::int64_t nv = bb / w, n = (ba / w) * nv;
    c.put("if_open", {{"cond", "((ua / " + num(w) + ") * " + num(nv) + " + ub / " + num(w) +
                                   " + " + num(d) + ") / " + num(n) + " == 1"}});
    ++c.depth;
    for (int r = 0; r < w; ++r)
      c.put("prefetch",
            {{"addr", "&a_pf[" + at(c, "ua + (ub + " + num(r) + ") * lda") + "]"}, {"rw", "0"}});
    for (int r = 0; r < w; ++r)
      c.put("prefetch",
            {{"addr", "&b_pf[" + at(c, "(ua + " + num(r) + ") * ldb + ub") + "]"}, {"rw", "1"}});
    --c.depth;
    c.put("close");
  }
  c.put("call", {{"name", micro_name(c)},
                 {"args", "&a[" + at(c, "ua + ub * lda") + "], lda, &b[" +
                              at(c, "ua * ldb + ub") + "], ldb, alpha, beta"}});
  --c.depth;
  c.put("close");
  --c.depth;
  c.put("close");
  c.depth = 0;
  c.put("fn_close");
}

struct MainAxis {
  int axis = 0;
  std::int64_t step = 1;     // block extent or 1
  std::int64_t full = 0;     // extent covered by full tiles
  std::string limit;         // loop bound expression
};

std::vector<MainAxis> main_axes(const Ctx& c, bool skip_first) {
  std::vector<MainAxis> out;
  for (int id : c.plan->loop_order) {
    const int axis = id - 1;
    if (skip_first && axis == 0) continue;
    MainAxis m;
    m.axis = axis;
    m.step = 1;
    const std::int64_t size = c.p->sizes[static_cast<std::size_t>(axis)];
    const bool case1 = c.p->perm.preserves_stride1();
    const int a_blocked = case1 ? 1 : 0;
    const int b_blocked = case1 ? c.p->perm.inverse().map[1] - 1 : b_stride1_axis(*c.p);
    if (axis == a_blocked)
      m.step = c.plan->block_a;
    else if (axis == b_blocked)
      m.step = c.plan->block_b;
    // no clamping: a block wider than the extent leaves zero full tiles and
    // the remainder loops cover the whole axis
    m.full = size - size % m.step;
    m.limit = m.step == 1 ? "size" + num(axis) : "size" + num(axis) + " - " + num(m.step - 1);
    out.push_back(m);
  }
  return out;
}

std::string offset_a(const std::vector<std::pair<int, std::string>>& axis_vars) {
  std::vector<std::string> terms;
  for (const auto& [axis, var] : axis_vars) terms.push_back(a_term(axis, var));
  return join_terms(terms);
}

std::string offset_b(const Ctx& c, const std::vector<std::pair<int, std::string>>& axis_vars) {
  std::vector<std::string> terms;
  for (const auto& [axis, var] : axis_vars) terms.push_back(b_term(c, axis, var));
  return join_terms(terms);
}

// scalar pointer advance along one axis by `step` elements
std::string advance_a(const Ctx& c, int axis, std::int64_t step) {
  const std::int64_t scaled = step * c.C;
  if (axis == 0) return num(scaled);
  return num(scaled) + " * lda" + num(axis);
}

std::string advance_b(const Ctx& c, int axis, std::int64_t step) {
  const std::int64_t scaled = step * c.C;
  const int k = c.p->perm.map[static_cast<std::size_t>(axis)];
  if (k == 1) return num(scaled);
  return num(scaled) + " * ldb" + num(k - 1);
}

void emit_case2_main(Ctx& c) {
  const auto axes = main_axes(c, false);
  const int d = c.p->rank();
  const int ab = b_stride1_axis(*c.p);
  c.put("marker_main");
  c.depth = 0;
  c.put("parallel_main", {{"n", num(d)}});
  c.depth = 1;
  for (const auto& m : axes) {
    if (m.step == 1)
      c.put("loop_inc", {{"var", var_of(m.axis)}, {"begin", "0"}, {"limit", m.limit}});
    else
      c.put("loop_step",
            {{"var", var_of(m.axis)}, {"begin", "0"}, {"limit", m.limit}, {"step", num(m.step)}});
    ++c.depth;
  }
  std::vector<std::pair<int, std::string>> avars;
  for (int a = 0; a < d; ++a) avars.emplace_back(a, var_of(a));
  const std::string a_off = offset_a(avars), b_off = offset_b(c, avars);
  const std::string lda_arg = "lda" + num(ab);
  const std::string ldb_arg = "ldb" + num(c.p->perm.map[0] - 1);
  const int pfd = c.plan->prefetch_distance;
  if (pfd == 0) {
    c.put("call", {{"name", macro_name(c)},
                   {"args", "&A[" + at(c, a_off) + "], " + lda_arg + ", &B[" + at(c, b_off) +
                                "], " + ldb_arg + ", alpha, beta"}});
  } else {
    const MainAxis& inner = axes.back();
    c.put("block_open");
    ++c.depth;
    c.put("decl", {{"type", "const " + c.ta + "*"}, {"name", "a_blk"},
                   {"value", "&A[" + at(c, a_off) + "]"}});
    c.put("decl",
          {{"type", c.tb + "*"}, {"name", "b_blk"}, {"value", "&B[" + at(c, b_off) + "]"}});
    const std::string has_next =
        "(" + var_of(inner.axis) + " + " + num(inner.step) + " < " + inner.limit + ")";
    c.put("decl", {{"type", "const " + c.ta + "*"}, {"name", "a_nxt"},
                   {"value", has_next + " ? a_blk + " + advance_a(c, inner.axis, inner.step) +
                                 " : a_blk"}});
    c.put("decl", {{"type", c.tb + "*"}, {"name", "b_nxt"},
                   {"value", has_next + " ? b_blk + " + advance_b(c, inner.axis, inner.step) +
                                 " : b_blk"}});
    c.put("call", {{"name", macro_name(c)},
                   {"args", "a_blk, " + lda_arg + ", b_blk, " + ldb_arg +
                                ", a_nxt, b_nxt, alpha, beta"}});
    --c.depth;
    c.put("close");
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    --c.depth;
    c.put("close");
  }
}

void emit_case2_remainders(Ctx& c) {
  const int d = c.p->rank();
  const int ab = b_stride1_axis(*c.p);
  const std::int64_t size_a = c.p->sizes[0];
  const std::int64_t size_b = c.p->sizes[static_cast<std::size_t>(ab)];
  const std::int64_t full_a = size_a - size_a % c.plan->block_a;
  const std::int64_t full_b = size_b - size_b % c.plan->block_b;
  const bool edge_a = full_a < size_a;
  const bool edge_b = full_a > 0 && full_b < size_b;
  if (!edge_a && !edge_b) return;
  c.depth = 1;
  c.put("marker_remainder");

  std::vector<int> outer;  // plan order without the blocked axes
  for (int id : c.plan->loop_order) {
    const int axis = id - 1;
    if (axis != 0 && axis != ab) outer.push_back(axis);
  }
  auto region = [&](std::int64_t a_lo, const std::string& a_hi, std::int64_t b_lo,
                    const std::string& b_hi) {
    c.depth = 0;
    c.put("parallel_for", {{"n", num(d)}});
    c.depth = 1;
    for (int axis : outer) {
      c.put("loop_inc", {{"var", var_of(axis)}, {"begin", "0"}, {"limit", "size" + num(axis)}});
      ++c.depth;
    }
    c.put("loop_inc", {{"var", var_of(0)}, {"begin", num(a_lo)}, {"limit", a_hi}});
    ++c.depth;
    c.put("loop_inc", {{"var", var_of(ab)}, {"begin", num(b_lo)}, {"limit", b_hi}});
    ++c.depth;
    std::vector<std::pair<int, std::string>> avars;
    for (int a = 0; a < d; ++a) avars.emplace_back(a, var_of(a));
    emit_update(c, offset_a(avars), offset_b(c, avars));
    for (int i = 0; i < static_cast<int>(outer.size()) + 2; ++i) {
      --c.depth;
      c.put("close");
    }
  };
  if (edge_a) region(full_a, "size0", 0, "size" + num(ab));
  if (edge_b) region(0, num(full_a), full_b, "size" + num(ab));
}

void emit_case1_body(Ctx& c, const std::string& xa_var, const std::string& xb_var, int a2, int b2,
                     const std::vector<std::pair<int, std::string>>& other_vars) {
  std::vector<std::pair<int, std::string>> vars = other_vars;
  vars.emplace_back(a2, xa_var);
  if (b2 != a2) vars.emplace_back(b2, xb_var);
  c.put("decl", {{"type", "const " + c.ta + "*"},
                 {"name", "a_col"},
                 {"value", "&A[" + at(c, offset_a(vars)) + "]"}});
  c.put("decl",
        {{"type", c.tb + "*"}, {"name", "b_col"}, {"value", "&B[" + at(c, offset_b(c, vars)) + "]"}});
  if (c.plan->streaming_stores) c.put("stream_hint");
  const std::string bound = c.C == 1 ? "size0" : "size0 * 2";
  c.put("loop_inc", {{"var", "i1"}, {"begin", "0"}, {"limit", bound}});
  ++c.depth;
  const std::string be = "b_col[i1]";
  c.put("assign", {{"lhs", be}, {"rhs", update_rhs(c, "a_col[i1]", be)}});
  --c.depth;
  c.put("close");
}

void emit_case1(Ctx& c) {
  const int d = c.p->rank();
  const int a2 = 1;
  const int b2 = c.p->perm.inverse().map[1] - 1;
  const auto axes = main_axes(c, true);
  c.put("marker_main");
  c.depth = 0;
  c.put("parallel_main", {{"n", num(d - 1)}});
  c.depth = 1;
  for (const auto& m : axes) {
    if (m.step == 1)
      c.put("loop_inc", {{"var", var_of(m.axis)}, {"begin", "0"}, {"limit", m.limit}});
    else
      c.put("loop_step",
            {{"var", var_of(m.axis)}, {"begin", "0"}, {"limit", m.limit}, {"step", num(m.step)}});
    ++c.depth;
  }
  std::vector<std::pair<int, std::string>> others;
  for (int a = 1; a < d; ++a)
    if (a != a2 && a != b2) others.emplace_back(a, var_of(a));

  const std::int64_t size_a2 = c.p->sizes[static_cast<std::size_t>(a2)];
  const std::int64_t ba = c.plan->block_a;
  const std::string ja = "j" + num(a2 + 1);
  c.put("loop_inc", {{"var", ja},
                     {"begin", var_of(a2)},
                     {"limit", var_of(a2) + " + " + num(ba)}});
  ++c.depth;
  std::string jb = ja;
  int intra = 1;
  if (b2 != a2) {
    const std::int64_t bb = c.plan->block_b;
    jb = "j" + num(b2 + 1);
    c.put("loop_inc", {{"var", jb},
                       {"begin", var_of(b2)},
                       {"limit", var_of(b2) + " + " + num(bb)}});
    ++c.depth;
    intra = 2;
  }
  emit_case1_body(c, ja, jb, a2, b2, others);
  for (int i = 0; i < intra; ++i) {
    --c.depth;
    c.put("close");
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    --c.depth;
    c.put("close");
  }

  // edges of the blocked axes
  const std::int64_t full_a2 = size_a2 - size_a2 % ba;
  std::int64_t full_b2 = 0;
  bool edge_b2 = false;
  if (b2 != a2) {
    const std::int64_t size_b2 = c.p->sizes[static_cast<std::size_t>(b2)];
    full_b2 = size_b2 - size_b2 % c.plan->block_b;
    edge_b2 = full_a2 > 0 && full_b2 < size_b2;
  }
  const bool edge_a2 = full_a2 < size_a2;
  if (!edge_a2 && !edge_b2) return;
  c.depth = 1;
  c.put("marker_remainder");
  auto region = [&](std::int64_t a_lo, const std::string& a_hi, std::int64_t b_lo,
                    const std::string& b_hi) {
    c.depth = 0;
    c.put("parallel_for", {{"n", num(d - 1)}});
    c.depth = 1;
    std::vector<std::pair<int, std::string>> other_vars;
    int opened = 0;
    for (int a = 1; a < d; ++a) {
      if (a == a2 || a == b2) continue;
      c.put("loop_inc", {{"var", var_of(a)}, {"begin", "0"}, {"limit", "size" + num(a)}});
      ++c.depth;
      ++opened;
      other_vars.emplace_back(a, var_of(a));
    }
    c.put("loop_inc", {{"var", ja}, {"begin", num(a_lo)}, {"limit", a_hi}});
    ++c.depth;
    ++opened;
    if (b2 != a2) {
      c.put("loop_inc", {{"var", jb}, {"begin", num(b_lo)}, {"limit", b_hi}});
      ++c.depth;
      ++opened;
    }
    emit_case1_body(c, ja, jb, a2, b2, other_vars);
    for (int i = 0; i < opened; ++i) {
      --c.depth;
      c.put("close");
    }
  };
  if (edge_a2)
    region(full_a2, "size" + num(a2), 0,
           b2 != a2 ? "size" + num(b2) : std::string());
  if (edge_b2) region(0, num(full_a2), full_b2, "size" + num(b2));
}

void emit_1d(Ctx& c) {
  c.put("marker_main");
  c.depth = 0;
  if (c.plan->streaming_stores) c.put("stream_hint");
  c.put("parallel_for", {{"n", "1"}});
  c.depth = 1;
  const std::string bound = c.C == 1 ? "size0" : "size0 * 2";
  c.put("loop_inc", {{"var", "i1"}, {"begin", "0"}, {"limit", bound}});
  ++c.depth;
  const std::string be = "B[i1]";
  c.put("assign", {{"lhs", be}, {"rhs", update_rhs(c, "A[i1]", be)}});
  --c.depth;
  c.put("close");
}

std::string entry_symbol_for(const TransposeProblem& p) {
  std::ostringstream os;
  os << "transpose_";
  bool wide = false;
  for (int v : p.perm.map) wide = wide || v > 9;
  for (std::size_t i = 0; i < p.perm.map.size(); ++i) {
    if (wide && i) os << '_';
    os << p.perm.map[i];
  }
  os << '_';
  for (std::size_t i = 0; i < p.sizes.size(); ++i) {
    if (i) os << 'x';
    os << p.sizes[i];
  }
  os << '_' << kind_code(p.kind_a) << kind_code(p.kind_b);
  return os.str();
}

void check_emittable(const TransposeProblem& p, const CandidatePlan& plan) {
  validate(p);
  std::vector<int> order = plan.loop_order;
  std::sort(order.begin(), order.end());
  bool ok = static_cast<int>(order.size()) == p.rank();
  for (int i = 0; ok && i < p.rank(); ++i) ok = order[static_cast<std::size_t>(i)] == i + 1;
  if (!ok) throw std::invalid_argument("emit: loop order does not cover the problem's indices");
  if (plan.micro_width < 1 || plan.block_a < 1 || plan.block_b < 1)
    throw std::invalid_argument("emit: plan extents must be >= 1");
  if (plan.prefetch_distance < 0) throw std::invalid_argument("emit: negative prefetch distance");
  if (plan.prefetch_distance > 0 && p.perm.preserves_stride1())
    throw std::invalid_argument("emit: prefetch distance requires a transposed stride-1 index");
  if (plan.streaming_stores && p.beta != 0.0)
    throw std::invalid_argument("emit: streaming stores require beta == 0");
  const bool case2 = p.rank() > 1 && !p.perm.preserves_stride1();
  if (case2 && (plan.block_a % plan.micro_width != 0 || plan.block_b % plan.micro_width != 0))
    throw std::invalid_argument("emit: blocks must be multiples of the micro width");
}

}  // namespace

const EmitDialect& emit_dialect(const std::string& name) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw std::invalid_argument("emit: unknown dialect '" + name + "'");
  return it->second;
}

std::vector<std::string> emit_dialect_names() {
  std::vector<std::string> names;
  for (const auto& kv : registry()) names.push_back(kv.first);
  return names;
}

EmittedKernel emit_source(const NormalizedProblem& problem, const CandidatePlan& plan,
                          const EmitDialect& dialect, const std::string& basename) {
  const TransposeProblem& p = problem.problem;
  check_emittable(p, plan);

  Ctx c;
  c.p = &p;
  c.plan = &plan;
  c.dial = &dialect;
  c.C = element_components(p.kind_a);
  const bool da = p.kind_a == ElementKind::real64 || p.kind_a == ElementKind::complex128;
  const bool db = p.kind_b == ElementKind::real64 || p.kind_b == ElementKind::complex128;
  c.ta = da ? "double" : "float";
  c.tb = db ? "double" : "float";
  c.tw = (da || db) ? "double" : "float";

  EmittedKernel k;
  k.entry_symbol = entry_symbol_for(p);
  const std::string base = basename.empty() ? k.entry_symbol : basename;
  k.include_name = base + "." + dialect.header_extension;
  k.source_extension = dialect.source_extension;
  k.header_extension = dialect.header_extension;

  std::string guard = "TTUNE_" + base + "_" + dialect.header_extension;
  for (char& ch : guard) {
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  c.base = {{"entry", k.entry_symbol}, {"problem", canonical_key(p)},
            {"plan", plan.serialize()}, {"version", kVersion},
            {"include", k.include_name}, {"guard", guard},
            {"ta", c.ta},               {"tb", c.tb},
            {"tw", c.tw}};

  // header
  c.put("header");
  k.header_text = c.out.str();
  c.out.str("");

  // source
  const bool case2 = p.rank() > 1 && !p.perm.preserves_stride1();
  c.depth = 0;
  c.put("banner");
  c.put("include");
  c.put("blank");
  if (case2) {
    emit_micro_fn(c);
    c.put("blank");
    emit_macro_fn(c);
    c.put("blank");
  }
  c.put("entry_open");
  c.depth = 1;
  for (int m = 0; m < p.rank(); ++m)
    c.put("decl_long", {{"name", "size" + num(m)}, {"value", num(p.sizes[static_cast<std::size_t>(m)])}});
  const auto sa = element_strides_a(p);
  const auto sb = element_strides_b(p);
  for (int m = 1; m < p.rank(); ++m)
    c.put("decl_long", {{"name", "lda" + num(m)}, {"value", num(sa[static_cast<std::size_t>(m)])}});
  for (int m = 1; m < p.rank(); ++m)
    c.put("decl_long", {{"name", "ldb" + num(m)}, {"value", num(sb[static_cast<std::size_t>(m)])}});
  if (p.rank() == 1) {
    emit_1d(c);
  } else if (p.perm.preserves_stride1()) {
    emit_case1(c);
  } else {
    emit_case2_main(c);
    emit_case2_remainders(c);
  }
  c.depth = 0;
  c.put("fn_close");
  k.source_text = c.out.str();
  return k;
}

EmittedKernel emit_source(const NormalizedProblem& problem, const CandidatePlan& plan,
                          const std::string& basename) {
  return emit_source(problem, plan, emit_dialect("c-omp"), basename);
}

EmittedFiles write_kernel_files(const EmittedKernel& kernel, const std::filesystem::path& base) {
  EmittedFiles out;
  out.source = base;
  out.source += "." + kernel.source_extension;
  out.header = base.parent_path() / kernel.include_name;
  if (!base.parent_path().empty()) std::filesystem::create_directories(base.parent_path());
  for (const auto& [path, text] :
       {std::pair{out.source, &kernel.source_text}, std::pair{out.header, &kernel.header_text}}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit: cannot write " + path.string());
    f << *text;
  }
  return out;
}

}  // namespace ttune
