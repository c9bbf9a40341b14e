#pragma once

// Symbolic circuit-depth and size accounting. Depth expressions are
// non-negative integer combinations over the six opaque depth constants
// {d_std, d_oplus, d_otimes, d_exp, d_sqrt, d_g}; traces record the staging
// of an evaluation (one parallel group per stage) and trace_depth folds a
// trace into the expression the staging lemmas predict.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ropetc/errors.hpp"

namespace ropetc {

enum class DepthSym : int {
  d_std = 0,
  d_oplus = 1,
  d_otimes = 2,
  d_exp = 3,
  d_sqrt = 4,
  d_g = 5,
};

inline constexpr int depth_sym_count = 6;

inline const char* unicode_name(DepthSym s)
{
  switch (s) {
    case DepthSym::d_std: return "d_std";
    case DepthSym::d_oplus: return "d_\xE2\x8A\x95";   // d_⊕
    case DepthSym::d_otimes: return "d_\xE2\x8A\x97";  // d_⊗
    case DepthSym::d_exp: return "d_exp";
    case DepthSym::d_sqrt: return "d_sqrt";
    case DepthSym::d_g: return "d_g";
  }
  return "?";
}

inline const char* ascii_name(DepthSym s)
{
  switch (s) {
    case DepthSym::d_std: return "d_std";
    case DepthSym::d_oplus: return "d_oplus";
    case DepthSym::d_otimes: return "d_otimes";
    case DepthSym::d_exp: return "d_exp";
    case DepthSym::d_sqrt: return "d_sqrt";
    case DepthSym::d_g: return "d_g";
  }
  return "?";
}

class DepthExpr {
public:
  DepthExpr() = default;

  static DepthExpr sym(DepthSym s, std::int64_t c = 1)
  {
    DepthExpr e;
    e.set(s, c);
    return e;
  }

  static DepthExpr constant(std::int64_t c)
  {
    DepthExpr e;
    e.constant_ = c;
    return e;
  }

  std::int64_t coeff(DepthSym s) const { return coeff_[static_cast<int>(s)]; }
  std::int64_t constant_term() const { return constant_; }

  void set(DepthSym s, std::int64_t c)
  {
    if (c < 0)
      throw domain_error(errc::invalid_value, "negative depth coefficient");
    coeff_[static_cast<int>(s)] = c;
  }

  bool is_zero() const
  {
    if (constant_ != 0) return false;
    for (auto c : coeff_)
      if (c != 0) return false;
    return true;
  }

  DepthExpr& operator+=(const DepthExpr& o)
  {
    for (int i = 0; i < depth_sym_count; ++i) coeff_[i] += o.coeff_[i];
    constant_ += o.constant_;
    return *this;
  }

  friend DepthExpr operator+(DepthExpr a, const DepthExpr& b) { return a += b; }

  friend DepthExpr operator*(std::int64_t k, DepthExpr e)
  {
    if (k < 0)
      throw domain_error(errc::invalid_value, "negative depth multiplier");
    for (auto& c : e.coeff_) c *= k;
    e.constant_ *= k;
    return e;
  }

  // symbol-wise: every coefficient of o is covered by this expression
  bool dominates(const DepthExpr& o) const
  {
    for (int i = 0; i < depth_sym_count; ++i)
      if (coeff_[i] < o.coeff_[i]) return false;
    return constant_ >= o.constant_;
  }

  friend bool operator==(const DepthExpr& a, const DepthExpr& b)
  {
    return a.coeff_ == b.coeff_ && a.constant_ == b.constant_;
  }
  friend bool operator!=(const DepthExpr& a, const DepthExpr& b)
  {
    return !(a == b);
  }

  // numeric substitution, for reporting only
  std::int64_t evaluate(const std::map<DepthSym, std::int64_t>& values) const
  {
    std::int64_t total = constant_;
    for (int i = 0; i < depth_sym_count; ++i) {
      if (coeff_[i] == 0) continue;
      auto it = values.find(static_cast<DepthSym>(i));
      if (it == values.end())
        throw domain_error(errc::missing_assignment,
                           std::string("no numeric value for ") +
                               ascii_name(static_cast<DepthSym>(i)));
      total += coeff_[i] * it->second;
    }
    return total;
  }

  std::string str() const
  {
    std::string out;
    auto append = [&](std::int64_t c, const std::string& name) {
      if (c == 0) return;
      if (!out.empty()) out += " + ";
      if (c != 1) out += std::to_string(c);
      out += name;
    };
    for (int i = 0; i < depth_sym_count; ++i)
      append(coeff_[i], unicode_name(static_cast<DepthSym>(i)));
    if (constant_ != 0) {
      if (!out.empty()) out += " + ";
      out += std::to_string(constant_);
    }
    return out.empty() ? "0" : out;
  }

private:
  std::array<std::int64_t, depth_sym_count> coeff_{};
  std::int64_t constant_ = 0;
};

enum class PrimKind {
  add,
  mul,
  div,
  cmp,
  floor_op,
  iter_add,
  iter_mul,
  exp_op,
  sqrt_op,
  sin_op,
  cos_op,
};

inline const char* to_string(PrimKind k)
{
  switch (k) {
    case PrimKind::add: return "add";
    case PrimKind::mul: return "mul";
    case PrimKind::div: return "div";
    case PrimKind::cmp: return "cmp";
    case PrimKind::floor_op: return "floor";
    case PrimKind::iter_add: return "iter_add";
    case PrimKind::iter_mul: return "iter_mul";
    case PrimKind::exp_op: return "exp";
    case PrimKind::sqrt_op: return "sqrt";
    case PrimKind::sin_op: return "sin";
    case PrimKind::cos_op: return "cos";
  }
  return "?";
}

// d_tri = 8 d_std + d_oplus + d_otimes, the sin/cos circuit depth
inline DepthExpr depth_triangle()
{
  DepthExpr e = DepthExpr::sym(DepthSym::d_std, 8);
  e += DepthExpr::sym(DepthSym::d_oplus);
  e += DepthExpr::sym(DepthSym::d_otimes);
  return e;
}

inline DepthExpr primitive_cost(PrimKind k)
{
  switch (k) {
    case PrimKind::add:
    case PrimKind::mul:
    case PrimKind::div:
    case PrimKind::cmp:
    case PrimKind::floor_op:
      return DepthExpr::sym(DepthSym::d_std);
    case PrimKind::iter_add:
      return DepthExpr::sym(DepthSym::d_oplus);
    case PrimKind::iter_mul:
      return DepthExpr::sym(DepthSym::d_otimes);
    case PrimKind::exp_op:
      return DepthExpr::sym(DepthSym::d_exp);
    case PrimKind::sqrt_op:
      return DepthExpr::sym(DepthSym::d_sqrt);
    case PrimKind::sin_op:
    case PrimKind::cos_op:
      return depth_triangle();
  }
  throw domain_error(errc::unknown_kind, "unknown primitive kind");
}

struct TraceStage {
  std::string label;
  DepthExpr cost;     // one parallel group = one stage cost
  std::size_t ops = 0;
};

class CostTrace {
public:
  void push(TraceStage s) { stages_.push_back(std::move(s)); }
  const std::vector<TraceStage>& stages() const { return stages_; }

  std::size_t size() const
  {
    std::size_t n = 0;
    for (const auto& s : stages_) n += s.ops;
    return n;
  }

private:
  std::vector<TraceStage> stages_;
};

inline DepthExpr trace_depth(const CostTrace& t)
{
  DepthExpr total;
  for (const auto& s : t.stages()) total += s.cost;
  return total;
}

// Records the staging of an evaluation. One stage = one parallel group of
// uniform primitive kind (or an abstract stage of fixed cost, whose inner
// events only contribute to the op count, mirroring "g_i has depth d_g").
class Tracer {
public:
  void stage(PrimKind k, std::size_t count, std::string label)
  {
    if (count == 0) return;
    if (absorbing()) {
      abstract_ops_ += count;
      return;
    }
    trace_.push({std::move(label), primitive_cost(k), count});
  }

  // Parallel group mixing primitive kinds: legal only when one cost
  // dominates the others symbol-wise.
  void stage_mixed(std::initializer_list<std::pair<PrimKind, std::size_t>> parts,
                   std::string label)
  {
    std::size_t count = 0;
    std::optional<DepthExpr> top;
    for (const auto& [k, c] : parts) {
      if (c == 0) continue;
      count += c;
      DepthExpr cost = primitive_cost(k);
      if (!top) {
        top = cost;
      } else if (top->dominates(cost)) {
        // keep top
      } else if (cost.dominates(*top)) {
        top = cost;
      } else {
        throw domain_error(errc::incomparable_parallel_costs,
                           "parallel group mixes incomparable costs: " +
                               top->str() + " vs " + cost.str());
      }
    }
    if (count == 0) return;
    if (absorbing()) {
      abstract_ops_ += count;
      return;
    }
    trace_.push({std::move(label), *top, count});
  }

  class AbstractScope {
  public:
    AbstractScope(Tracer* t, DepthExpr cost, std::string label)
        : t_(t), cost_(std::move(cost)), label_(std::move(label))
    {
      if (t_) t_->begin_abstract();
    }
    ~AbstractScope()
    {
      if (t_) t_->end_abstract(std::move(cost_), std::move(label_));
    }
    AbstractScope(const AbstractScope&) = delete;
    AbstractScope& operator=(const AbstractScope&) = delete;

  private:
    Tracer* t_;
    DepthExpr cost_;
    std::string label_;
  };

  AbstractScope abstract_stage(DepthExpr cost, std::string label)
  {
    return AbstractScope(this, std::move(cost), std::move(label));
  }

  const CostTrace& trace() const { return trace_; }
  CostTrace take() { return std::move(trace_); }

private:
  friend class AbstractScope;
  bool absorbing() const { return abstract_nesting_ > 0; }

  void begin_abstract()
  {
    if (abstract_nesting_ == 0) abstract_ops_ = 0;
    ++abstract_nesting_;
  }

  void end_abstract(DepthExpr cost, std::string label)
  {
    --abstract_nesting_;
    if (abstract_nesting_ == 0)
      trace_.push({std::move(label), std::move(cost), abstract_ops_});
  }

  CostTrace trace_;
  int abstract_nesting_ = 0;
  std::size_t abstract_ops_ = 0;
};

// RAII helper usable with a possibly-null tracer.
inline Tracer::AbstractScope abstract_stage(Tracer* t, DepthExpr cost,
                                            std::string label)
{
  return Tracer::AbstractScope(t, std::move(cost), std::move(label));
}

inline void trace_stage(Tracer* t, PrimKind k, std::size_t count,
                        const char* label)
{
  if (t) t->stage(k, count, label);
}

enum class LayerKind { mlp, layernorm, attention, transformer };

inline DepthExpr layer_formula(LayerKind kind, int m = 0)
{
  using S = DepthSym;
  switch (kind) {
    case LayerKind::mlp:
      return DepthExpr::sym(S::d_std, 2) + DepthExpr::sym(S::d_oplus);
    case LayerKind::layernorm:
      return DepthExpr::sym(S::d_std, 5) + DepthExpr::sym(S::d_oplus, 2) +
             DepthExpr::sym(S::d_sqrt);
    case LayerKind::attention:
      return 7 * (DepthExpr::sym(S::d_std) + DepthExpr::sym(S::d_oplus)) +
             depth_triangle() + DepthExpr::sym(S::d_exp);
    case LayerKind::transformer:
      return (m + 1) * DepthExpr::sym(S::d_g) +
             (7 * m) * (DepthExpr::sym(S::d_std) + DepthExpr::sym(S::d_oplus)) +
             m * (depth_triangle() + DepthExpr::sym(S::d_exp));
  }
  throw domain_error(errc::unknown_kind, "unknown layer kind");
}

inline std::string layer_formula_text(LayerKind kind, int m = 0)
{
  const std::string oplus = unicode_name(DepthSym::d_oplus);
  const std::string tri = "d_\xE2\x96\xB3"; // d_△
  switch (kind) {
    case LayerKind::mlp: return "2d_std + " + oplus;
    case LayerKind::layernorm: return "5d_std + 2" + oplus + " + d_sqrt";
    case LayerKind::attention:
      return "7(d_std + " + oplus + ") + " + tri + " + d_exp";
    case LayerKind::transformer:
      return "(m+1)d_g + 7m(d_std + " + oplus + ") + m(" + tri +
             " + d_exp), m = " + std::to_string(m);
  }
  return "?";
}

// The constant-depth witness: every coefficient is bounded by a function of
// the layer count alone (16(m+1) here), independent of n, d, p.
inline bool assert_constant_depth(const DepthExpr& e, int m)
{
  const std::int64_t bound = 16 * (static_cast<std::int64_t>(m) + 1);
  for (int i = 0; i < depth_sym_count; ++i)
    if (e.coeff(static_cast<DepthSym>(i)) > bound) return false;
  return e.constant_term() <= bound;
}

} // namespace ropetc
