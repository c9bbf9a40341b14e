#pragma once

// Deterministic random formula corpora. All draws go through raw
// mt19937_64 outputs (modulo), so a seed produces the same corpus on every
// platform and standard library.

#include <random>
#include <sstream>
#include <string>

#include "ropetc/formula.hpp"

namespace ropetc {

enum class FormulaKind {
  bool_infix,
  bool_postfix,
  arith_int,
  arith_bool,
  arith_minplus,
};

inline const char* to_string(FormulaKind k)
{
  switch (k) {
    case FormulaKind::bool_infix: return "bool-infix";
    case FormulaKind::bool_postfix: return "bool-postfix";
    case FormulaKind::arith_int: return "arith-int";
    case FormulaKind::arith_bool: return "arith-bool";
    case FormulaKind::arith_minplus: return "arith-minplus";
  }
  return "?";
}

inline FormulaKind parse_formula_kind(const std::string& s)
{
  if (s == "bool-infix") return FormulaKind::bool_infix;
  if (s == "bool-postfix") return FormulaKind::bool_postfix;
  if (s == "arith-int") return FormulaKind::arith_int;
  if (s == "arith-bool") return FormulaKind::arith_bool;
  if (s == "arith-minplus") return FormulaKind::arith_minplus;
  throw domain_error(errc::unknown_kind, "unknown formula kind: " + s);
}

inline constexpr int formula_gen_vars = 4; // X1..X4 in generated corpora

namespace detail {

inline int gen_bool_node(std::mt19937_64& rng, BoolFormula& f, int depth)
{
  const std::uint64_t pick = depth <= 0 ? rng() % 2 : rng() % 10;
  if (depth <= 0 || pick < 2) {
    return f.add(pick % 2 == 0 ? BoolFormula::Kind::const0
                               : BoolFormula::Kind::const1);
  }
  if (pick < 4) return f.add(BoolFormula::Kind::not_op, gen_bool_node(rng, f, depth - 1));
  int a = gen_bool_node(rng, f, depth - 1);
  int b = gen_bool_node(rng, f, depth - 1);
  return f.add(pick < 7 ? BoolFormula::Kind::and_op : BoolFormula::Kind::or_op,
               a, b);
}

inline int gen_arith_node(std::mt19937_64& rng, ArithFormula& f, int depth)
{
  const CarrierOps ops = carrier_ops(f.carrier);
  auto leaf = [&] {
    ArithFormula::Node n;
    if (rng() % 2 == 0) {
      n.kind = ArithFormula::Kind::var;
      n.var = static_cast<int>(rng() % formula_gen_vars) + 1;
    } else {
      n.kind = ArithFormula::Kind::constant;
      if (f.carrier == Semiring::boolean)
        n.value = Int(rng() % 2);
      else
        n.value = Int(static_cast<long long>(rng() % 19) - 9);
    }
    return f.add(std::move(n));
  };
  const std::uint64_t pick = depth <= 0 ? 0 : rng() % 10;
  if (depth <= 0 || pick < 3) return leaf();
  if (!ops.unary.empty() && pick < 5) {
    ArithFormula::Node n;
    n.kind = ArithFormula::Kind::unary;
    n.op = ops.unary[rng() % ops.unary.size()];
    n.a = gen_arith_node(rng, f, depth - 1);
    return f.add(std::move(n));
  }
  ArithFormula::Node n;
  n.kind = ArithFormula::Kind::binary;
  n.op = ops.binary[rng() % ops.binary.size()];
  n.a = gen_arith_node(rng, f, depth - 1);
  n.b = gen_arith_node(rng, f, depth - 1);
  return f.add(std::move(n));
}

} // namespace detail

inline BoolFormula generate_bool(int depth_limit, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  BoolFormula f;
  f.root = detail::gen_bool_node(rng, f, depth_limit);
  return f;
}

inline ArithFormula generate_arith(Semiring carrier, int depth_limit,
                                   std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  ArithFormula f;
  f.carrier = carrier;
  f.root = detail::gen_arith_node(rng, f, depth_limit);
  return f;
}

// One corpus line. Boolean kinds emit the formula text; arithmetic kinds
// append "; c1 c2 c3 c4", the assignment the evaluation problem pairs with
// the formula.
inline std::string generate_random(FormulaKind kind, int depth_limit,
                                   std::uint64_t seed)
{
  if (depth_limit < 0)
    throw domain_error(errc::invalid_value, "depth limit must be >= 0");
  switch (kind) {
    case FormulaKind::bool_infix:
      return print_bool_infix(generate_bool(depth_limit, seed));
    case FormulaKind::bool_postfix:
      return print_bool_postfix(generate_bool(depth_limit, seed));
    case FormulaKind::arith_int:
    case FormulaKind::arith_bool:
    case FormulaKind::arith_minplus: {
      Semiring carrier = kind == FormulaKind::arith_int ? Semiring::integer
                         : kind == FormulaKind::arith_bool
                             ? Semiring::boolean
                             : Semiring::min_plus;
      ArithFormula f = generate_arith(carrier, depth_limit, seed);
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
      std::string line = print_arith(f) + " ;";
      for (int i = 0; i < formula_gen_vars; ++i) {
        long long v = carrier == Semiring::boolean
                          ? static_cast<long long>(rng() % 2)
                          : static_cast<long long>(rng() % 19) - 9;
        line += " " + std::to_string(v);
      }
      return line;
    }
  }
  throw domain_error(errc::unknown_kind, "unknown formula kind");
}

inline Semiring carrier_of(FormulaKind kind)
{
  switch (kind) {
    case FormulaKind::arith_int: return Semiring::integer;
    case FormulaKind::arith_bool: return Semiring::boolean;
    case FormulaKind::arith_minplus: return Semiring::min_plus;
    default:
      throw domain_error(errc::unknown_kind, "not an arithmetic kind");
  }
}

// Evaluates one corpus line of the given kind; returns the printed result.
inline std::string eval_formula_line(FormulaKind kind, const std::string& line)
{
  switch (kind) {
    case FormulaKind::bool_infix:
      return std::to_string(eval_bool(parse_bool_infix(line)));
    case FormulaKind::bool_postfix:
      return std::to_string(eval_bool(parse_bool_postfix(line)));
    default: break;
  }
  std::size_t semi = line.find(';');
  std::string formula = line.substr(0, semi == std::string::npos ? line.size() : semi);
  std::vector<Int> assignment;
  if (semi != std::string::npos) {
    std::istringstream vals(line.substr(semi + 1));
    std::string tok;
    while (vals >> tok) {
      try {
        assignment.emplace_back(tok);
      } catch (const std::exception&) {
        throw domain_error(errc::format_error, "bad assignment value: " + tok);
      }
    }
  }
  return eval_arith(parse_arith(formula, carrier_of(kind)), assignment).str();
}

} // namespace ropetc
