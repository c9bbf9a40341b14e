#pragma once

// Parsers, evaluators and printers for the two benchmark problems: the
// Boolean formula value problem (fully parenthesized infix over
// {0,1,and,or,not,(,)} and the postfix form with the |alpha| >= |beta| side
// condition) and arithmetic formula evaluation over a declared semiring
// carrier. ASCII aliases: & | ~ * - and the keyword "min"; Unicode
// operators from the source alphabets are accepted interchangeably.

#include <cstdint>
#include <string>
#include <vector>

#include "ropetc/errors.hpp"
#include "ropetc/float.hpp" // Int

namespace ropetc {

// ---------------------------------------------------------------- lexing

namespace detail {

enum class FTok {
  zero,
  one,
  lparen,
  rparen,
  op_not,
  op_and,
  op_or,
  op_plus,
  op_times,
  op_minus,
  op_min,
  var,
  number,
  end,
};

struct FLex {
  FTok kind = FTok::end;
  std::size_t offset = 0;
  std::string text; // var name or number literal
};

class FormulaLexer {
public:
  // greedy_numbers: multi-digit (and negative) literals, for the arithmetic
  // grammar; the Boolean grammars read 0/1 as single symbols.
  explicit FormulaLexer(const std::string& s, bool greedy_numbers = false)
      : s_(s), greedy_(greedy_numbers)
  {
  }

  FLex next()
  {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    FLex t;
    t.offset = pos_;
    if (pos_ >= s_.size()) return t;
    const char c = s_[pos_];
    auto take = [&](FTok k, std::size_t len) {
      t.kind = k;
      pos_ += len;
      return t;
    };
    auto lex_number = [&](std::size_t start, bool negative) {
      std::size_t end = start;
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end])))
        ++end;
      std::string digits = s_.substr(start, end - start);
      pos_ = end;
      if (!negative && digits == "0") {
        t.kind = FTok::zero;
        return t;
      }
      if (!negative && digits == "1") {
        t.kind = FTok::one;
        return t;
      }
      t.kind = FTok::number;
      t.text = negative ? "-" + digits : digits;
      return t;
    };
    switch (c) {
      case '0':
        if (!greedy_) return take(FTok::zero, 1);
        return lex_number(pos_, false);
      case '1':
        if (!greedy_) return take(FTok::one, 1);
        return lex_number(pos_, false);
      case '(': return take(FTok::lparen, 1);
      case ')': return take(FTok::rparen, 1);
      case '~': return take(FTok::op_not, 1);
      case '&': return take(FTok::op_and, 1);
      case '|': return take(FTok::op_or, 1);
      case '+': return take(FTok::op_plus, 1);
      case '*': return take(FTok::op_times, 1);
      case '-':
        if (greedy_ && pos_ + 1 < s_.size() &&
            std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))
          return lex_number(pos_ + 1, true);
        return take(FTok::op_minus, 1);
      default: break;
    }
    if (s_.compare(pos_, 2, "\xC2\xAC") == 0) return take(FTok::op_not, 2);
    if (s_.compare(pos_, 3, "\xE2\x88\xA7") == 0) return take(FTok::op_and, 3);
    if (s_.compare(pos_, 3, "\xE2\x88\xA8") == 0) return take(FTok::op_or, 3);
    if (s_.compare(pos_, 2, "\xC3\x97") == 0) return take(FTok::op_times, 2);
    if (s_.compare(pos_, 3, "\xE2\x88\x92") == 0) {
      if (greedy_ && pos_ + 3 < s_.size() &&
          std::isdigit(static_cast<unsigned char>(s_[pos_ + 3])))
        return lex_number(pos_ + 3, true);
      return take(FTok::op_minus, 3);
    }
    if (s_.compare(pos_, 3, "min") == 0) return take(FTok::op_min, 3);
    if (c == 'X') {
      std::size_t end = pos_ + 1;
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end])))
        ++end;
      if (end == pos_ + 1)
        throw ropetc::parse_error(pos_, "variable index after 'X'",
                                  std::string(1, c));
      t.kind = FTok::var;
      t.text = s_.substr(pos_, end - pos_);
      pos_ = end;
      return t;
    }
    if (greedy_ && std::isdigit(static_cast<unsigned char>(c)))
      return lex_number(pos_, false);
    throw ropetc::parse_error(pos_, "a formula token", std::string(1, c));
  }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

private:
  const std::string& s_;
  bool greedy_;
  std::size_t pos_ = 0;
};

inline std::string tok_name(FTok k)
{
  switch (k) {
    case FTok::zero: return "'0'";
    case FTok::one: return "'1'";
    case FTok::lparen: return "'('";
    case FTok::rparen: return "')'";
    case FTok::op_not: return "'~'";
    case FTok::op_and: return "'&'";
    case FTok::op_or: return "'|'";
    case FTok::op_plus: return "'+'";
    case FTok::op_times: return "'*'";
    case FTok::op_minus: return "'-'";
    case FTok::op_min: return "'min'";
    case FTok::var: return "variable";
    case FTok::number: return "number";
    case FTok::end: return "end of input";
  }
  return "?";
}

} // namespace detail

// ------------------------------------------------- Boolean formula value

struct BoolFormula {
  enum class Kind : std::uint8_t { const0, const1, not_op, and_op, or_op };
  struct Node {
    Kind kind;
    int a = -1, b = -1;
  };
  std::vector<Node> nodes;
  int root = -1;

  int add(Kind k, int a = -1, int b = -1)
  {
    nodes.push_back({k, a, b});
    return static_cast<int>(nodes.size()) - 1;
  }

  // printed symbol count: leaves 1, (~a) adds 3, (a&b) adds 3
  std::size_t symbols(int node) const
  {
    const Node& n = nodes[static_cast<std::size_t>(node)];
    switch (n.kind) {
      case Kind::const0:
      case Kind::const1: return 1;
      case Kind::not_op: return symbols(n.a) + 3;
      default: return symbols(n.a) + symbols(n.b) + 3;
    }
  }

  // postfix token count: the tree size
  std::size_t postfix_len(int node) const
  {
    const Node& n = nodes[static_cast<std::size_t>(node)];
    switch (n.kind) {
      case Kind::const0:
      case Kind::const1: return 1;
      case Kind::not_op: return postfix_len(n.a) + 1;
      default: return postfix_len(n.a) + postfix_len(n.b) + 1;
    }
  }
};

inline bool equal(const BoolFormula& f, int fa, const BoolFormula& g, int ga)
{
  const auto& x = f.nodes[static_cast<std::size_t>(fa)];
  const auto& y = g.nodes[static_cast<std::size_t>(ga)];
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case BoolFormula::Kind::const0:
    case BoolFormula::Kind::const1: return true;
    case BoolFormula::Kind::not_op: return equal(f, x.a, g, y.a);
    default: return equal(f, x.a, g, y.a) && equal(f, x.b, g, y.b);
  }
}

inline bool equal(const BoolFormula& f, const BoolFormula& g)
{
  if (f.root < 0 || g.root < 0) return f.root == g.root;
  return equal(f, f.root, g, g.root);
}

namespace detail {

inline int parse_bool_node(FormulaLexer& lex, BoolFormula& out)
{
  FLex t = lex.next();
  switch (t.kind) {
    case FTok::zero: return out.add(BoolFormula::Kind::const0);
    case FTok::one: return out.add(BoolFormula::Kind::const1);
    case FTok::lparen: break;
    default:
      throw ropetc::parse_error(t.offset, "'0', '1' or '('", tok_name(t.kind));
  }
  std::size_t mark = lex.pos();
  FLex head = lex.next();
  if (head.kind == FTok::op_not) {
    int child = parse_bool_node(lex, out);
    FLex close = lex.next();
    if (close.kind != FTok::rparen)
      throw ropetc::parse_error(close.offset, "')'", tok_name(close.kind));
    return out.add(BoolFormula::Kind::not_op, child);
  }
  lex.seek(mark);
  int left = parse_bool_node(lex, out);
  FLex op = lex.next();
  if (op.kind != FTok::op_and && op.kind != FTok::op_or)
    throw ropetc::parse_error(op.offset, "'&' or '|'", tok_name(op.kind));
  int right = parse_bool_node(lex, out);
  FLex close = lex.next();
  if (close.kind != FTok::rparen)
    throw ropetc::parse_error(close.offset, "')'", tok_name(close.kind));
  return out.add(op.kind == FTok::op_and ? BoolFormula::Kind::and_op
                                         : BoolFormula::Kind::or_op,
                 left, right);
}

} // namespace detail

// Fully parenthesized infix grammar: 0 | 1 | (~a) | (a&b) | (a|b).
inline BoolFormula parse_bool_infix(const std::string& s)
{
  detail::FormulaLexer lex(s);
  BoolFormula f;
  f.root = detail::parse_bool_node(lex, f);
  detail::FLex t = lex.next();
  if (t.kind != detail::FTok::end)
    throw parse_error(t.offset, "end of input", detail::tok_name(t.kind));
  return f;
}

// Postfix grammar with the length side condition: alpha beta op requires
// |alpha| >= |beta| (symbol counts of the operand strings).
inline BoolFormula parse_bool_postfix(const std::string& s)
{
  detail::FormulaLexer lex(s);
  BoolFormula f;
  struct Entry {
    int node;
    std::size_t len;
  };
  std::vector<Entry> stack;
  for (;;) {
    detail::FLex t = lex.next();
    if (t.kind == detail::FTok::end) break;
    switch (t.kind) {
      case detail::FTok::zero:
        stack.push_back({f.add(BoolFormula::Kind::const0), 1});
        break;
      case detail::FTok::one:
        stack.push_back({f.add(BoolFormula::Kind::const1), 1});
        break;
      case detail::FTok::op_not: {
        if (stack.empty())
          throw parse_error(t.offset, "an operand before '~'", "empty stack");
        Entry a = stack.back();
        stack.pop_back();
        stack.push_back({f.add(BoolFormula::Kind::not_op, a.node), a.len + 1});
        break;
      }
      case detail::FTok::op_and:
      case detail::FTok::op_or: {
        if (stack.size() < 2)
          throw parse_error(t.offset, "two operands before a binary operator",
                            "short stack");
        Entry beta = stack.back();
        stack.pop_back();
        Entry alpha = stack.back();
        stack.pop_back();
        if (alpha.len < beta.len)
          throw parse_error(t.offset,
                            "|alpha| >= |beta| (" + std::to_string(alpha.len) +
                                " < " + std::to_string(beta.len) + ")",
                            "length condition violated",
                            errc::length_condition_violated);
        stack.push_back({f.add(t.kind == detail::FTok::op_and
                                   ? BoolFormula::Kind::and_op
                                   : BoolFormula::Kind::or_op,
                               alpha.node, beta.node),
                         alpha.len + beta.len + 1});
        break;
      }
      default:
        throw parse_error(t.offset, "'0', '1', '~', '&' or '|'",
                          detail::tok_name(t.kind));
    }
  }
  if (stack.size() != 1)
    throw parse_error(s.size(), "a single complete formula",
                      std::to_string(stack.size()) + " stack entries");
  f.root = stack.back().node;
  return f;
}

inline int eval_bool(const BoolFormula& f, int node)
{
  const auto& n = f.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case BoolFormula::Kind::const0: return 0;
    case BoolFormula::Kind::const1: return 1;
    case BoolFormula::Kind::not_op: return 1 - eval_bool(f, n.a);
    case BoolFormula::Kind::and_op: return eval_bool(f, n.a) & eval_bool(f, n.b);
    case BoolFormula::Kind::or_op: return eval_bool(f, n.a) | eval_bool(f, n.b);
  }
  throw domain_error(errc::unknown_kind, "bad node");
}

inline int eval_bool(const BoolFormula& f) { return eval_bool(f, f.root); }

inline std::string print_bool_infix(const BoolFormula& f, int node)
{
  const auto& n = f.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case BoolFormula::Kind::const0: return "0";
    case BoolFormula::Kind::const1: return "1";
    case BoolFormula::Kind::not_op: return "(~" + print_bool_infix(f, n.a) + ")";
    case BoolFormula::Kind::and_op:
      return "(" + print_bool_infix(f, n.a) + "&" + print_bool_infix(f, n.b) + ")";
    case BoolFormula::Kind::or_op:
      return "(" + print_bool_infix(f, n.a) + "|" + print_bool_infix(f, n.b) + ")";
  }
  throw domain_error(errc::unknown_kind, "bad node");
}

inline std::string print_bool_infix(const BoolFormula& f)
{
  return print_bool_infix(f, f.root);
}

// Postfix text satisfying the length condition; and/or children are swapped
// (commutativity) so the longer operand always comes first.
inline std::string print_bool_postfix(const BoolFormula& f, int node)
{
  const auto& n = f.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case BoolFormula::Kind::const0: return "0";
    case BoolFormula::Kind::const1: return "1";
    case BoolFormula::Kind::not_op: return print_bool_postfix(f, n.a) + "~";
    case BoolFormula::Kind::and_op:
    case BoolFormula::Kind::or_op: {
      int first = n.a, second = n.b;
      if (f.postfix_len(n.a) < f.postfix_len(n.b)) std::swap(first, second);
      // one side always dominates once swapped
      return print_bool_postfix(f, first) + print_bool_postfix(f, second) +
             (n.kind == BoolFormula::Kind::and_op ? "&" : "|");
    }
  }
  throw domain_error(errc::unknown_kind, "bad node");
}

inline std::string print_bool_postfix(const BoolFormula& f)
{
  return print_bool_postfix(f, f.root);
}

// ------------------------------------------- arithmetic formula evaluation

enum class Semiring { integer, boolean, min_plus };

inline const char* to_string(Semiring s)
{
  switch (s) {
    case Semiring::integer: return "integer";
    case Semiring::boolean: return "boolean";
    case Semiring::min_plus: return "min-plus";
  }
  return "?";
}

struct ArithFormula {
  enum class Kind : std::uint8_t { var, constant, unary, binary };
  struct Node {
    Kind kind;
    int var = 0;   // 1-based
    Int value;     // constants
    char op = 0;   // '-', '~', '+', '*', '&', '|', 'm' (min)
    int a = -1, b = -1;
  };
  std::vector<Node> nodes;
  int root = -1;
  Semiring carrier = Semiring::integer;

  int add(Node n)
  {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }
};

inline bool equal(const ArithFormula& f, int fa, const ArithFormula& g, int ga)
{
  const auto& x = f.nodes[static_cast<std::size_t>(fa)];
  const auto& y = g.nodes[static_cast<std::size_t>(ga)];
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case ArithFormula::Kind::var: return x.var == y.var;
    case ArithFormula::Kind::constant: return x.value == y.value;
    case ArithFormula::Kind::unary:
      return x.op == y.op && equal(f, x.a, g, y.a);
    case ArithFormula::Kind::binary:
      return x.op == y.op && equal(f, x.a, g, y.a) && equal(f, x.b, g, y.b);
  }
  return false;
}

inline bool equal(const ArithFormula& f, const ArithFormula& g)
{
  if (f.carrier != g.carrier) return false;
  if (f.root < 0 || g.root < 0) return f.root == g.root;
  return equal(f, f.root, g, g.root);
}

namespace detail {

struct CarrierOps {
  std::string unary;  // accepted unary op chars
  std::string binary; // accepted binary op chars ('m' = min)
};

inline CarrierOps carrier_ops(Semiring s)
{
  switch (s) {
    case Semiring::integer: return {"-", "+*"};
    case Semiring::boolean: return {"~", "&|"};
    case Semiring::min_plus: return {"", "+m"};
  }
  throw domain_error(errc::unknown_kind, "bad carrier");
}

inline char op_char(FTok k)
{
  switch (k) {
    case FTok::op_not: return '~';
    case FTok::op_and: return '&';
    case FTok::op_or: return '|';
    case FTok::op_plus: return '+';
    case FTok::op_times: return '*';
    case FTok::op_minus: return '-';
    case FTok::op_min: return 'm';
    default: return 0;
  }
}

inline int parse_arith_node(FormulaLexer& lex, ArithFormula& out,
                            const CarrierOps& ops)
{
  FLex t = lex.next();
  switch (t.kind) {
    case FTok::var: {
      ArithFormula::Node n;
      n.kind = ArithFormula::Kind::var;
      try {
        n.var = std::stoi(t.text.substr(1));
      } catch (const std::exception&) {
        throw ropetc::parse_error(t.offset, "a small variable index", t.text);
      }
      if (n.var < 1)
        throw ropetc::parse_error(t.offset, "variable index >= 1", t.text);
      return out.add(std::move(n));
    }
    case FTok::zero:
    case FTok::one:
    case FTok::number: {
      ArithFormula::Node n;
      n.kind = ArithFormula::Kind::constant;
      n.value = t.kind == FTok::zero ? Int(0)
                : t.kind == FTok::one ? Int(1)
                                      : Int(t.text);
      if (out.carrier == Semiring::boolean && n.value != 0 && n.value != 1)
        throw domain_error(errc::invalid_value,
                           "boolean carrier constants must be 0 or 1");
      return out.add(std::move(n));
    }
    case FTok::lparen: break;
    default:
      throw ropetc::parse_error(t.offset, "a variable, constant or '('",
                                tok_name(t.kind));
  }

  // '(': try the unary form first, fall back to binary on failure. A
  // negative literal directly after '(' can also be the unary form applied
  // to a plain constant ("(-3)"), since the grammar has no bare-parens rule.
  std::size_t mark = lex.pos();
  std::size_t arena_mark = out.nodes.size();
  FLex head = lex.next();
  char hc = op_char(head.kind);
  bool neg_literal_head = head.kind == FTok::number && !head.text.empty() &&
                          head.text[0] == '-';
  if (hc != 0 || (neg_literal_head && ops.unary.find('-') != std::string::npos)) {
    if (hc != 0 && ops.unary.find(hc) == std::string::npos)
      throw domain_error(errc::unknown_operator,
                         std::string("operator '") + hc +
                             "' is not a unary operator of the declared carrier");
    try {
      int child;
      if (hc != 0) {
        child = parse_arith_node(lex, out, ops);
      } else {
        ArithFormula::Node c;
        c.kind = ArithFormula::Kind::constant;
        c.value = Int(head.text.substr(1));
        child = out.add(std::move(c));
        hc = '-';
      }
      FLex close = lex.next();
      if (close.kind != FTok::rparen)
        throw ropetc::parse_error(close.offset, "')'", tok_name(close.kind));
      ArithFormula::Node n;
      n.kind = ArithFormula::Kind::unary;
      n.op = hc;
      n.a = child;
      return out.add(std::move(n));
    } catch (const ropetc::parse_error&) {
      lex.seek(mark);
      out.nodes.resize(arena_mark);
    }
  } else {
    lex.seek(mark);
  }

  int left = parse_arith_node(lex, out, ops);
  FLex op = lex.next();
  char oc = op_char(op.kind);
  if (oc == 0)
    throw ropetc::parse_error(op.offset, "a binary operator", tok_name(op.kind));
  if (ops.binary.find(oc) == std::string::npos)
    throw domain_error(errc::unknown_operator,
                       std::string("operator '") + oc +
                           "' is not a binary operator of the declared carrier");
  int right = parse_arith_node(lex, out, ops);
  FLex close = lex.next();
  if (close.kind != FTok::rparen)
    throw ropetc::parse_error(close.offset, "')'", tok_name(close.kind));
  ArithFormula::Node n;
  n.kind = ArithFormula::Kind::binary;
  n.op = oc;
  n.a = left;
  n.b = right;
  return out.add(std::move(n));
}

} // namespace detail

inline ArithFormula parse_arith(const std::string& s, Semiring carrier)
{
  detail::FormulaLexer lex(s, /*greedy_numbers=*/true);
  ArithFormula f;
  f.carrier = carrier;
  detail::CarrierOps ops = detail::carrier_ops(carrier);
  f.root = detail::parse_arith_node(lex, f, ops);
  detail::FLex t = lex.next();
  if (t.kind != detail::FTok::end)
    throw parse_error(t.offset, "end of input", detail::tok_name(t.kind));
  return f;
}

inline Int eval_arith(const ArithFormula& f, int node,
                      const std::vector<Int>& assignment)
{
  const auto& n = f.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case ArithFormula::Kind::var: {
      if (static_cast<std::size_t>(n.var) > assignment.size())
        throw domain_error(errc::missing_assignment,
                           "no value for X" + std::to_string(n.var));
      const Int& v = assignment[static_cast<std::size_t>(n.var) - 1];
      if (f.carrier == Semiring::boolean && v != 0 && v != 1)
        throw domain_error(errc::invalid_value, "boolean assignment not in {0,1}");
      return v;
    }
    case ArithFormula::Kind::constant: return n.value;
    case ArithFormula::Kind::unary: {
      Int a = eval_arith(f, n.a, assignment);
      switch (n.op) {
        case '-': return -a;
        case '~': return 1 - a;
      }
      throw domain_error(errc::unknown_operator, "bad unary op");
    }
    case ArithFormula::Kind::binary: {
      Int a = eval_arith(f, n.a, assignment);
      Int b = eval_arith(f, n.b, assignment);
      switch (n.op) {
        case '+': return a + b;
        case '*': return a * b;
        case '&': return a * b;             // boolean semiring meet
        case '|': return a + b - a * b;     // boolean semiring join on {0,1}
        case 'm': return a < b ? a : b;     // tropical addition
      }
      throw domain_error(errc::unknown_operator, "bad binary op");
    }
  }
  throw domain_error(errc::unknown_kind, "bad node");
}

inline Int eval_arith(const ArithFormula& f, const std::vector<Int>& assignment)
{
  return eval_arith(f, f.root, assignment);
}

inline std::string print_arith(const ArithFormula& f, int node)
{
  const auto& n = f.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case ArithFormula::Kind::var: return "X" + std::to_string(n.var);
    case ArithFormula::Kind::constant: return n.value.str();
    case ArithFormula::Kind::unary:
      return std::string("(") + n.op + print_arith(f, n.a) + ")";
    case ArithFormula::Kind::binary: {
      std::string op = n.op == 'm' ? " min " : std::string(1, n.op);
      return "(" + print_arith(f, n.a) + op + print_arith(f, n.b) + ")";
    }
  }
  throw domain_error(errc::unknown_kind, "bad node");
}

inline std::string print_arith(const ArithFormula& f)
{
  return print_arith(f, f.root);
}

// Boolean formula recast over the boolean semiring carrier (for the
// dual-evaluator checks).
inline ArithFormula to_arith(const BoolFormula& f)
{
  ArithFormula out;
  out.carrier = Semiring::boolean;
  std::vector<int> map(f.nodes.size(), -1);
  for (std::size_t i = 0; i < f.nodes.size(); ++i) {
    const auto& n = f.nodes[i];
    ArithFormula::Node m;
    switch (n.kind) {
      case BoolFormula::Kind::const0:
        m.kind = ArithFormula::Kind::constant;
        m.value = 0;
        break;
      case BoolFormula::Kind::const1:
        m.kind = ArithFormula::Kind::constant;
        m.value = 1;
        break;
      case BoolFormula::Kind::not_op:
        m.kind = ArithFormula::Kind::unary;
        m.op = '~';
        m.a = map[static_cast<std::size_t>(n.a)];
        break;
      case BoolFormula::Kind::and_op:
      case BoolFormula::Kind::or_op:
        m.kind = ArithFormula::Kind::binary;
        m.op = n.kind == BoolFormula::Kind::and_op ? '&' : '|';
        m.a = map[static_cast<std::size_t>(n.a)];
        m.b = map[static_cast<std::size_t>(n.b)];
        break;
    }
    map[i] = out.add(std::move(m));
  }
  out.root = map[static_cast<std::size_t>(f.root)];
  return out;
}

} // namespace ropetc
