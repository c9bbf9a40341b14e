#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <map>
#include <random>

#include "ropetc/formula.hpp"
#include "ropetc/formula_gen.hpp"

using namespace ropetc;

namespace {

// Independent table-driven oracle over the printed infix form: a tiny
// interpreter that works on the string directly, no shared AST.
struct StringEval {
  const std::string& s;
  std::size_t pos = 0;

  int formula()
  {
    char c = s.at(pos);
    if (c == '0' || c == '1') {
      ++pos;
      return c - '0';
    }
    if (c != '(') throw std::runtime_error("oracle: bad formula");
    ++pos;
    if (s.at(pos) == '~') {
      ++pos;
      int v = formula();
      expect(')');
      static const int table_not[2] = {1, 0};
      return table_not[v];
    }
    int a = formula();
    char op = s.at(pos++);
    int b = formula();
    expect(')');
    static const int table_and[2][2] = {{0, 0}, {0, 1}};
    static const int table_or[2][2] = {{0, 1}, {1, 1}};
    if (op == '&') return table_and[a][b];
    if (op == '|') return table_or[a][b];
    throw std::runtime_error("oracle: bad operator");
  }

  void expect(char c)
  {
    if (s.at(pos) != c) throw std::runtime_error("oracle: expected char");
    ++pos;
  }
};

int oracle_eval_infix(const std::string& s)
{
  StringEval ev{s};
  int v = ev.formula();
  if (ev.pos != s.size()) throw std::runtime_error("oracle: trailing input");
  return v;
}

// Independent recursive oracle for arithmetic ASTs.
Int oracle_eval_arith(const ArithFormula& f, int node, const std::vector<Int>& cs)
{
  const auto& n = f.nodes[static_cast<std::size_t>(node)];
  using K = ArithFormula::Kind;
  if (n.kind == K::var) return cs.at(static_cast<std::size_t>(n.var) - 1);
  if (n.kind == K::constant) return n.value;
  if (n.kind == K::unary) {
    Int a = oracle_eval_arith(f, n.a, cs);
    return n.op == '-' ? Int(-a) : Int(1 - a);
  }
  Int a = oracle_eval_arith(f, n.a, cs);
  Int b = oracle_eval_arith(f, n.b, cs);
  switch (n.op) {
    case '+': return a + b;
    case '*':
    case '&': return a * b;
    case '|': return a + b - a * b;
    case 'm': return std::min(a, b);
    default: throw std::runtime_error("oracle: bad op");
  }
}

// All Boolean infix ASTs whose printed form has exactly `symbols` symbols.
std::vector<std::string> enumerate_infix(int symbols)
{
  static std::map<int, std::vector<std::string>> memo;
  auto it = memo.find(symbols);
  if (it != memo.end()) return it->second;
  std::vector<std::string> out;
  if (symbols == 1) {
    out = {"0", "1"};
  } else if (symbols >= 4) {
    for (const std::string& a : enumerate_infix(symbols - 3))
      out.push_back("(~" + a + ")");
    for (int la = 1; la <= symbols - 3 - 1; ++la) {
      int lb = symbols - 3 - la;
      if (lb < 1) continue;
      for (const std::string& a : enumerate_infix(la))
        for (const std::string& b : enumerate_infix(lb)) {
          out.push_back("(" + a + "&" + b + ")");
          out.push_back("(" + a + "|" + b + ")");
        }
    }
  }
  memo[symbols] = out;
  return out;
}

} // namespace

TEST_CASE("bool infix parsing", "[formula]")
{
  CHECK(parse_bool_infix("1").nodes[0].kind == BoolFormula::Kind::const1);
  BoolFormula f = parse_bool_infix("(0|1)");
  CHECK(f.nodes[f.root].kind == BoolFormula::Kind::or_op);
  CHECK(eval_bool(f) == 1);

  // Unicode operators from the source alphabet
  BoolFormula g = parse_bool_infix("((1\xE2\x88\xA7\x30)\xE2\x88\xA8(\xC2\xAC\x30))");
  BoolFormula g_ascii = parse_bool_infix("((1&0)|(~0))");
  CHECK(equal(g, g_ascii));
  CHECK(eval_bool(g) == 1);

  // parse errors carry byte offsets and expectations
  try {
    parse_bool_infix("(0|");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse_bool_infix("0|1"), parse_error);     // missing parens
  CHECK_THROWS_AS(parse_bool_infix("(0|1)x"), parse_error);  // trailing junk
  CHECK_THROWS_AS(parse_bool_infix("((0)|1)"), parse_error); // bare parens
  CHECK_THROWS_AS(parse_bool_infix(""), parse_error);
}

TEST_CASE("bool postfix parsing and the length condition", "[formula]")
{
  BoolFormula f = parse_bool_postfix("01|");
  CHECK(equal(f, parse_bool_infix("(0|1)")));

  // |alpha| = 1 < |beta| = 2 is rejected with the dedicated error kind
  try {
    parse_bool_postfix("10~&");
    FAIL("expected length violation");
  } catch (const parse_error& e) {
    CHECK(e.kind() == errc::length_condition_violated);
  }

  // 0~1&: alpha = "0~" (2) >= beta = "1" (1)
  BoolFormula g = parse_bool_postfix("0~1&");
  CHECK(equal(g, parse_bool_infix("((~0)&1)")));
  CHECK(eval_bool(g) == 1);

  CHECK_THROWS_AS(parse_bool_postfix("01"), parse_error);  // two formulas
  CHECK_THROWS_AS(parse_bool_postfix("~"), parse_error);   // missing operand
  CHECK_THROWS_AS(parse_bool_postfix("(0|1)"), parse_error);

  // Unicode postfix
  CHECK(eval_bool(parse_bool_postfix("01\xE2\x88\xA8")) == 1);
}

TEST_CASE("exhaustive boolean infix up to 15 symbols", "[formula]")
{
  std::size_t total = 0;
  for (int symbols = 1; symbols <= 15; ++symbols) {
    for (const std::string& text : enumerate_infix(symbols)) {
      BoolFormula f = parse_bool_infix(text);
      int want = oracle_eval_infix(text);
      CHECK(eval_bool(f) == want);
      // the arithmetic evaluator over the boolean carrier agrees
      CHECK(eval_arith(to_arith(f), {}) == want);
      // round trip through the canonical printer
      CHECK(print_bool_infix(f) == text);
      ++total;
    }
  }
  CHECK(total > 2000);
}

TEST_CASE("random bool formulas: oracle agreement and round trips", "[formula]")
{
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    BoolFormula f = generate_bool(8, seed);
    std::string infix = print_bool_infix(f);
    BoolFormula back = parse_bool_infix(infix);
    CHECK(equal(f, back));
    CHECK(eval_bool(f) == oracle_eval_infix(infix));
    CHECK(eval_arith(to_arith(f), {}) == eval_bool(f));

    // postfix print satisfies the length condition and evaluates equally
    std::string postfix = print_bool_postfix(f);
    BoolFormula pf = parse_bool_postfix(postfix);
    CHECK(eval_bool(pf) == eval_bool(f));
  }
}

TEST_CASE("de morgan pairs evaluate equal", "[formula]")
{
  for (std::uint64_t seed = 1000; seed < 1400; ++seed) {
    BoolFormula a = generate_bool(6, seed);
    BoolFormula b = generate_bool(6, seed + 100000);
    // ~(a & b) vs (~a | ~b)
    BoolFormula lhs = a;
    {
      std::size_t base = lhs.nodes.size();
      for (const auto& n : b.nodes) {
        auto copy = n;
        if (copy.a >= 0) copy.a += static_cast<int>(base);
        if (copy.b >= 0) copy.b += static_cast<int>(base);
        lhs.nodes.push_back(copy);
      }
      int broot = b.root + static_cast<int>(base);
      int conj = lhs.add(BoolFormula::Kind::and_op, lhs.root, broot);
      lhs.root = lhs.add(BoolFormula::Kind::not_op, conj);
    }
    BoolFormula rhs = a;
    {
      std::size_t base = rhs.nodes.size();
      for (const auto& n : b.nodes) {
        auto copy = n;
        if (copy.a >= 0) copy.a += static_cast<int>(base);
        if (copy.b >= 0) copy.b += static_cast<int>(base);
        rhs.nodes.push_back(copy);
      }
      int broot = b.root + static_cast<int>(base);
      int na = rhs.add(BoolFormula::Kind::not_op, rhs.root);
      int nb = rhs.add(BoolFormula::Kind::not_op, broot);
      rhs.root = rhs.add(BoolFormula::Kind::or_op, na, nb);
    }
    CHECK(eval_bool(lhs) == eval_bool(rhs));
  }
}

TEST_CASE("arith parsing and evaluation", "[formula]")
{
  ArithFormula v = parse_arith("X1", Semiring::integer);
  CHECK(eval_arith(v, {Int(7)}) == 7);

  ArithFormula f = parse_arith("(X1+3)", Semiring::integer);
  CHECK(f.nodes[f.root].op == '+');
  CHECK(eval_arith(f, {Int(4)}) == 7);

  // ((X1*X2)+X3) at (2,3,4) = 10
  ArithFormula g = parse_arith("((X1*X2)+X3)", Semiring::integer);
  CHECK(eval_arith(g, {Int(2), Int(3), Int(4)}) == 10);

  // unary minus and the Unicode multiplication sign
  ArithFormula h = parse_arith("((X1\xC3\x97X2)+(-X3))", Semiring::integer);
  CHECK(eval_arith(h, {Int(2), Int(3), Int(4)}) == 2);
  ArithFormula h2 = parse_arith("((X1*X2)+(\xE2\x88\x92X3))", Semiring::integer);
  CHECK(equal(h, h2));

  // unary-minus-of-constant and negative literal both work
  CHECK(eval_arith(parse_arith("(-3)", Semiring::integer), {}) == -3);
  CHECK(eval_arith(parse_arith("(-3+X1)", Semiring::integer), {Int(1)}) == -2);

  // multi-digit constants
  CHECK(eval_arith(parse_arith("(10*10)", Semiring::integer), {}) == 100);

  // boolean carrier
  ArithFormula bf = parse_arith("((X1|X2)&(~X1))", Semiring::boolean);
  CHECK(eval_arith(bf, {Int(0), Int(1)}) == 1);
  CHECK(eval_arith(bf, {Int(1), Int(1)}) == 0);
  CHECK_THROWS_AS(parse_arith("(X1+2)", Semiring::boolean), domain_error);

  // min-plus carrier
  ArithFormula mp = parse_arith("((X1 min X2)+3)", Semiring::min_plus);
  CHECK(eval_arith(mp, {Int(10), Int(-2)}) == 1);
  CHECK(eval_arith(parse_arith("(-5 min X1)", Semiring::min_plus), {Int(0)}) == -5);

  // ops outside the carrier
  CHECK_THROWS_AS(parse_arith("(X1&X2)", Semiring::integer), domain_error);
  CHECK_THROWS_AS(parse_arith("(X1 min X2)", Semiring::integer), domain_error);
  CHECK_THROWS_AS(parse_arith("(-X1)", Semiring::min_plus), domain_error);

  // missing assignment
  CHECK_THROWS_AS(eval_arith(parse_arith("X3", Semiring::integer), {Int(1)}),
                  domain_error);
}

TEST_CASE("random arith formulas match the recursive oracle", "[formula]")
{
  std::mt19937_64 vals(42);
  for (Semiring carrier :
       {Semiring::integer, Semiring::boolean, Semiring::min_plus}) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      ArithFormula f = generate_arith(carrier, 10, seed);
      std::vector<Int> cs;
      for (int i = 0; i < formula_gen_vars; ++i)
        cs.push_back(carrier == Semiring::boolean
                         ? Int(vals() % 2)
                         : Int(static_cast<long long>(vals() % 19) - 9));
      CHECK(eval_arith(f, cs) == oracle_eval_arith(f, f.root, cs));
      // round trip
      ArithFormula back = parse_arith(print_arith(f), carrier);
      CHECK(equal(f, back));
    }
  }
}

TEST_CASE("generator determinism and corpus validity", "[formula]")
{
  for (FormulaKind kind :
       {FormulaKind::bool_infix, FormulaKind::bool_postfix, FormulaKind::arith_int,
        FormulaKind::arith_bool, FormulaKind::arith_minplus}) {
    CHECK(generate_random(kind, 6, 99) == generate_random(kind, 6, 99));
    // every generated line evaluates cleanly
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      std::string line = generate_random(kind, 6, seed);
      CHECK_NOTHROW(eval_formula_line(kind, line));
    }
  }
  // depth 0 gives bare leaves
  std::string leaf = generate_random(FormulaKind::bool_infix, 0, 7);
  CHECK((leaf == "0" || leaf == "1"));

  // generated postfix corpora always satisfy the length condition
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::string line = generate_random(FormulaKind::bool_postfix, 8, seed);
    CHECK_NOTHROW(parse_bool_postfix(line));
  }
}

TEST_CASE("postfix and infix agree through conversion", "[formula]")
{
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    BoolFormula f = generate_bool(9, seed);
    std::string postfix = print_bool_postfix(f);
    BoolFormula back = parse_bool_postfix(postfix);
    CHECK(eval_bool(back) == eval_bool(f));
  }
}
