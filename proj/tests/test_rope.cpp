#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracle_fp.hpp"
#include "oracle_real.hpp"
#include "ropetc/rope.hpp"

using namespace ropetc;

namespace {

struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}
  std::int64_t below(std::int64_t n) { return static_cast<std::int64_t>(g() % n); }
  std::int64_t in(std::int64_t lo, std::int64_t hi) { return lo + below(hi - lo + 1); }
};

// entries in roughly [-1, 1]
FpMatrix small_matrix(Rng& rng, std::size_t r, std::size_t c, int p)
{
  FpMatrix m(r, c, p);
  std::int64_t lo = std::int64_t(1) << (p - 1);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (rng.below(16) == 0) continue;
      std::int64_t sig = rng.in(lo, 2 * lo - 1);
      if (rng.below(2) == 0) sig = -sig;
      m.at(i, j) = FpNum(Int(sig), rng.in(-p - 2, -p), p);
    }
  return m;
}

LayerWeights random_weights(Rng& rng, std::size_t d, int p, GKind g)
{
  LayerWeights w;
  w.W_Q = small_matrix(rng, d, d, p);
  w.W_K = small_matrix(rng, d, d, p);
  w.W_V = small_matrix(rng, d, d, p);
  w.mlp_W = small_matrix(rng, d, d, p);
  w.mlp_b = small_matrix(rng, d, 1, p);
  w.g_kind = g;
  return w;
}

Rational tol(int bits) { return Rational(1, Int(1) << static_cast<unsigned>(bits)); }

Rational rel_diff(const Rational& a, const Rational& b)
{
  Rational d = (a - b) / b;
  return d < 0 ? Rational(-d) : d;
}

// Exact-step attention oracle: same staging as the definition, with oracle
// fp ops for the compositional arithmetic and the library's fp_exp/fp_sin/
// fp_cos as opaque primitives (their own contracts are tested separately).
FpMatrix oracle_scores(const FpMatrix& x, const FpMatrix& w_q, const FpMatrix& w_k,
                       const RopeConfig& cfg)
{
  const std::size_t n = x.rows(), d = x.cols();
  const int p = cfg.p;
  auto omatmul = [&](const FpMatrix& a, const FpMatrix& b) {
    FpMatrix out(a.rows(), b.cols(), p);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) {
        Rational sum(0);
        for (std::size_t k = 0; k < a.cols(); ++k) {
          auto prod = fporacle::fp_mul(a.at(i, k), b.at(k, j));
          REQUIRE_FALSE(prod.overflow());
          sum += prod.value->value();
        }
        auto r = fporacle::round_p(sum, p);
        REQUIRE_FALSE(r.overflow());
        out.at(i, j) = *r.value;
      }
    return out;
  };
  FpMatrix a(n, n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::int64_t off = static_cast<std::int64_t>(j) - static_cast<std::int64_t>(i);
      FpNum off_fp = round_p(Rational(off), p);
      FpMatrix rot(d, d, p);
      for (std::size_t t = 0; t < d / 2; ++t) {
        auto angle = fporacle::fp_mul(off_fp, cfg.thetas[t]);
        REQUIRE_FALSE(angle.overflow());
        FpNum c = fp_cos(*angle.value), s = fp_sin(*angle.value);
        rot.at(2 * t, 2 * t) = c;
        rot.at(2 * t, 2 * t + 1) = s.negated();
        rot.at(2 * t + 1, 2 * t) = s;
        rot.at(2 * t + 1, 2 * t + 1) = c;
      }
      FpMatrix m = omatmul(omatmul(w_q, rot), w_k.transposed());
      FpMatrix u = omatmul(x.row(i), m);
      FpMatrix s = omatmul(u, x.row(j).transposed());
      a.at(i, j) = fp_exp(s.at(0, 0));
    }
  return a;
}

} // namespace

TEST_CASE("default thetas", "[rope]")
{
  const int p = 16;
  auto thetas = default_thetas(8, Rational(10000), p);
  REQUIRE(thetas.size() == 4);
  CHECK(thetas[0] == FpNum::one(p)); // base^0

  // d = 4: theta_2 = round_p(10000^(-1/2)) = round_p(0.01)
  auto t4 = default_thetas(4, Rational(10000), p);
  CHECK(t4[1] == round_p(Rational(1, 100), p));

  // monotone decreasing
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    CHECK(fp_leq(thetas[i], thetas[i - 1]));
    CHECK(thetas[i].sign() > 0);
  }
}

TEST_CASE("rotation block", "[rope]")
{
  const int p = 16;
  FpMatrix r0 = rotation_block(FpNum::zero(p));
  CHECK(r0 == FpMatrix::identity(2, p));

  // quarter turn within 2^-12 entrywise of [[0,-1],[1,0]]
  const std::int64_t K = 160;
  Rational half_pi = realoracle::to_rational(realoracle::pi_fx(K), K) / 2;
  FpMatrix rq = rotation_block(round_p(half_pi, p));
  auto near = [&](const FpNum& v, const Rational& want) {
    Rational d = v.value() - want;
    if (d < 0) d = -d;
    return d <= tol(12);
  };
  CHECK(near(rq.at(0, 0), Rational(0)));
  CHECK(near(rq.at(0, 1), Rational(-1)));
  CHECK(near(rq.at(1, 0), Rational(1)));
  CHECK(near(rq.at(1, 1), Rational(0)));

  // determinant within 2^-(p-3) of 1 for random angles
  Rng rng(7);
  for (int iter = 0; iter < 40; ++iter) {
    FpNum theta(Int(rng.in(1 << (p - 1), (1 << p) - 1)), rng.in(-p, 2 - p), p);
    if (rng.below(2) == 0) theta = theta.negated();
    FpMatrix r = rotation_block(theta);
    FpNum det = fp_add(fp_mul(r.at(0, 0), r.at(1, 1)),
                       fp_mul(r.at(0, 1), r.at(1, 0)).negated());
    Rational d = det.value() - 1;
    if (d < 0) d = -d;
    CHECK(d <= tol(p - 3));
  }
}

TEST_CASE("relative rotation structure", "[rope]")
{
  const int p = 16;
  RopeConfig cfg = make_config(4, 6, p);
  CHECK(relative_rotation(0, cfg) == FpMatrix::identity(6, p));

  FpMatrix r = relative_rotation(2, cfg);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (i / 2 != j / 2) CHECK(r.at(i, j) == FpNum::zero(p)); // off-block zeros

  // d=2 with theta_1 = pi/2 and offset 1 is the quarter-turn block
  const std::int64_t K = 160;
  Rational half_pi = realoracle::to_rational(realoracle::pi_fx(K), K) / 2;
  RopeConfig cfg2;
  cfg2.n = 2;
  cfg2.d = 2;
  cfg2.p = p;
  cfg2.thetas = {round_p(half_pi, p)};
  FpMatrix blk = relative_rotation(1, cfg2);
  CHECK(blk == rotation_block(round_p(half_pi, p)));
}

TEST_CASE("rotation additivity within rounding tolerance", "[rope]")
{
  const int p = 16;
  Rng rng(17);
  for (int iter = 0; iter < 25; ++iter) {
    FpNum a(Int(rng.in(1 << (p - 1), (1 << p) - 1)), rng.in(-p - 1, -p + 1), p);
    FpNum b(Int(rng.in(1 << (p - 1), (1 << p) - 1)), rng.in(-p - 1, -p + 1), p);
    FpMatrix ra = rotation_block(a), rb = rotation_block(b);
    FpMatrix rab = matmul(ra, rb);
    FpMatrix expect = rotation_block(fp_add(a, b));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        Rational d = rab.at(i, j).value() - expect.at(i, j).value();
        if (d < 0) d = -d;
        CHECK(d <= tol(p - 4));
      }
  }
}

TEST_CASE("attention scores: n=1 and offset dependence", "[rope]")
{
  const int p = 16;
  Rng rng(23);

  // n = 1: A = [[exp(x W_Q W_K^T x^T)]]
  RopeConfig cfg1 = make_config(1, 4, p);
  FpMatrix x1 = small_matrix(rng, 1, 4, p);
  FpMatrix wq = small_matrix(rng, 4, 4, p), wk = small_matrix(rng, 4, 4, p);
  FpMatrix a1 = attention_scores(x1, wq, wk, cfg1);
  FpMatrix m = matmul(matmul(wq, FpMatrix::identity(4, p)), wk.transposed());
  FpMatrix s = matmul(matmul(x1, m), x1.transposed());
  CHECK(a1.at(0, 0) == fp_exp(s.at(0, 0)));

  // identical rows: entries depend on j - i only, bit-exactly
  RopeConfig cfg = make_config(5, 4, p);
  FpMatrix x(5, 4, p);
  FpMatrix row = small_matrix(rng, 1, 4, p);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = row.at(0, j);
  FpMatrix a = attention_scores(x, wq, wk, cfg);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      std::size_t i2 = (i + 1) % 5, j2 = (j + 1) % 5;
      if (static_cast<std::int64_t>(j) - static_cast<std::int64_t>(i) ==
          static_cast<std::int64_t>(j2) - static_cast<std::int64_t>(i2))
        CHECK(a.at(i, j) == a.at(i2, j2));
    }
  for (const FpNum& v : a.entries()) CHECK(v.sign() > 0);
}

TEST_CASE("attention scores match the exact-step oracle", "[rope]")
{
  const int p = 16;
  Rng rng(29);
  RopeConfig cfg = make_config(3, 4, p);
  for (int iter = 0; iter < 4; ++iter) {
    FpMatrix x = small_matrix(rng, 3, 4, p);
    FpMatrix wq = small_matrix(rng, 4, 4, p), wk = small_matrix(rng, 4, 4, p);
    CHECK(attention_scores(x, wq, wk, cfg) == oracle_scores(x, wq, wk, cfg));
  }
}

TEST_CASE("attention layer", "[rope]")
{
  const int p = 16;
  Rng rng(41);

  // n = 1: D^-1 A = 1 analytically, so the output row is X W_V up to the
  // round-trip of multiplying by exp(s) and dividing it back out (the layer
  // staging divides last, after A X W_V)
  RopeConfig cfg1 = make_config(1, 4, p);
  LayerWeights w = random_weights(rng, 4, p, GKind::identity);
  FpMatrix x1 = small_matrix(rng, 1, 4, p);
  {
    FpMatrix got = attention_layer(x1, w, cfg1);
    FpMatrix want = matmul(x1, w.W_V);
    for (std::size_t j = 0; j < 4; ++j) {
      if (want.at(0, j).is_zero()) {
        CHECK(got.at(0, j).is_zero());
        continue;
      }
      CHECK(rel_diff(got.at(0, j).value(), want.at(0, j).value()) <= tol(p - 3));
    }
  }

  // W_V = I with identical rows: every output row equals the common row
  // within 2^-(p-4) relative (convex combination of identical rows)
  RopeConfig cfg = make_config(4, 4, p);
  LayerWeights wi = random_weights(rng, 4, p, GKind::identity);
  wi.W_V = FpMatrix::identity(4, p);
  FpMatrix x(4, 4, p);
  FpMatrix row = small_matrix(rng, 1, 4, p);
  for (std::size_t j = 0; j < 4; ++j)
    if (row.at(0, j).is_zero()) row.at(0, j) = FpNum::one(p);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = row.at(0, j);
  FpMatrix out = attention_layer(x, wi, cfg);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(rel_diff(out.at(i, j).value(), row.at(0, j).value()) <= tol(p - 4));

  // random instance against composed defined steps
  FpMatrix x2 = small_matrix(rng, 3, 4, p);
  RopeConfig cfg3 = make_config(3, 4, p);
  LayerWeights w3 = random_weights(rng, 4, p, GKind::identity);
  FpMatrix a = oracle_scores(x2, w3.W_Q, w3.W_K, cfg3);
  FpMatrix y = matmul(matmul(a, x2), w3.W_V);
  FpMatrix expect = row_sums_diag_inverse_apply(a, y);
  CHECK(attention_layer(x2, w3, cfg3) == expect);
}

TEST_CASE("mlp layer", "[rope]")
{
  const int p = 12;
  Rng rng(55);
  FpMatrix x = small_matrix(rng, 3, 4, p);

  // W = I, b = 0 leaves X unchanged
  FpMatrix id = FpMatrix::identity(4, p);
  FpMatrix zero_b(4, 1, p);
  CHECK(mlp_layer(x, id, zero_b) == x);

  // W = 0: every row becomes b^T
  FpMatrix zw(4, 4, p);
  FpMatrix b = small_matrix(rng, 4, 1, p);
  FpMatrix out = mlp_layer(x, zw, b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(out.at(i, j) == round_p(b.at(j, 0).value(), p));

  // random against per-row oracle steps
  FpMatrix w = small_matrix(rng, 4, 4, p);
  FpMatrix got = mlp_layer(x, w, b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Rational sum(0);
      for (std::size_t k = 0; k < 4; ++k) {
        auto prod = fporacle::fp_mul(w.at(j, k), x.at(i, k));
        REQUIRE_FALSE(prod.overflow());
        sum += prod.value->value();
      }
      auto rs = fporacle::round_p(sum, p);
      REQUIRE_FALSE(rs.overflow());
      auto fin = fporacle::fp_add(*rs.value, b.at(j, 0));
      REQUIRE_FALSE(fin.overflow());
      CHECK(got.at(i, j) == *fin.value);
    }
}

TEST_CASE("layer norm", "[rope]")
{
  const int p = 16;

  // [-1, 1] is a fixed point of normalization (mean 0, variance 1)
  FpMatrix x(1, 2, p);
  x.at(0, 0) = FpNum::one(p).negated();
  x.at(0, 1) = FpNum::one(p);
  FpMatrix out = layer_norm(x);
  for (std::size_t j = 0; j < 2; ++j) {
    Rational d = out.at(0, j).value() - x.at(0, j).value();
    if (d < 0) d = -d;
    CHECK(d <= tol(p - 3));
  }

  // constant rows have zero variance
  FpMatrix c(2, 3, p);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) c.at(i, j) = FpNum::one(p);
  CHECK_THROWS_AS(layer_norm(c), domain_error);
  // ... unless the epsilon escape hatch is on
  FpMatrix eps_out = layer_norm(c, nullptr, round_p(Rational(1, 1 << 10), p));
  for (const FpNum& v : eps_out.entries()) CHECK(v.is_zero());

  // random rows: float-recomputed moments are near (0, 1)
  Rng rng(67);
  FpMatrix r = small_matrix(rng, 4, 6, p);
  FpMatrix nrm = layer_norm(r);
  FpNum d_fp = round_p(Rational(6), p);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<FpNum> row;
    for (std::size_t j = 0; j < 6; ++j) row.push_back(nrm.at(i, j));
    FpNum mean = fp_div(fp_iter_add(row), d_fp);
    Rational m = mean.value();
    if (m < 0) m = -m;
    CHECK(m <= tol(p - 4));
    std::vector<FpNum> sq;
    for (const FpNum& v : row) sq.push_back(fp_mul(v, v));
    FpNum var = fp_div(fp_iter_add(sq), d_fp);
    CHECK(rel_diff(var.value(), Rational(1)) <= tol(p - 5));
  }
}

TEST_CASE("transformer forward composition", "[rope]")
{
  const int p = 16;
  Rng rng(71);

  // m = 0 composes to g0 alone
  TransformerModel m0;
  m0.config = make_config(3, 4, p);
  m0.g0_kind = GKind::layernorm;
  FpMatrix x = small_matrix(rng, 3, 4, p);
  CHECK(transformer_forward(x, m0) == layer_norm(x));

  // m = 1 with identity g's and n = 1 reduces to the single attention layer
  TransformerModel m1;
  m1.config = make_config(1, 4, p);
  m1.g0_kind = GKind::identity;
  m1.layers.push_back(random_weights(rng, 4, p, GKind::identity));
  FpMatrix x1 = small_matrix(rng, 1, 4, p);
  CHECK(transformer_forward(x1, m1) ==
        attention_layer(x1, m1.layers[0], m1.config));
  {
    // ... which is X W_V within the mul/div round-trip of D^-1
    FpMatrix got = transformer_forward(x1, m1);
    FpMatrix want = matmul(x1, m1.layers[0].W_V);
    for (std::size_t j = 0; j < 4; ++j) {
      if (want.at(0, j).is_zero()) {
        CHECK(got.at(0, j).is_zero());
        continue;
      }
      CHECK(rel_diff(got.at(0, j).value(), want.at(0, j).value()) <= tol(p - 3));
    }
  }

  // m = 2 random model composes the same defined steps
  TransformerModel m2;
  m2.config = make_config(4, 4, p);
  m2.g0_kind = GKind::identity;
  m2.layers.push_back(random_weights(rng, 4, p, GKind::mlp));
  m2.layers.push_back(random_weights(rng, 4, p, GKind::layernorm));
  FpMatrix x2 = small_matrix(rng, 4, 4, p);
  FpMatrix y = x2;
  y = attention_layer(y, m2.layers[0], m2.config);
  y = mlp_layer(y, m2.layers[0].mlp_W, m2.layers[0].mlp_b);
  y = attention_layer(y, m2.layers[1], m2.config);
  y = layer_norm(y);
  CHECK(transformer_forward(x2, m2) == y);

  // determinism across thread counts, bit-identical
  CHECK(transformer_forward(x2, m2, nullptr, std::nullopt, 4) ==
        transformer_forward(x2, m2));
}

TEST_CASE("traced depths equal the closed-form formulas", "[rope]")
{
  Rng rng(83);
  for (int p : {8, 16}) {
    for (std::size_t n : {1, 2, 4}) {
      for (std::size_t d : {2, 4}) {
        RopeConfig cfg = make_config(n, d, p);
        FpMatrix x = small_matrix(rng, n, d, p);
        LayerWeights w = random_weights(rng, d, p, GKind::mlp);

        Tracer ts;
        attention_scores(x, w.W_Q, w.W_K, cfg, &ts);
        DepthExpr scores_expect =
            4 * (DepthExpr::sym(DepthSym::d_std) + DepthExpr::sym(DepthSym::d_oplus)) +
            depth_triangle() + DepthExpr::sym(DepthSym::d_exp);
        CHECK(trace_depth(ts.trace()) == scores_expect);
        Tracer tl;
        attention_layer(x, w, cfg, &tl);
        CHECK(trace_depth(tl.trace()) == layer_formula(LayerKind::attention));

        Tracer tm;
        mlp_layer(x, w.mlp_W, w.mlp_b, &tm);
        CHECK(trace_depth(tm.trace()) == layer_formula(LayerKind::mlp));

        if (d >= 2 && n >= 1) {
          Tracer tn;
          layer_norm(x, &tn);
          CHECK(trace_depth(tn.trace()) == layer_formula(LayerKind::layernorm));
        }
      }
    }
  }

  // transformer trace at m in {0..3}
  const int p = 16;
  for (int m = 0; m <= 3; ++m) {
    TransformerModel model;
    model.config = make_config(2, 4, p);
    model.g0_kind = GKind::identity;
    for (int i = 0; i < m; ++i)
      model.layers.push_back(
          random_weights(rng, 4, p, i % 2 ? GKind::layernorm : GKind::mlp));
    FpMatrix x = small_matrix(rng, 2, 4, p);
    Tracer t;
    transformer_forward(x, model, &t);
    CHECK(trace_depth(t.trace()) == layer_formula(LayerKind::transformer, m));
    CHECK(assert_constant_depth(trace_depth(t.trace()), m));
  }
}

TEST_CASE("attention scores trace is the lemma staging", "[rope]")
{
  // stage-by-stage: d_tri, then four (mul, iter_add) pairs, then exp
  const int p = 8;
  Rng rng(91);
  RopeConfig cfg = make_config(2, 2, p);
  FpMatrix x = small_matrix(rng, 2, 2, p);
  FpMatrix wq = small_matrix(rng, 2, 2, p), wk = small_matrix(rng, 2, 2, p);
  Tracer t;
  attention_scores(x, wq, wk, cfg, &t);
  const auto& stages = t.trace().stages();
  REQUIRE(stages.size() == 10);
  CHECK(stages[0].cost == depth_triangle());
  for (int i = 1; i <= 8; i += 2) {
    CHECK(stages[i].cost == DepthExpr::sym(DepthSym::d_std));
    CHECK(stages[i + 1].cost == DepthExpr::sym(DepthSym::d_oplus));
  }
  CHECK(stages[9].cost == DepthExpr::sym(DepthSym::d_exp));
}

TEST_CASE("attention layer trace size is polynomially bounded", "[rope]")
{
  Rng rng(97);
  for (std::size_t n : {2, 4, 8}) {
    for (std::size_t d : {2, 4}) {
      RopeConfig cfg = make_config(n, d, 8);
      FpMatrix x = small_matrix(rng, n, d, 8);
      LayerWeights w = random_weights(rng, d, 8, GKind::identity);
      Tracer t;
      attention_layer(x, w, cfg, &t);
      const std::size_t nd = n * d;
      CHECK(t.trace().size() <= 40 * nd * nd * nd);
    }
  }
}
