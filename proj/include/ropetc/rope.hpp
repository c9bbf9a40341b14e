#pragma once

// Rotary-position-embedding transformer forward pass over FpNum arithmetic:
// 2x2 rotation blocks, block-diagonal relative rotations, the rotated
// attention matrix A_ij = exp(X_i W_Q R_{j-i} W_K^T X_j^T), the attention
// layer D^-1 A X W_V, MLP and LayerNorm components, and their composition.
// Evaluation order inside each operation follows the staging the depth
// accountant asserts; reassociations that would change rounding are not
// allowed.

#include <optional>
#include <vector>

#include "ropetc/matrix.hpp"

namespace ropetc {

enum class GKind { identity, mlp, layernorm };

inline const char* to_string(GKind g)
{
  switch (g) {
    case GKind::identity: return "identity";
    case GKind::mlp: return "mlp";
    case GKind::layernorm: return "layernorm";
  }
  return "?";
}

struct RopeConfig {
  std::size_t n = 0;       // sequence length
  std::size_t d = 0;       // embedding dimension, even
  int p = 16;              // precision
  std::vector<FpNum> thetas; // d/2 angle frequencies
  Rational theta_base = 10000;

  void validate() const
  {
    if (d == 0 || d % 2 != 0)
      throw domain_error(errc::shape_mismatch, "embedding dimension must be even");
    if (thetas.size() != d / 2)
      throw domain_error(errc::shape_mismatch, "need d/2 angle frequencies");
    for (const FpNum& t : thetas)
      if (t.precision() != p)
        throw domain_error(errc::precision_mismatch, "theta precision mismatch");
  }
};

struct LayerWeights {
  FpMatrix W_Q, W_K, W_V; // d x d
  FpMatrix mlp_W;         // d x d (used when g_kind == mlp)
  FpMatrix mlp_b;         // d x 1
  GKind g_kind = GKind::identity;
};

struct TransformerModel {
  RopeConfig config;
  GKind g0_kind = GKind::identity;
  std::optional<std::pair<FpMatrix, FpMatrix>> g0_mlp; // (W, b) when g0 is mlp
  std::vector<LayerWeights> layers;

  std::size_t layer_count() const { return layers.size(); }
};

// theta_t = round_p(base^(-2(t-1)/d)), computed at >= 2p internal bits.
inline std::vector<FpNum> default_thetas(std::size_t d, const Rational& base,
                                         int p)
{
  if (d == 0 || d % 2 != 0)
    throw domain_error(errc::shape_mismatch, "embedding dimension must be even");
  if (base <= 0)
    throw domain_error(errc::negative_input, "theta base must be positive");
  const std::int64_t bits = 2 * p + 96;
  detail::IntInterval lnb = detail::ln_pos_scaled(base, bits);
  Int ln_mid = (lnb.lo + lnb.hi) >> 1;
  std::vector<FpNum> out;
  out.reserve(d / 2);
  for (std::size_t t = 1; t <= d / 2; ++t) {
    // y = -2(t-1)/d * ln(base), as a dyadic at the working scale
    Int y = detail::rational_floor(Int(-2) * Int(t - 1) * ln_mid, Int(d));
    Int ymag = (abs(y) >> static_cast<unsigned>(bits)) + 1; // ceil of |y| value
    if (ymag > 4096)
      throw domain_error(errc::invalid_value, "theta base out of supported range");
    int terms = 2 * p + 48 + 4 * static_cast<int>(ymag);
    auto [num, den] = detail::exp_series(y, bits, terms);
    out.push_back(round_scaled(std::move(num), std::move(den), 0, p));
  }
  return out;
}

inline RopeConfig make_config(std::size_t n, std::size_t d, int p,
                              const Rational& base = Rational(10000))
{
  RopeConfig cfg;
  cfg.n = n;
  cfg.d = d;
  cfg.p = p;
  cfg.theta_base = base;
  cfg.thetas = default_thetas(d, base, p);
  cfg.validate();
  return cfg;
}

// R(theta) = [[cos t, -sin t], [sin t, cos t]]
inline FpMatrix rotation_block(const FpNum& theta, Tracer* tracer = nullptr)
{
  if (tracer)
    tracer->stage_mixed({{PrimKind::sin_op, 1}, {PrimKind::cos_op, 1}},
                        "rotation block: sin/cos");
  FpNum c = fp_cos(theta);
  FpNum s = fp_sin(theta);
  FpMatrix r(2, 2, theta.precision());
  r.at(0, 0) = c;
  r.at(0, 1) = s.negated();
  r.at(1, 0) = s;
  r.at(1, 1) = c;
  return r;
}

// Block-diagonal relative rotation for a position offset j - i.
inline FpMatrix relative_rotation(std::int64_t offset, const RopeConfig& cfg,
                                  Tracer* tracer = nullptr)
{
  cfg.validate();
  FpMatrix r(cfg.d, cfg.d, cfg.p);
  FpNum off = round_scaled(Int(offset), Int(1), 0, cfg.p);
  auto scope = abstract_stage(tracer, depth_triangle(), "relative rotation entries");
  for (std::size_t t = 0; t < cfg.d / 2; ++t) {
    trace_stage(tracer, PrimKind::mul, 1, "rotation angle");
    FpNum angle = fp_mul(off, cfg.thetas[t]);
    FpMatrix blk = rotation_block(angle, tracer);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        r.at(2 * t + a, 2 * t + b) = blk.at(a, b);
  }
  return r;
}

// A_ij = exp(X_i W_Q R_{j-i} W_K^T X_j^T); the middle product
// M_off = W_Q R_off W_K^T is computed once per distinct offset.
inline FpMatrix attention_scores(const FpMatrix& x, const FpMatrix& w_q,
                                 const FpMatrix& w_k, const RopeConfig& cfg,
                                 Tracer* tracer = nullptr, int threads = 1)
{
  cfg.validate();
  const std::size_t n = x.rows(), d = x.cols();
  if (n != cfg.n || d != cfg.d)
    throw domain_error(errc::shape_mismatch, "attention_scores: X shape");
  if (w_q.rows() != d || w_q.cols() != d || w_k.rows() != d || w_k.cols() != d)
    throw domain_error(errc::shape_mismatch, "attention_scores: weight shape");
  if (x.precision() != cfg.p)
    throw domain_error(errc::precision_mismatch, "attention_scores: precision");

  const std::size_t offsets = 2 * n - 1; // j - i in [-(n-1), n-1]
  std::vector<FpMatrix> m_off;
  m_off.reserve(offsets);
  {
    auto scope = abstract_stage(tracer, depth_triangle(), "rope rotation entries");
    for (std::size_t t = 0; t < offsets; ++t) {
      std::int64_t off = static_cast<std::int64_t>(t) - (static_cast<std::int64_t>(n) - 1);
      m_off.push_back(relative_rotation(off, cfg, tracer));
    }
  }
  const FpMatrix w_k_t = w_k.transposed();
  trace_stage(tracer, PrimKind::mul, offsets * d * d * d, "W_Q R: products");
  trace_stage(tracer, PrimKind::iter_add, offsets * d * d, "W_Q R: sums");
  trace_stage(tracer, PrimKind::mul, offsets * d * d * d, "(W_Q R) W_K^T: products");
  trace_stage(tracer, PrimKind::iter_add, offsets * d * d, "(W_Q R) W_K^T: sums");
  for (std::size_t t = 0; t < offsets; ++t)
    m_off[t] = matmul(matmul(w_q, m_off[t]), w_k_t);

  trace_stage(tracer, PrimKind::mul, n * n * d * d, "X_i M: products");
  trace_stage(tracer, PrimKind::iter_add, n * n * d, "X_i M: sums");
  trace_stage(tracer, PrimKind::mul, n * n * d, "(X_i M) X_j^T: products");
  trace_stage(tracer, PrimKind::iter_add, n * n, "(X_i M) X_j^T: sums");
  trace_stage(tracer, PrimKind::exp_op, n * n, "exp of scores");
  FpMatrix a(n, n, x.precision());
  parallel_for(n, tracer ? 1 : threads, [&](std::size_t i) {
    const FpMatrix xi = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const FpMatrix& m = m_off[j + (n - 1) - i];
      FpMatrix u = matmul(xi, m);
      FpMatrix s = matmul(u, x.row(j).transposed());
      a.at(i, j) = fp_exp(s.at(0, 0));
    }
  });
  return a;
}

// Attn(X) = D^-1 A X W_V with D = diag(A 1_n).
inline FpMatrix attention_layer(const FpMatrix& x, const LayerWeights& w,
                                const RopeConfig& cfg, Tracer* tracer = nullptr,
                                int threads = 1)
{
  FpMatrix a = attention_scores(x, w.W_Q, w.W_K, cfg, tracer, threads);
  FpMatrix y = matmul(matmul(a, x, tracer, threads), w.W_V, tracer, threads);
  return row_sums_diag_inverse_apply(a, y, tracer, threads);
}

// g_mlp(X)_i = W X_i + b, applied to every row.
inline FpMatrix mlp_layer(const FpMatrix& x, const FpMatrix& w,
                          const FpMatrix& b, Tracer* tracer = nullptr,
                          int threads = 1)
{
  const std::size_t n = x.rows(), d = x.cols();
  if (w.rows() != d || w.cols() != d || b.rows() != d || b.cols() != 1)
    throw domain_error(errc::shape_mismatch, "mlp_layer: weight shape");
  // row i of the result is (W X_i^T + b)^T; X W^T computes all rows at once
  // with identical per-entry arithmetic
  FpMatrix y = matmul(x, w.transposed(), tracer, threads);
  trace_stage(tracer, PrimKind::add, n * d, "mlp: bias add");
  FpMatrix out(n, d, x.precision());
  parallel_for(n, tracer ? 1 : threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < d; ++j)
      out.at(i, j) = fp_add(y.at(i, j), b.at(j, 0));
  });
  return out;
}

// g_ln(X)_i = (X_i - mu_i) / sqrt(sigma_i^2); with ln_epsilon set the
// denominator becomes sqrt(sigma_i^2 + eps) (off-definition escape hatch).
inline FpMatrix layer_norm(const FpMatrix& x, Tracer* tracer = nullptr,
                           const std::optional<FpNum>& ln_epsilon = std::nullopt,
                           int threads = 1)
{
  const std::size_t n = x.rows(), d = x.cols();
  const int p = x.precision();
  const FpNum d_fp = round_scaled(Int(d), Int(1), 0, p);

  trace_stage(tracer, PrimKind::iter_add, n, "layernorm: row sums");
  trace_stage(tracer, PrimKind::div, n, "layernorm: means");
  std::vector<FpNum> mean(n, FpNum::zero(p));
  std::vector<FpNum> rowbuf(d, FpNum::zero(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) rowbuf[j] = x.at(i, j);
    mean[i] = fp_div(fp_iter_add(rowbuf), d_fp);
  }

  trace_stage(tracer, PrimKind::add, n * d, "layernorm: deviations");
  FpMatrix dev(n, d, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      dev.at(i, j) = fp_add(x.at(i, j), mean[i].negated());

  trace_stage(tracer, PrimKind::mul, n * d, "layernorm: squared deviations");
  trace_stage(tracer, PrimKind::iter_add, n, "layernorm: square sums");
  trace_stage(tracer, PrimKind::div, n, "layernorm: variances");
  std::vector<FpNum> variance(n, FpNum::zero(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      FpNum dv = dev.at(i, j);
      rowbuf[j] = fp_mul(dv, dv);
    }
    variance[i] = fp_div(fp_iter_add(rowbuf), d_fp);
  }

  if (ln_epsilon) {
    trace_stage(tracer, PrimKind::add, n, "layernorm: epsilon");
    for (std::size_t i = 0; i < n; ++i)
      variance[i] = fp_add(variance[i], *ln_epsilon);
  }

  trace_stage(tracer, PrimKind::sqrt_op, n, "layernorm: sqrt");
  std::vector<FpNum> denom(n, FpNum::zero(p));
  for (std::size_t i = 0; i < n; ++i) {
    if (variance[i].is_zero())
      throw domain_error(errc::zero_variance,
                         "row " + std::to_string(i) + " has zero variance");
    denom[i] = fp_sqrt(variance[i]);
  }

  trace_stage(tracer, PrimKind::div, n * d, "layernorm: normalize");
  FpMatrix out(n, d, p);
  parallel_for(n, tracer ? 1 : threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < d; ++j)
      out.at(i, j) = fp_div(dev.at(i, j), denom[i]);
  });
  return out;
}

namespace detail {

inline FpMatrix apply_g(const FpMatrix& x, GKind kind, const FpMatrix* w,
                        const FpMatrix* b, Tracer* tracer,
                        const std::optional<FpNum>& ln_epsilon, int threads)
{
  auto scope = abstract_stage(tracer, DepthExpr::sym(DepthSym::d_g),
                              std::string("g: ") + to_string(kind));
  switch (kind) {
    case GKind::identity: return x;
    case GKind::mlp:
      if (!w || !b)
        throw domain_error(errc::shape_mismatch, "mlp g-component requires weights");
      return mlp_layer(x, *w, *b, tracer, threads);
    case GKind::layernorm: return layer_norm(x, tracer, ln_epsilon, threads);
  }
  throw domain_error(errc::unknown_kind, "unknown g kind");
}

} // namespace detail

// TF(X) = g_m . Attn_m . ... . g_1 . Attn_1 . g_0(X). Every g_i stage is
// accounted as one abstract d_g stage regardless of its instantiation.
inline FpMatrix transformer_forward(const FpMatrix& x, const TransformerModel& model,
                                    Tracer* tracer = nullptr,
                                    const std::optional<FpNum>& ln_epsilon = std::nullopt,
                                    int threads = 1)
{
  model.config.validate();
  if (x.rows() != model.config.n || x.cols() != model.config.d)
    throw domain_error(errc::shape_mismatch, "transformer_forward: input shape");

  const FpMatrix* g0w = nullptr;
  const FpMatrix* g0b = nullptr;
  if (model.g0_mlp) {
    g0w = &model.g0_mlp->first;
    g0b = &model.g0_mlp->second;
  }
  FpMatrix y = detail::apply_g(x, model.g0_kind, g0w, g0b, tracer, ln_epsilon,
                               threads);
  for (const LayerWeights& w : model.layers) {
    y = attention_layer(y, w, model.config, tracer, threads);
    y = detail::apply_g(y, w.g_kind, &w.mlp_W, &w.mlp_b, tracer, ln_epsilon,
                        threads);
  }
  return y;
}

} // namespace ropetc
