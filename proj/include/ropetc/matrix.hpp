#pragma once

// Dense row-major matrices of FpNum with the iterated-addition matmul
// semantics: inner products multiply entrywise (one rounding each), then
// sum exactly with a single final rounding.

#include <sstream>
#include <string>
#include <vector>

#include "ropetc/depth.hpp"
#include "ropetc/float.hpp"
#include "ropetc/parallel.hpp"
#include "ropetc/transcendental.hpp"

namespace ropetc {

class FpMatrix {
public:
  FpMatrix() : rows_(0), cols_(0), prec_(2) {}

  FpMatrix(std::size_t rows, std::size_t cols, int precision)
      : rows_(rows), cols_(cols), prec_(precision),
        entries_(rows * cols, FpNum::zero(precision))
  {
    if (rows == 0 || cols == 0)
      throw domain_error(errc::shape_mismatch, "matrix dimensions must be positive");
  }

  static FpMatrix identity(std::size_t n, int precision)
  {
    FpMatrix m(n, n, precision);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = FpNum::one(precision);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int precision() const { return prec_; }

  FpNum& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const FpNum& at(std::size_t r, std::size_t c) const
  {
    return entries_[r * cols_ + c];
  }

  const std::vector<FpNum>& entries() const { return entries_; }

  void set(std::size_t r, std::size_t c, FpNum v)
  {
    if (v.precision() != prec_)
      throw domain_error(errc::precision_mismatch,
                         "matrix entries must share the matrix precision");
    entries_[r * cols_ + c] = std::move(v);
  }

  FpMatrix transposed() const
  {
    FpMatrix t(cols_, rows_, prec_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
    return t;
  }

  FpMatrix row(std::size_t r) const
  {
    FpMatrix out(1, cols_, prec_);
    for (std::size_t c = 0; c < cols_; ++c) out.at(0, c) = at(r, c);
    return out;
  }

  friend bool operator==(const FpMatrix& a, const FpMatrix& b)
  {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.prec_ == b.prec_ &&
           a.entries_ == b.entries_;
  }
  friend bool operator!=(const FpMatrix& a, const FpMatrix& b)
  {
    return !(a == b);
  }

  // Text format: header "rows cols p", then row-major FpNum tokens.
  std::string str() const
  {
    std::string out = std::to_string(rows_) + " " + std::to_string(cols_) +
                      " " + std::to_string(prec_) + "\n";
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        if (c) out += ' ';
        out += at(r, c).str();
      }
      out += '\n';
    }
    return out;
  }

  static FpMatrix parse(std::istream& in)
  {
    long long rows = 0, cols = 0;
    int p = 0;
    if (!(in >> rows >> cols >> p))
      throw domain_error(errc::format_error, "matrix header: expected 'rows cols p'");
    if (rows <= 0 || cols <= 0)
      throw domain_error(errc::format_error, "matrix header: non-positive shape");
    FpMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), p);
    for (long long r = 0; r < rows; ++r)
      for (long long c = 0; c < cols; ++c) {
        std::string tok;
        if (!(in >> tok))
          throw domain_error(errc::format_error, "matrix body: missing entries");
        FpNum v = FpNum::parse(tok);
        if (v.precision() != p)
          throw domain_error(errc::format_error,
                             "matrix entry precision differs from header");
        m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = std::move(v);
      }
    return m;
  }

  static FpMatrix parse(const std::string& text)
  {
    std::istringstream in(text);
    return parse(in);
  }

private:
  std::size_t rows_, cols_;
  int prec_;
  std::vector<FpNum> entries_;
};

// (AB)_{i,j} = round_p(sum_k value(fp_mul(A_ik, B_kj))): entrywise products
// round once each, the sum rounds once at the end (iterated addition).
inline FpMatrix matmul(const FpMatrix& a, const FpMatrix& b,
                       Tracer* tracer = nullptr, int threads = 1)
{
  if (a.cols() != b.rows())
    throw domain_error(errc::shape_mismatch,
                       "matmul: " + std::to_string(a.cols()) + " vs " +
                           std::to_string(b.rows()));
  if (a.precision() != b.precision())
    throw domain_error(errc::precision_mismatch, "matmul: mixed precisions");
  const std::size_t n1 = a.rows(), n2 = b.cols(), k = a.cols();
  trace_stage(tracer, PrimKind::mul, n1 * n2 * k, "matmul: entry products");
  trace_stage(tracer, PrimKind::iter_add, n1 * n2, "matmul: iterated sums");
  FpMatrix out(n1, n2, a.precision());
  parallel_for(n1, tracer ? 1 : threads, [&](std::size_t i) {
    std::vector<FpNum> terms(k, FpNum::zero(a.precision()));
    for (std::size_t j = 0; j < n2; ++j) {
      for (std::size_t t = 0; t < k; ++t) terms[t] = fp_mul(a.at(i, t), b.at(t, j));
      out.at(i, j) = fp_iter_add(terms);
    }
  });
  return out;
}

// Softmax of a single row: exp(z) / <exp(z), 1_n>, every division by the
// iterated sum of the exponentials.
inline FpMatrix softmax_row(const FpMatrix& z, Tracer* tracer = nullptr)
{
  if (z.rows() != 1)
    throw domain_error(errc::shape_mismatch, "softmax_row expects a 1xn row");
  const std::size_t n = z.cols();
  trace_stage(tracer, PrimKind::exp_op, n, "softmax: exponentials");
  std::vector<FpNum> exps;
  exps.reserve(n);
  for (std::size_t j = 0; j < n; ++j) exps.push_back(fp_exp(z.at(0, j)));
  trace_stage(tracer, PrimKind::iter_add, 1, "softmax: denominator");
  FpNum denom = fp_iter_add(exps);
  trace_stage(tracer, PrimKind::div, n, "softmax: normalize");
  FpMatrix out(1, n, z.precision());
  for (std::size_t j = 0; j < n; ++j) out.at(0, j) = fp_div(exps[j], denom);
  return out;
}

// D := diag(A 1_n); returns D^-1 M, i.e. row i of M divided entrywise by
// the iterated sum of row i of A.
inline FpMatrix row_sums_diag_inverse_apply(const FpMatrix& a, const FpMatrix& m,
                                            Tracer* tracer = nullptr,
                                            int threads = 1)
{
  if (a.rows() != a.cols() || a.rows() != m.rows())
    throw domain_error(errc::shape_mismatch,
                       "row_sums_diag_inverse_apply: shape mismatch");
  if (a.precision() != m.precision())
    throw domain_error(errc::precision_mismatch, "mixed precisions");
  const std::size_t n = a.rows(), d = m.cols();
  trace_stage(tracer, PrimKind::iter_add, n, "diag: row sums");
  std::vector<FpNum> sums(n, FpNum::zero(a.precision()));
  std::vector<FpNum> rowbuf(n, FpNum::zero(a.precision()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rowbuf[j] = a.at(i, j);
    sums[i] = fp_iter_add(rowbuf);
    if (sums[i].is_zero())
      throw domain_error(errc::zero_row_sum,
                         "row " + std::to_string(i) + " of A sums to zero");
  }
  trace_stage(tracer, PrimKind::div, n * d, "diag: divide rows");
  FpMatrix out(n, d, m.precision());
  parallel_for(n, tracer ? 1 : threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = fp_div(m.at(i, j), sums[i]);
  });
  return out;
}

} // namespace ropetc
