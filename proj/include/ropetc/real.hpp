#pragma once

// Internal extended-precision helpers for the transcendental operations:
// certified dyadic intervals for pi and ln 2, exact integer-scaled Taylor
// sums, and exact floor/isqrt utilities. Everything here is deterministic;
// interval widths are tracked so callers can refine until a decision
// (a floor, a comparison) is unambiguous.

#include <map>
#include <mutex>
#include <utility>

#include "ropetc/float.hpp"

namespace ropetc::detail {

struct IntInterval {
  Int lo, hi; // value * 2^scale lies in [lo, hi]
};

// floor(num/den) for den > 0 and num of any sign.
inline Int rational_floor(const Int& num, const Int& den)
{
  Int q, r;
  divide_qr(num, den, q, r);
  if (r != 0 && num < 0) --q;
  return q;
}

// atan(1/x) * 2^scale as a certified interval (x >= 2).
inline IntInterval atan_inv_scaled(std::int64_t x, std::int64_t scale)
{
  Int acc = 0;
  Int xpow = x; // x^(2i+1)
  const Int x2 = Int(x) * x;
  Int unit = Int(1) << static_cast<unsigned>(scale);
  std::int64_t i = 0;
  for (;; ++i) {
    Int term = unit / (Int(2 * i + 1) * xpow);
    if (term == 0) break;
    if (i % 2 == 0)
      acc += term;
    else
      acc -= term;
    xpow *= x2;
  }
  // each floored term is off by < 1 and the alternating tail is < 1 ulp
  Int slack = Int(i + 2);
  return {acc - slack, acc + slack};
}

// pi * 2^scale via Machin's formula, cached per scale.
inline IntInterval pi_scaled(std::int64_t scale)
{
  static std::mutex mu;
  static std::map<std::int64_t, IntInterval> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(scale);
    if (it != cache.end()) return it->second;
  }
  const std::int64_t work = scale + 16;
  IntInterval a5 = atan_inv_scaled(5, work);
  IntInterval a239 = atan_inv_scaled(239, work);
  Int lo = 16 * a5.lo - 4 * a239.hi;
  Int hi = 16 * a5.hi - 4 * a239.lo;
  IntInterval out{lo >> 16, (hi >> 16) + 1};
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(scale, out);
  return out;
}

// ln(2) * 2^scale via 2*atanh(1/3), cached per scale.
inline IntInterval ln2_scaled(std::int64_t scale)
{
  static std::mutex mu;
  static std::map<std::int64_t, IntInterval> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(scale);
    if (it != cache.end()) return it->second;
  }
  const std::int64_t work = scale + 16;
  Int unit = Int(1) << static_cast<unsigned>(work);
  Int acc = 0;
  Int pow3 = 3;
  std::int64_t i = 0;
  for (;; ++i) {
    Int term = unit / (Int(2 * i + 1) * pow3);
    if (term == 0) break;
    acc += term;
    pow3 *= 9;
  }
  acc <<= 1;
  Int slack = Int(2 * (i + 2));
  IntInterval out{(acc - slack) >> 16, ((acc + slack) >> 16) + 1};
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(scale, out);
  return out;
}

// ln(c) * 2^scale for rational c in [1, 2), via atanh((c-1)/(c+1));
// the series partial sums are exact rationals, the tail bound is explicit.
inline IntInterval ln_unit_scaled(const Rational& c, std::int64_t scale)
{
  Rational z = (c - 1) / (c + 1); // in [0, 1/3)
  if (z == 0) return {Int(0), Int(0)};
  Rational z2 = z * z;
  Rational sum = 0;
  Rational zp = z;
  Rational tail_eps(Int(1), detail::pow2(scale + 6));
  long long i = 0;
  for (;;) {
    sum += zp / (2 * i + 1);
    zp *= z2;
    Rational bound = zp * Rational(9, 8); // sum of the remaining terms
    if (bound < tail_eps) break;
    ++i;
  }
  sum *= 2;
  Rational upper = sum + Rational(9, 4) * zp;
  Int unit = Int(1) << static_cast<unsigned>(scale);
  Int lo = rational_floor(numerator(sum) * unit, denominator(sum));
  Int hi = rational_floor(numerator(upper) * unit, denominator(upper)) + 1;
  return {lo, hi};
}

// ln(b) * 2^scale for rational b > 0.
inline IntInterval ln_pos_scaled(Rational b, std::int64_t scale)
{
  if (b <= 0)
    throw domain_error(errc::negative_input, "ln of non-positive value");
  std::int64_t k = 0;
  while (b >= 2) {
    b /= 2;
    ++k;
  }
  while (b < 1) {
    b *= 2;
    --k;
  }
  IntInterval unit = ln_unit_scaled(b, scale);
  if (k == 0) return unit;
  IntInterval l2 = ln2_scaled(scale);
  if (k > 0) return {unit.lo + k * l2.lo, unit.hi + k * l2.hi};
  return {unit.lo + k * l2.hi, unit.hi + k * l2.lo};
}

// Exact sum_{i=0}^{N} (R/2^s)^i / i! as a (num, den) pair.
inline std::pair<Int, Int> exp_series(const Int& r_scaled, std::int64_t s,
                                      int terms)
{
  check_shift(s * (terms + 1));
  std::vector<Int> fall(terms + 1); // fall[i] = N!/i!
  fall[terms] = 1;
  for (int i = terms - 1; i >= 0; --i) fall[i] = fall[i + 1] * (i + 1);
  Int num = 0;
  Int pw = 1;
  for (int i = 0; i <= terms; ++i) {
    num += pw * fall[i] * (Int(1) << static_cast<unsigned>(s * (terms - i)));
    pw *= r_scaled;
  }
  Int den = fall[0] << static_cast<unsigned>(s * terms);
  return {std::move(num), std::move(den)};
}

// Exact sum_{i=0}^{N-1} (-1)^i (R/2^s)^(2i+1) / (2i+1)!.
inline std::pair<Int, Int> sin_series(const Int& r_scaled, std::int64_t s,
                                      int terms)
{
  const int top = 2 * terms - 1;
  check_shift(s * (top + 1));
  std::vector<Int> fall(top + 1);
  fall[top] = 1;
  for (int i = top - 1; i >= 0; --i) fall[i] = fall[i + 1] * (i + 1);
  Int num = 0;
  Int pw = r_scaled;
  const Int r2 = r_scaled * r_scaled;
  for (int i = 0; i < terms; ++i) {
    const int k = 2 * i + 1;
    Int t = pw * fall[k] * (Int(1) << static_cast<unsigned>(s * (top - k)));
    if (i % 2 == 0)
      num += t;
    else
      num -= t;
    pw *= r2;
  }
  Int den = fall[0] << static_cast<unsigned>(s * top);
  return {std::move(num), std::move(den)};
}

// Exact sum_{i=0}^{N-1} (-1)^i (R/2^s)^(2i) / (2i)!.
inline std::pair<Int, Int> cos_series(const Int& r_scaled, std::int64_t s,
                                      int terms)
{
  const int top = 2 * terms - 2;
  check_shift(s * (top + 1));
  std::vector<Int> fall(top + 1);
  fall[top] = 1;
  for (int i = top - 1; i >= 0; --i) fall[i] = fall[i + 1] * (i + 1);
  Int num = 0;
  Int pw = 1;
  const Int r2 = r_scaled * r_scaled;
  for (int i = 0; i < terms; ++i) {
    const int k = 2 * i;
    Int t = pw * fall[k] * (Int(1) << static_cast<unsigned>(s * (top - k)));
    if (i % 2 == 0)
      num += t;
    else
      num -= t;
    pw *= r2;
  }
  Int den = fall[0] << static_cast<unsigned>(s * top);
  return {std::move(num), std::move(den)};
}

// true iff |x| >= 2^t.
inline bool magnitude_ge_pow2(const FpNum& x, std::int64_t t)
{
  if (x.is_zero()) return false;
  Int a = abs(x.significand());
  return static_cast<std::int64_t>(msb(a)) + x.exponent() >= t;
}

} // namespace ropetc::detail
