#pragma once

// High-precision real-function oracle for the transcendental tests.
// Fixed-point arithmetic at K bits over cpp_int, structurally independent
// of the library implementation: pi comes from 4*(atan(1/2)+atan(1/3)),
// trig reduction rounds to the nearest quadrant instead of flooring, and
// series are evaluated by term recurrences with floor division.

#include <cstdint>

#include "ropetc/float.hpp"

namespace realoracle {

using ropetc::Int;
using ropetc::Rational;

inline Int pow2i(std::int64_t k)
{
  return Int(1) << static_cast<unsigned>(k);
}

inline Int atan_inv(std::int64_t x, std::int64_t K)
{
  Int acc = 0;
  Int xp = x;
  Int unit = pow2i(K);
  for (std::int64_t i = 0;; ++i) {
    Int t = unit / ((2 * i + 1) * xp);
    if (t == 0) break;
    acc += (i % 2 == 0) ? t : -t;
    xp *= x * x;
  }
  return acc;
}

inline Int pi_fx(std::int64_t K)
{
  return 4 * (atan_inv(2, K + 8) + atan_inv(3, K + 8)) >> 8;
}

inline Rational to_rational(const Int& v, std::int64_t K)
{
  return Rational(v, pow2i(K));
}

inline Int exp_fx(const Rational& x, std::int64_t K)
{
  const Int xn = numerator(x);
  const Int xd = denominator(x);
  Int term = pow2i(K);
  Int acc = term;
  for (std::int64_t i = 1;; ++i) {
    term = term * xn / (xd * i);
    if (term == 0) break;
    acc += term;
  }
  return acc;
}

struct TrigReduced {
  Int q;    // nearest integer to x / (pi/2)
  Int r_fx; // (x - q pi/2) * 2^K, |r| <= pi/4 + eps
};

inline TrigReduced trig_reduce(const Rational& x, std::int64_t K)
{
  Int pi = pi_fx(K);
  Int num = 2 * numerator(x) * pow2i(K);
  Int den = denominator(x) * pi;
  // round-to-nearest via floor((2a + b) / 2b)
  Int q, rr;
  divide_qr(2 * num + den, 2 * den, q, rr);
  if (rr != 0 && (2 * num + den) < 0) --q;
  Int xfx_q, xfx_r;
  divide_qr(numerator(x) * pow2i(K), denominator(x), xfx_q, xfx_r);
  if (xfx_r != 0 && numerator(x) < 0) --xfx_q;
  Int r = xfx_q - q * pi / 2;
  return {std::move(q), std::move(r)};
}

inline Int sin_series_fx(const Int& r, std::int64_t K)
{
  Int term = r;
  Int acc = term;
  const Int r2 = r * r;
  const Int sc = pow2i(2 * K);
  for (std::int64_t i = 1;; ++i) {
    term = -term * r2 / (sc * (2 * i) * (2 * i + 1));
    if (term == 0) break;
    acc += term;
  }
  return acc;
}

inline Int cos_series_fx(const Int& r, std::int64_t K)
{
  Int term = pow2i(K);
  Int acc = term;
  const Int r2 = r * r;
  const Int sc = pow2i(2 * K);
  for (std::int64_t i = 1;; ++i) {
    term = -term * r2 / (sc * (2 * i - 1) * (2 * i));
    if (term == 0) break;
    acc += term;
  }
  return acc;
}

inline Int sin_fx(const Rational& x, std::int64_t K)
{
  TrigReduced t = trig_reduce(x, K);
  int j = static_cast<int>((t.q % 4 + 4) % 4);
  switch (j) {
    case 0: return sin_series_fx(t.r_fx, K);
    case 1: return cos_series_fx(t.r_fx, K);
    case 2: return -sin_series_fx(t.r_fx, K);
    default: return -cos_series_fx(t.r_fx, K);
  }
}

inline Int cos_fx(const Rational& x, std::int64_t K)
{
  TrigReduced t = trig_reduce(x, K);
  int j = static_cast<int>((t.q % 4 + 4) % 4);
  switch (j) {
    case 0: return cos_series_fx(t.r_fx, K);
    case 1: return -sin_series_fx(t.r_fx, K);
    case 2: return -cos_series_fx(t.r_fx, K);
    default: return sin_series_fx(t.r_fx, K);
  }
}

inline Int sqrt_fx(const Rational& x, std::int64_t K)
{
  Int scaled = numerator(x) * pow2i(2 * K) / denominator(x);
  return sqrt(scaled);
}

// floor(x / (pi/2)) with a stability check; doubles K until the floor is
// certain. Used to validate the library's range reduction.
inline Int floor_half_pi_quotient(const Rational& x, std::int64_t K0 = 256)
{
  for (std::int64_t K = K0;; K *= 2) {
    Int pi = pi_fx(K);
    Int num = 2 * numerator(x) * pow2i(K);
    Int den = denominator(x) * pi;
    // covers the quotient uncertainty from pi_fx's ~2^(-K+12) relative error
    Int slack = (abs(num) >> static_cast<unsigned>(K - 16)) + 1;
    auto fl = [&](const Int& n) {
      Int q, r;
      divide_qr(n, den, q, r);
      if (r != 0 && n < 0) --q;
      return q;
    };
    if (fl(num - slack) == fl(num + slack)) return fl(num);
    if (K > (std::int64_t(1) << 22))
      throw std::runtime_error("floor_half_pi_quotient did not stabilize");
  }
}

// |value/reference - 1| <= 2^-bits, with reference given at scale K.
inline bool rel_close(const Rational& value, const Int& ref_fx, std::int64_t K,
                      int bits)
{
  Rational ref = to_rational(ref_fx, K);
  if (ref == 0) return value == 0;
  Rational rel = (value - ref) / ref;
  if (rel < 0) rel = -rel;
  return rel <= Rational(1, pow2i(bits));
}

} // namespace realoracle
