#pragma once

// Definitional oracle for the p-bit float operations, written directly from
// the formulas in exact rational arithmetic. Shares no code with the library
// implementation: rounding normalizes by scaling loops over rationals and
// every operation is the quoted case split evaluated over cpp_rational.

#include <optional>
#include <vector>

#include "ropetc/float.hpp"

namespace fporacle {

using ropetc::FpNum;
using ropetc::Int;
using ropetc::Rational;

struct Overflow {};

// Either a value or an exponent-range failure.
struct Outcome {
  std::optional<FpNum> value; // empty = overflow
  bool overflow() const { return !value.has_value(); }
  friend bool operator==(const Outcome& a, const Outcome& b)
  {
    if (a.overflow() || b.overflow()) return a.overflow() == b.overflow();
    return *a.value == *b.value;
  }
};

inline Rational ds(const Int& a, const Int& b)
{
  Rational q = b > 0 ? Rational(a, b) : Rational(Int(-a), Int(-b));
  Rational quarter(1, 4);
  Rational scaled = q / quarter;
  if (denominator(scaled) == 1) return q;
  return q + Rational(1, 8);
}

inline Rational pow2r(long long e)
{
  Rational r(1);
  for (long long i = 0; i < (e >= 0 ? e : -e); ++i) {
    if (e >= 0)
      r *= 2;
    else
      r /= 2;
  }
  return r;
}

// Nearest p-bit float, ties to even significand, by scanning for the
// normalized scale and comparing the two bracketing candidates exactly.
inline Outcome round_p(const Rational& x, int p)
{
  if (x == 0) return {FpNum::zero(p)};
  Rational mag = x < 0 ? Rational(-x) : x;
  Rational lo = pow2r(p - 1), hi = pow2r(p);
  long long e = 0;
  Rational s = mag;
  while (s >= hi) {
    s /= 2;
    ++e;
  }
  while (s < lo) {
    s *= 2;
    --e;
  }
  const long long emax = 1LL << p;
  Rational scale = pow2r(e);

  if (e < -emax) {
    // nearest of zero and the smallest normalized magnitude
    Rational min_mag = lo * pow2r(-emax);
    Rational d0 = mag, d1 = min_mag - mag;
    if (d1 < 0) d1 = -d1;
    if (d0 < d1) return {FpNum::zero(p)};
    if (d1 < d0) {
      FpNum m = FpNum::min_positive(p);
      return {x < 0 ? m.negated() : m};
    }
    return {FpNum::zero(p)}; // halfway: both significands even, take zero
  }

  Int fl = numerator(s) / denominator(s);
  Int candidates[2] = {fl, fl + 1};
  Rational best_diff(-1);
  Int best_m;
  long long best_e = e;
  for (const Int& c : candidates) {
    Int m = c;
    long long ce = e;
    if (m == Int(1) << static_cast<unsigned>(p)) {
      m >>= 1;
      ++ce;
    }
    Rational cand_val = Rational(m) * (ce == e ? scale : scale * 2);
    Rational diff = mag - cand_val;
    if (diff < 0) diff = -diff;
    if (best_diff < 0 || diff < best_diff ||
        (diff == best_diff && m % 2 == 0)) {
      best_diff = diff;
      best_m = m;
      best_e = ce;
    }
  }
  if (best_e >= emax) return {std::nullopt};
  if (x < 0) best_m = -best_m;
  return {FpNum(best_m, best_e, p)};
}

// Zero's exponent is unconstrained by the float definition; the agreed
// reading puts a zero operand at the minimal exponent -2^p, which lands it
// in the ds slot of every case split with a ds term of exactly 0.
inline Outcome fp_add(const FpNum& a, const FpNum& b)
{
  const int p = a.precision();
  if (b.is_zero())
    return round_p(Rational(a.significand()) * pow2r(a.exponent()), p);
  if (a.is_zero())
    return round_p(Rational(b.significand()) * pow2r(b.exponent()), p);
  Rational pre;
  if (a.exponent() >= b.exponent()) {
    Rational sig = Rational(a.significand()) +
                   ds(b.significand(), numerator(pow2r(a.exponent() - b.exponent())));
    pre = sig * pow2r(a.exponent());
  } else {
    Rational sig = ds(a.significand(), numerator(pow2r(b.exponent() - a.exponent()))) +
                   Rational(b.significand());
    pre = sig * pow2r(b.exponent());
  }
  return round_p(pre, p);
}

inline Outcome fp_mul(const FpNum& a, const FpNum& b)
{
  Rational pre = Rational(a.significand() * b.significand()) *
                 pow2r(a.exponent() + b.exponent());
  return round_p(pre, a.precision());
}

inline Outcome fp_div(const FpNum& a, const FpNum& b)
{
  const int p = a.precision();
  Rational pre = ds(a.significand() * numerator(pow2r(p - 1)), b.significand()) *
                 pow2r(a.exponent() - b.exponent() - p + 1);
  return round_p(pre, p);
}

inline bool fp_leq(const FpNum& a, const FpNum& b)
{
  if (a.is_zero()) return Rational(0) <= Rational(b.significand());
  if (b.is_zero()) return Rational(a.significand()) <= Rational(0);
  if (a.exponent() >= b.exponent())
    return Rational(a.significand()) <=
           ds(b.significand(), numerator(pow2r(a.exponent() - b.exponent())));
  return ds(a.significand(), numerator(pow2r(b.exponent() - a.exponent()))) <=
         Rational(b.significand());
}

inline Outcome fp_floor(const FpNum& a)
{
  if (a.exponent() >= 0) return {a};
  Rational v = Rational(a.significand()) * pow2r(a.exponent());
  Int fl = numerator(v) / denominator(v);
  if (v < 0 && Rational(fl) != v) fl -= 1;
  return round_p(Rational(fl), a.precision());
}

inline Outcome fp_iter_add(const std::vector<FpNum>& xs)
{
  Rational sum(0);
  for (const FpNum& x : xs)
    sum += Rational(x.significand()) * pow2r(x.exponent());
  return round_p(sum, xs.front().precision());
}

inline Outcome fp_iter_mul(const std::vector<FpNum>& xs)
{
  Rational prod(1);
  for (const FpNum& x : xs)
    prod *= Rational(x.significand()) * pow2r(x.exponent());
  return round_p(prod, xs.front().precision());
}

// Runs an implementation call mapping ExponentOverflow to the overflow
// outcome so impl and oracle can be compared case by case.
template <typename F>
Outcome run_impl(F&& f)
{
  try {
    return {f()};
  } catch (const ropetc::domain_error& e) {
    if (e.kind() == ropetc::errc::exponent_overflow) return {std::nullopt};
    throw;
  }
}

} // namespace fporacle
