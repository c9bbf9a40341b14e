#pragma once

// exp, sqrt, sin, cos over FpNum with relative error <= 2^-p, built from
// extended-precision range reduction and exact-rational truncated series.
// sqrt is correctly rounded (candidates are verified by exact squaring);
// the others keep the pre-rounding error far below the half-ulp slack so a
// single nearest rounding lands within the 2^-p contract.

#include <cstdint>
#include <utility>

#include "ropetc/float.hpp"
#include "ropetc/real.hpp"

namespace ropetc {

// Trig range reduction: k = floor(x / (pi/2)), reduced argument r in
// [0, pi/4] (case 1: r = x - k pi/2; case 2: r = (k+1) pi/2 - x), plus the
// quadrant flags for reconstructing sin(x) = sign * (use_cos ? cos r : sin r).
struct RangeReduction {
  Int k;
  FpNum r;          // reduced argument at extended internal precision
  bool use_cos;
  int sign;         // +1 or -1
  bool second_case; // which branch of the r definition applied
};

namespace detail {

struct Reduced {
  Int k;
  bool second_case;
  Int r_scaled; // r * 2^scale (may be a hair negative when r is ~0)
  std::int64_t scale;
};

// Exact k = floor(x / (pi/2)) and the case split, by interval refinement;
// terminates because x is rational and the compared boundaries are
// irrational multiples of pi.
inline Reduced reduce_angle(const FpNum& x, std::int64_t bits)
{
  Int k;
  if (!magnitude_ge_pow2(x, -1)) {
    // |x| < 1/2 < pi/4: the quotient is in (-0.32, 0.32)
    k = x.sign() < 0 ? -1 : 0;
  } else {
    for (std::int64_t b = bits;; b *= 2) {
      check_shift(b);
      IntInterval pi = pi_scaled(b);
      // 2x * 2^b as an exact integer (|x| >= 1/2 so the shift is nonneg)
      Int x2b = x.significand();
      std::int64_t sh = x.exponent() + b + 1;
      check_shift(sh >= 0 ? sh : -sh);
      if (sh >= 0)
        x2b <<= static_cast<unsigned>(sh);
      else
        x2b >>= static_cast<unsigned>(-sh); // cannot happen for b >= p+2
      Int k_lo = rational_floor(x2b, x.sign() > 0 ? pi.hi : pi.lo);
      Int k_hi = rational_floor(x2b, x.sign() > 0 ? pi.lo : pi.hi);
      if (k_lo == k_hi) {
        k = k_lo;
        break;
      }
    }
  }

  // case split: x - k pi/2 <= pi/4  <=>  4x <= (2k+1) pi
  bool second = false;
  for (std::int64_t b = bits;; b *= 2) {
    check_shift(b);
    IntInterval pi = pi_scaled(b);
    std::int64_t sh = x.exponent() + b + 2;
    check_shift(sh >= 0 ? sh : -sh);
    Int x4b = x.significand();
    if (sh >= 0)
      x4b <<= static_cast<unsigned>(sh);
    else
      x4b >>= static_cast<unsigned>(-sh);
    Int c = 2 * k + 1;
    Int rhs_lo = c >= 0 ? c * pi.lo : c * pi.hi;
    Int rhs_hi = c >= 0 ? c * pi.hi : c * pi.lo;
    if (x4b <= rhs_lo) {
      second = false;
      break;
    }
    if (x4b > rhs_hi) {
      second = true;
      break;
    }
  }

  IntInterval pi = pi_scaled(bits);
  Int pi_mid = (pi.lo + pi.hi) >> 1;
  std::int64_t sh = x.exponent() + bits;
  check_shift(sh >= 0 ? sh : -sh);
  Int xb = x.significand();
  if (sh >= 0)
    xb <<= static_cast<unsigned>(sh);
  else
    xb >>= static_cast<unsigned>(-sh);
  Int r;
  if (second)
    r = ((k + 1) * pi_mid) / 2 - xb;
  else
    r = xb - (k * pi_mid) / 2;
  return {std::move(k), second, std::move(r), bits};
}

inline std::int64_t trig_bits(const FpNum& x)
{
  std::int64_t mag = 0;
  if (!x.is_zero())
    mag = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(msb(abs(x.significand()))) + x.exponent());
  return 8 * x.precision() + 128 + mag;
}

// quadrant tables for sin(x)/cos(x) in terms of (k mod 4, case)
inline std::pair<bool, int> sin_flags(const Int& k, bool second)
{
  int j = static_cast<int>(((second ? k + 1 : k) % 4 + 4) % 4);
  if (!second) {
    switch (j) {
      case 0: return {false, +1};
      case 1: return {true, +1};
      case 2: return {false, -1};
      default: return {true, -1};
    }
  }
  switch (j) {
    case 0: return {false, -1};
    case 1: return {true, +1};
    case 2: return {false, +1};
    default: return {true, -1};
  }
}

inline std::pair<bool, int> cos_flags(const Int& k, bool second)
{
  int j = static_cast<int>(((second ? k + 1 : k) % 4 + 4) % 4);
  if (!second) {
    switch (j) {
      case 0: return {true, +1};
      case 1: return {false, -1};
      case 2: return {true, -1};
      default: return {false, +1};
    }
  }
  switch (j) {
    case 0: return {true, +1};
    case 1: return {false, +1};
    case 2: return {true, -1};
    default: return {false, -1};
  }
}

inline FpNum eval_reduced(const Reduced& red, bool use_cos, int sign, int p)
{
  const int terms = p + 4;
  auto [num, den] = use_cos ? cos_series(red.r_scaled, red.scale, terms)
                            : sin_series(red.r_scaled, red.scale, terms);
  if (sign < 0) num = -num;
  return round_scaled(std::move(num), std::move(den), 0, p);
}

} // namespace detail

inline void check_trig_argument(const FpNum& x)
{
  if (x.is_zero()) return;
  // |x| <= 2^(2p) is required for exact range reduction
  Int a = abs(x.significand());
  std::int64_t top = static_cast<std::int64_t>(msb(a)) + x.exponent();
  std::int64_t limit = 2 * x.precision();
  if (top > limit || (top == limit && a != Int(1) << static_cast<unsigned>(msb(a))))
    throw domain_error(errc::argument_too_large,
                       "trig argument magnitude exceeds 2^(2p)");
}

inline RangeReduction range_reduce(const FpNum& x)
{
  check_trig_argument(x);
  const int p = x.precision();
  if (x.is_zero())
    return {Int(0), FpNum::zero(std::min(2 * p + 16, 60)), false, +1, false};
  detail::Reduced red = detail::reduce_angle(x, detail::trig_bits(x));
  auto [use_cos, sign] = detail::sin_flags(red.k, red.second_case);
  const int pr = std::min(2 * p + 16, 60);
  Int r_num = red.r_scaled < 0 ? Int(0) : red.r_scaled;
  FpNum r = r_num == 0 ? FpNum::zero(pr)
                       : round_scaled(std::move(r_num), Int(1), -red.scale, pr);
  return {std::move(red.k), std::move(r), use_cos, sign, red.second_case};
}

inline FpNum fp_sin(const FpNum& x)
{
  check_trig_argument(x);
  const int p = x.precision();
  if (x.is_zero()) return FpNum::zero(p);
  detail::Reduced red = detail::reduce_angle(x, detail::trig_bits(x));
  auto [use_cos, sign] = detail::sin_flags(red.k, red.second_case);
  return detail::eval_reduced(red, use_cos, sign, p);
}

inline FpNum fp_cos(const FpNum& x)
{
  check_trig_argument(x);
  const int p = x.precision();
  if (x.is_zero()) return FpNum::one(p);
  detail::Reduced red = detail::reduce_angle(x, detail::trig_bits(x));
  auto [use_cos, sign] = detail::cos_flags(red.k, red.second_case);
  return detail::eval_reduced(red, use_cos, sign, p);
}

inline FpNum fp_exp(const FpNum& x)
{
  const int p = x.precision();
  if (x.is_zero()) return FpNum::one(p);
  if (x.sign() > 0 && detail::magnitude_ge_pow2(x, p))
    throw domain_error(errc::exponent_overflow, "exp overflows at p=" +
                                                    std::to_string(p));
  if (x.sign() < 0 && detail::magnitude_ge_pow2(x, p))
    return FpNum::min_positive(p); // far below the smallest float: clamp

  const std::int64_t bits = 3 * p + 80;
  Int k;
  if (!detail::magnitude_ge_pow2(x, -1)) {
    k = x.sign() < 0 ? -1 : 0; // |x/ln2| < 0.73
  } else {
    for (std::int64_t b = bits;; b *= 2) {
      detail::check_shift(b);
      detail::IntInterval l2 = detail::ln2_scaled(b);
      std::int64_t sh = x.exponent() + b;
      detail::check_shift(sh >= 0 ? sh : -sh);
      Int xb = x.significand();
      if (sh >= 0)
        xb <<= static_cast<unsigned>(sh);
      else
        xb >>= static_cast<unsigned>(-sh);
      Int k_lo = detail::rational_floor(xb, x.sign() > 0 ? l2.hi : l2.lo);
      Int k_hi = detail::rational_floor(xb, x.sign() > 0 ? l2.lo : l2.hi);
      if (k_lo == k_hi) {
        k = k_lo;
        break;
      }
    }
  }

  detail::IntInterval l2 = detail::ln2_scaled(bits);
  Int l2_mid = (l2.lo + l2.hi) >> 1;
  std::int64_t sh = x.exponent() + bits;
  detail::check_shift(sh >= 0 ? sh : -sh);
  Int xb = x.significand();
  if (sh >= 0)
    xb <<= static_cast<unsigned>(sh);
  else
    xb >>= static_cast<unsigned>(-sh);
  Int r = xb - k * l2_mid; // in [0, ln2) up to interval slack

  auto [num, den] = detail::exp_series(r, bits, p + 24);
  const std::int64_t k64 = static_cast<std::int64_t>(k);
  FpNum out = round_scaled(std::move(num), std::move(den), k64, p);
  if (out.is_zero()) return FpNum::min_positive(p); // strictly positive contract
  return out;
}

inline FpNum fp_sqrt(const FpNum& x)
{
  const int p = x.precision();
  if (x.sign() < 0)
    throw domain_error(errc::negative_input, "sqrt of negative value");
  if (x.is_zero()) return FpNum::zero(p);

  Int m = x.significand();
  std::int64_t e = x.exponent();
  if (e % 2 != 0) {
    m <<= 1;
    --e;
  }
  const std::int64_t guard = p + 8;
  Int scaled = m << static_cast<unsigned>(2 * guard);
  Int a = sqrt(scaled); // floor(sqrt(m) * 2^guard)
  FpNum cand = round_scaled(std::move(a), Int(1), e / 2 - guard, p);

  // verify against the exact value: correct rounding means
  // lower_midpoint^2 <= m*2^e <= upper_midpoint^2 (ties cannot occur)
  auto mid_sq_cmp = [&](const Int& mid_m, std::int64_t mid_e) {
    // compare (mid_m * 2^mid_e)^2 with m * 2^e
    Int lhs = mid_m * mid_m;
    Int rhs = m;
    std::int64_t diff = 2 * mid_e - e;
    detail::check_shift(diff >= 0 ? diff : -diff);
    if (diff >= 0)
      lhs <<= static_cast<unsigned>(diff);
    else
      rhs <<= static_cast<unsigned>(-diff);
    return lhs.compare(rhs);
  };
  auto next_up = [&](const FpNum& c) {
    Int mm = c.significand() + 1;
    std::int64_t ee = c.exponent();
    if (mm == Int(1) << static_cast<unsigned>(p)) {
      mm >>= 1;
      ++ee;
    }
    return FpNum(std::move(mm), ee, p);
  };
  auto next_down = [&](const FpNum& c) {
    Int mm = c.significand();
    std::int64_t ee = c.exponent();
    if (mm == Int(1) << static_cast<unsigned>(p - 1)) {
      mm = (Int(1) << static_cast<unsigned>(p)) - 1;
      --ee;
    } else {
      --mm;
    }
    return FpNum(std::move(mm), ee, p);
  };

  for (int iter = 0; iter < 4; ++iter) {
    // upper midpoint: (2m_c + 1) * 2^(e_c - 1)
    Int up_m = 2 * cand.significand() + 1;
    if (mid_sq_cmp(up_m, cand.exponent() - 1) < 0) {
      cand = next_up(cand);
      continue;
    }
    // lower midpoint: gap toward zero halves at the regime boundary
    Int lo_m;
    std::int64_t lo_e;
    if (cand.significand() == Int(1) << static_cast<unsigned>(p - 1)) {
      lo_m = 4 * cand.significand() - 1;
      lo_e = cand.exponent() - 2;
    } else {
      lo_m = 2 * cand.significand() - 1;
      lo_e = cand.exponent() - 1;
    }
    if (mid_sq_cmp(lo_m, lo_e) > 0) {
      cand = next_down(cand);
      continue;
    }
    return cand;
  }
  throw domain_error(errc::invalid_value, "sqrt verification did not settle");
}

} // namespace ropetc
