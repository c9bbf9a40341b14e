#pragma once

// p-bit floating point numbers: a pair <m, e> with significand
// m in (-2^p, -2^(p-1)] u {0} u [2^(p-1), 2^p) and exponent e in [-2^p, 2^p),
// together with the offset-division rounding model and the arithmetic
// operations built on it. All intermediates are exact (unbounded integers /
// rationals); rounding happens only where an operation's definition says.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ropetc/errors.hpp"

namespace ropetc {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational; // reduced, denominator > 0

namespace detail {

// Exact intermediates are capped at ~2M bits so a pathological exponent
// spread fails loudly instead of exhausting memory.
inline constexpr std::int64_t max_shift_bits = std::int64_t(1) << 21;

inline void check_shift(std::int64_t bits)
{
  if (bits < 0 || bits > max_shift_bits)
    throw domain_error(errc::exponent_overflow,
                       "exponent spread too large for exact intermediate");
}

inline Int pow2(std::int64_t k)
{
  check_shift(k);
  return Int(1) << static_cast<unsigned>(k);
}

// floor(log2(n/d)) for n, d > 0.
inline std::int64_t floor_log2(const Int& n, const Int& d)
{
  std::int64_t f = static_cast<std::int64_t>(msb(n)) -
                   static_cast<std::int64_t>(msb(d));
  // msb difference brackets the true value within one; fix by exact compare.
  auto ge_pow = [&](std::int64_t k) {
    if (k >= 0) return n >= (d << static_cast<unsigned>(k));
    return (n << static_cast<unsigned>(-k)) >= d;
  };
  if (!ge_pow(f)) --f;
  else if (ge_pow(f + 1)) ++f;
  return f;
}

} // namespace detail

class FpNum {
public:
  FpNum() : sig_(0), exp_(0), prec_(2) {}

  // Requires an already-normalized pair; use round_p to construct from
  // arbitrary values.
  FpNum(Int significand, std::int64_t exponent, int precision)
      : sig_(std::move(significand)), exp_(exponent), prec_(precision)
  {
    validate();
  }

  static FpNum zero(int precision)
  {
    check_precision(precision);
    return FpNum(Int(0), 0, precision, unchecked{});
  }

  static FpNum one(int precision)
  {
    check_precision(precision);
    return FpNum(Int(1) << static_cast<unsigned>(precision - 1),
                 -(precision - 1), precision, unchecked{});
  }

  static FpNum min_positive(int precision)
  {
    check_precision(precision);
    return FpNum(Int(1) << static_cast<unsigned>(precision - 1),
                 -(std::int64_t(1) << precision), precision, unchecked{});
  }

  const Int& significand() const noexcept { return sig_; }
  std::int64_t exponent() const noexcept { return exp_; }
  int precision() const noexcept { return prec_; }

  bool is_zero() const noexcept { return sig_ == 0; }
  int sign() const noexcept { return sig_.sign(); }

  FpNum negated() const
  {
    return FpNum(-sig_, exp_, prec_, unchecked{});
  }

  // Exact value as a rational; only usable for moderate exponents.
  Rational value() const
  {
    if (sig_ == 0) return Rational(0);
    if (exp_ >= 0) return Rational(sig_ * detail::pow2(exp_));
    return Rational(sig_, detail::pow2(-exp_));
  }

  // Text encoding "m*2^e@p", exact and locale-free.
  std::string str() const
  {
    return sig_.str() + "*2^" + std::to_string(exp_) + "@" +
           std::to_string(prec_);
  }

  static FpNum parse(const std::string& text);

  friend bool operator==(const FpNum& a, const FpNum& b)
  {
    return a.prec_ == b.prec_ && a.exp_ == b.exp_ && a.sig_ == b.sig_;
  }
  friend bool operator!=(const FpNum& a, const FpNum& b) { return !(a == b); }

private:
  struct unchecked {};
  FpNum(Int s, std::int64_t e, int p, unchecked)
      : sig_(std::move(s)), exp_(e), prec_(p)
  {
  }

  static void check_precision(int p)
  {
    if (p < 2 || p > 60)
      throw domain_error(errc::precision_mismatch,
                         "precision must be in [2, 60], got " +
                             std::to_string(p));
  }

  void validate() const
  {
    check_precision(prec_);
    const std::int64_t emax = std::int64_t(1) << prec_;
    if (sig_ == 0) {
      if (exp_ != 0)
        throw domain_error(errc::invalid_value,
                           "zero must have exponent 0 (canonical zero)");
      return;
    }
    Int a = abs(sig_);
    Int lo = Int(1) << static_cast<unsigned>(prec_ - 1);
    Int hi = Int(1) << static_cast<unsigned>(prec_);
    if (a < lo || a >= hi)
      throw domain_error(errc::invalid_value,
                         "significand out of range: " + sig_.str());
    if (exp_ < -emax || exp_ >= emax)
      throw domain_error(errc::invalid_value,
                         "exponent out of range: " + std::to_string(exp_));
  }

  friend FpNum round_scaled(Int num, Int den, std::int64_t pow2_shift, int p);

  Int sig_;
  std::int64_t exp_;
  int prec_;
};

// Offset division: a/b when a/b is a multiple of 1/4, otherwise a/b + 1/8.
inline Rational ds(const Int& a, const Int& b)
{
  if (b == 0)
    throw domain_error(errc::division_by_zero, "ds: division by zero");
  Rational q = b > 0 ? Rational(a, b) : Rational(-a, -b);
  if (Int(4 * numerator(q)) % denominator(q) == 0) return q;
  return q + Rational(1, 8);
}

// Round (num/den)*2^pow2_shift to the nearest p-bit float, ties to the
// candidate with even significand. den > 0, num may be any sign.
inline FpNum round_scaled(Int num, Int den, std::int64_t pow2_shift, int p)
{
  if (p < 2 || p > 60)
    throw domain_error(errc::precision_mismatch,
                       "precision must be in [2, 60], got " + std::to_string(p));
  if (num == 0) return FpNum::zero(p);
  const int sign = num.sign();
  Int n = abs(num);
  const std::int64_t emax = std::int64_t(1) << p;

  const std::int64_t f = detail::floor_log2(n, den);
  // value magnitude is in [2^(f+pow2_shift), 2^(f+pow2_shift+1))
  __int128 e_wide = static_cast<__int128>(f) + pow2_shift - (p - 1);

  if (e_wide >= static_cast<__int128>(emax))
    throw domain_error(errc::exponent_overflow,
                       "rounding overflows the exponent range at p=" +
                           std::to_string(p));

  if (e_wide < -static_cast<__int128>(emax)) {
    // Below the smallest normalized magnitude: nearest of {0, +-min}.
    // Values more than a few bits under min/2 are settled without scaling.
    if (e_wide < -static_cast<__int128>(emax) - (p + 4)) return FpNum::zero(p);
    const std::int64_t t = pow2_shift + emax; // scale so min sits at 2^(p-1)
    detail::check_shift(t >= 0 ? t : -t);
    Int q, r;
    if (t >= 0)
      divide_qr(Int(n << static_cast<unsigned>(t)), den, q, r);
    else
      divide_qr(n, Int(den << static_cast<unsigned>(-t)), q, r);
    const Int half = Int(1) << static_cast<unsigned>(p - 2);
    // Closer to min than to 0 iff scaled value > 2^(p-2); the exact halfway
    // point has both candidate significands even, we take zero.
    if (q > half || (q == half && r != 0)) {
      FpNum m = FpNum::min_positive(p);
      return sign > 0 ? m : m.negated();
    }
    return FpNum::zero(p);
  }

  std::int64_t e = static_cast<std::int64_t>(e_wide);
  const std::int64_t t = (p - 1) - f; // scaled value = (n/den)*2^t in [2^(p-1), 2^p)
  detail::check_shift(t >= 0 ? t : -t);
  Int q, r, divisor;
  if (t >= 0) {
    divisor = den;
    divide_qr(Int(n << static_cast<unsigned>(t)), divisor, q, r);
  } else {
    divisor = den << static_cast<unsigned>(-t);
    divide_qr(n, divisor, q, r);
  }

  Int m = q;
  const Int twice_r = r << 1;
  if (twice_r > divisor) {
    ++m;
  } else if (twice_r == divisor) {
    if (bit_test(m, 0)) ++m; // tie: choose the even significand
  }
  if (m == Int(1) << static_cast<unsigned>(p)) {
    m >>= 1;
    ++e;
    if (e >= emax)
      throw domain_error(errc::exponent_overflow,
                         "rounding overflows the exponent range at p=" +
                             std::to_string(p));
  }
  if (sign < 0) m = -m;
  return FpNum(std::move(m), e, p);
}

inline FpNum round_p(const Rational& x, int p)
{
  return round_scaled(numerator(x), denominator(x), 0, p);
}

namespace detail {

inline void require_same_precision(const FpNum& a, const FpNum& b)
{
  if (a.precision() != b.precision())
    throw domain_error(errc::precision_mismatch,
                       "operands have different precisions: " +
                           std::to_string(a.precision()) + " vs " +
                           std::to_string(b.precision()));
}

// ds(m, 2^delta) as an integer pair (numer, 2^(delta+3)): the offset branch
// applies unless 4m is divisible by 2^delta.
inline Int ds_by_pow2_numer(const Int& m, std::int64_t delta)
{
  Int numer = m << 3;
  if (delta > 2) {
    Int mask = (Int(1) << static_cast<unsigned>(delta - 2)) - 1;
    if ((abs(m) & mask) != 0) numer += Int(1) << static_cast<unsigned>(delta);
  }
  return numer;
}

} // namespace detail

inline FpNum fp_add(const FpNum& a, const FpNum& b)
{
  detail::require_same_precision(a, b);
  const int p = a.precision();
  // Zero participates with the minimal exponent -2^p, so it always sits in
  // the ds slot of the case split and contributes exactly 0.
  if (b.is_zero()) return a;
  if (a.is_zero()) return b;

  const FpNum& hi = a.exponent() >= b.exponent() ? a : b;
  const FpNum& lo = a.exponent() >= b.exponent() ? b : a;
  const std::int64_t delta = hi.exponent() - lo.exponent();

  // Far below one ulp of hi the offset term lies strictly inside (0, 1/2),
  // so the sum rounds back to hi; this also keeps intermediates small.
  if (delta > p + 8) return hi;

  // value = (m_hi + (m_lo (ds) 2^delta)) * 2^e_hi
  Int numer = (hi.significand() << static_cast<unsigned>(delta + 3)) +
              detail::ds_by_pow2_numer(lo.significand(), delta);
  return round_scaled(std::move(numer), Int(1), hi.exponent() - delta - 3, p);
}

inline FpNum fp_mul(const FpNum& a, const FpNum& b)
{
  detail::require_same_precision(a, b);
  const int p = a.precision();
  if (a.is_zero() || b.is_zero()) return FpNum::zero(p);
  return round_scaled(a.significand() * b.significand(), Int(1),
                      a.exponent() + b.exponent(), p);
}

inline FpNum fp_div(const FpNum& a, const FpNum& b)
{
  detail::require_same_precision(a, b);
  const int p = a.precision();
  if (b.is_zero())
    throw domain_error(errc::division_by_zero, "fp_div: divisor is zero");
  if (a.is_zero()) return FpNum::zero(p);

  // <m1*2^(p-1) (ds) m2, e1 - e2 - p + 1>
  Int num = a.significand() << static_cast<unsigned>(p - 1);
  Int den = b.significand();
  Int numer = num << 3;
  if (Int(num << 2) % den != 0) numer += den;
  if (den < 0) {
    numer = -numer;
    den = -den;
  }
  return round_scaled(std::move(numer), std::move(den),
                      a.exponent() - b.exponent() - p + 1 - 3, p);
}

inline bool fp_leq(const FpNum& a, const FpNum& b)
{
  detail::require_same_precision(a, b);
  // e1 >= e2:  m1 <= m2 (ds) 2^(e1-e2);  e1 <= e2:  m1 (ds) 2^(e2-e1) <= m2.
  // Comparison follows the definition verbatim, offset perturbations and all.
  // A zero operand enters the split with the minimal exponent -2^p (the
  // definition leaves zero's exponent free), so its ds term is exactly 0.
  if (a.is_zero()) return b.significand() >= 0;
  if (b.is_zero()) return a.significand() <= 0;
  const std::int64_t delta =
      a.exponent() >= b.exponent() ? a.exponent() - b.exponent()
                                   : b.exponent() - a.exponent();
  if (delta > a.precision() + 8) {
    // ds(m, 2^delta) lies strictly inside (0, 1/2) for any nonzero
    // significand, so the comparison is settled by the integer side alone.
    if (a.exponent() >= b.exponent()) return a.significand() <= 0;
    return b.significand() >= 1;
  }
  if (a.exponent() >= b.exponent()) {
    Int lhs = a.significand() << static_cast<unsigned>(delta + 3);
    return lhs <= detail::ds_by_pow2_numer(b.significand(), delta);
  }
  Int rhs = b.significand() << static_cast<unsigned>(delta + 3);
  return detail::ds_by_pow2_numer(a.significand(), delta) <= rhs;
}

inline FpNum fp_floor(const FpNum& a)
{
  const int p = a.precision();
  if (a.exponent() >= 0) return a; // already an integer, <m*2^e, 0> renormalized
  const std::int64_t shift = -a.exponent();
  Int f;
  if (shift > p + 2) {
    // |value| < 1/4: floor is 0 or -1.
    f = a.sign() < 0 ? -1 : 0;
  } else {
    Int den = Int(1) << static_cast<unsigned>(shift);
    Int q, r;
    divide_qr(a.significand(), den, q, r);
    if (r != 0 && a.sign() < 0) --q; // floor division, not truncation
    f = std::move(q);
  }
  return round_scaled(std::move(f), Int(1), 0, p);
}

inline FpNum fp_iter_add(std::span<const FpNum> xs)
{
  if (xs.empty())
    throw domain_error(errc::invalid_value, "fp_iter_add: empty sequence");
  const int p = xs.front().precision();
  std::int64_t emin = 0, emax = 0;
  bool any = false;
  for (const FpNum& x : xs) {
    if (x.precision() != p)
      throw domain_error(errc::precision_mismatch,
                         "fp_iter_add: mixed precisions");
    if (x.is_zero()) continue;
    if (!any || x.exponent() < emin) emin = x.exponent();
    if (!any || x.exponent() > emax) emax = x.exponent();
    any = true;
  }
  if (!any) return FpNum::zero(p);
  detail::check_shift(emax - emin);
  Int acc = 0;
  for (const FpNum& x : xs) {
    if (x.is_zero()) continue;
    acc += x.significand() << static_cast<unsigned>(x.exponent() - emin);
  }
  if (acc == 0) return FpNum::zero(p);
  return round_scaled(std::move(acc), Int(1), emin, p);
}

inline FpNum fp_iter_add(const std::vector<FpNum>& xs)
{
  return fp_iter_add(std::span<const FpNum>(xs));
}

inline FpNum fp_iter_mul(std::span<const FpNum> xs)
{
  if (xs.empty())
    throw domain_error(errc::invalid_value, "fp_iter_mul: empty sequence");
  const int p = xs.front().precision();
  Int prod = 1;
  __int128 esum = 0;
  for (const FpNum& x : xs) {
    if (x.precision() != p)
      throw domain_error(errc::precision_mismatch,
                         "fp_iter_mul: mixed precisions");
    if (x.is_zero()) return FpNum::zero(p);
    prod *= x.significand();
    esum += x.exponent();
  }
  const __int128 bound = static_cast<__int128>(1) << 62;
  if (esum >= bound)
    throw domain_error(errc::exponent_overflow, "fp_iter_mul: exponent overflow");
  if (esum <= -bound) return FpNum::zero(p);
  return round_scaled(std::move(prod), Int(1), static_cast<std::int64_t>(esum), p);
}

inline FpNum fp_iter_mul(const std::vector<FpNum>& xs)
{
  return fp_iter_mul(std::span<const FpNum>(xs));
}

inline FpNum FpNum::parse(const std::string& text)
{
  std::size_t i = 0;
  auto need = [&](const std::string& what) -> char {
    if (i >= text.size()) throw ropetc::parse_error(i, what, "end of input");
    return text[i];
  };
  auto read_int = [&](const std::string& what) -> std::string {
    std::size_t start = i;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
      ++i;
    if (i == start || (i == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
      throw ropetc::parse_error(start, what, std::string(1, need(what)));
    return text.substr(start, i - start);
  };
  std::string m_str = read_int("integer significand");
  for (char c : {'*', '2', '^'}) {
    if (need(std::string(1, c)) != c)
      throw ropetc::parse_error(i, std::string("'") + c + "'",
                                std::string(1, text[i]));
    ++i;
  }
  std::string e_str = read_int("integer exponent");
  if (need("'@'") != '@')
    throw ropetc::parse_error(i, "'@'", std::string(1, text[i]));
  ++i;
  std::string p_str = read_int("precision");
  if (i != text.size())
    throw ropetc::parse_error(i, "end of token", std::string(1, text[i]));
  try {
    return FpNum(Int(m_str), std::stoll(e_str), std::stoi(p_str));
  } catch (const std::out_of_range&) {
    throw ropetc::parse_error(0, "representable exponent/precision", text);
  }
}

} // namespace ropetc
