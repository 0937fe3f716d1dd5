// Exact rational scalars with graceful float fallback.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hjdyn {

/// Signed 64-bit rational, always kept normalized (gcd 1, positive
/// denominator). Arithmetic goes through 128-bit intermediates; results
/// that still overflow 64 bits are reported so callers can degrade to
/// floating point instead of silently wrapping.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    num = g ? n / g : n;
    den = g ? d / g : d;
  }

  bool is_zero() const { return num == 0; }
  bool is_one() const { return num == 1 && den == 1; }
  bool is_integer() const { return den == 1; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
};

namespace detail {

inline bool fits_i64(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

// Normalizes n/d in 128-bit space; returns false when the reduced value
// does not fit in 64/64 bits.
inline bool make_rational(__int128 n, __int128 d, Rational& out) {
  if (d == 0) return false;
  if (d < 0) { n = -n; d = -d; }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b) { __int128 t = a % b; a = b; b = t; }
  if (a > 1) { n /= a; d /= a; }
  if (!fits_i64(n) || !fits_i64(d)) return false;
  out.num = static_cast<std::int64_t>(n);
  out.den = static_cast<std::int64_t>(d);
  return true;
}

}  // namespace detail

/// Scalar used for constants and coefficients: an exact rational when
/// possible, otherwise a double. Mixing exact and inexact operands yields
/// an inexact result, as does rational overflow.
class Number {
 public:
  Number() : exact_(true), rat_(0) {}
  Number(std::int64_t n) : exact_(true), rat_(n) {}
  Number(const Rational& r) : exact_(true), rat_(r) {}
  static Number real(double v) {
    Number n;
    n.exact_ = false;
    n.flt_ = v;
    return n;
  }

  bool exact() const { return exact_; }
  const Rational& rat() const { return rat_; }
  double to_double() const { return exact_ ? rat_.to_double() : flt_; }

  bool is_zero() const { return exact_ ? rat_.is_zero() : flt_ == 0.0; }
  bool is_one() const { return exact_ ? rat_.is_one() : flt_ == 1.0; }
  bool is_integer() const {
    return exact_ ? rat_.is_integer() : flt_ == std::floor(flt_) && std::isfinite(flt_);
  }
  std::int64_t as_integer() const {
    return exact_ ? rat_.num : static_cast<std::int64_t>(flt_);
  }
  bool negative() const { return exact_ ? rat_.num < 0 : flt_ < 0.0; }

  friend Number operator+(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      Rational r;
      const __int128 n = static_cast<__int128>(a.rat_.num) * b.rat_.den +
                         static_cast<__int128>(b.rat_.num) * a.rat_.den;
      const __int128 d = static_cast<__int128>(a.rat_.den) * b.rat_.den;
      if (detail::make_rational(n, d, r)) return Number(r);
    }
    return real(a.to_double() + b.to_double());
  }
  friend Number operator-(const Number& a, const Number& b) { return a + b.negated(); }
  friend Number operator*(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      Rational r;
      const __int128 n = static_cast<__int128>(a.rat_.num) * b.rat_.num;
      const __int128 d = static_cast<__int128>(a.rat_.den) * b.rat_.den;
      if (detail::make_rational(n, d, r)) return Number(r);
    }
    return real(a.to_double() * b.to_double());
  }
  friend Number operator/(const Number& a, const Number& b) {
    if (b.is_zero()) throw std::domain_error("number division by zero");
    if (a.exact_ && b.exact_) {
      Rational r;
      const __int128 n = static_cast<__int128>(a.rat_.num) * b.rat_.den;
      const __int128 d = static_cast<__int128>(a.rat_.den) * b.rat_.num;
      if (detail::make_rational(n, d, r)) return Number(r);
    }
    return real(a.to_double() / b.to_double());
  }

  Number negated() const {
    if (exact_) {
      Rational r;
      r.num = -rat_.num;
      r.den = rat_.den;
      return Number(r);
    }
    return real(-flt_);
  }

  /// Exact integer power; negative exponents invert. Overflow degrades to float.
  Number pow_integer(std::int64_t e) const {
    if (e == 0) return Number(1);
    if (is_zero() && e < 0) throw std::domain_error("zero to negative power");
    Number base = *this;
    if (e < 0) {
      base = Number(1) / base;
      e = -e;
    }
    Number acc(1);
    while (e > 0) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  /// Total order: by value, exact before inexact on ties (map keys).
  friend int compare(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      if (a.rat_ == b.rat_) return 0;
      return a.rat_ < b.rat_ ? -1 : 1;
    }
    const double x = a.to_double(), y = b.to_double();
    if (x < y) return -1;
    if (x > y) return 1;
    if (a.exact_ != b.exact_) return a.exact_ ? -1 : 1;
    return 0;
  }
  friend bool operator==(const Number& a, const Number& b) { return compare(a, b) == 0; }

  std::string str() const {
    if (exact_) {
      if (rat_.den == 1) return std::to_string(rat_.num);
      return std::to_string(rat_.num) + "/" + std::to_string(rat_.den);
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", flt_);
    return buf;
  }

 private:
  bool exact_;
  Rational rat_;
  double flt_ = 0.0;
};

/// Exact rational from a double when the binary mantissa/exponent fit in
/// int64 with a modest denominator; float fallback otherwise.
inline Number number_from_double(double v) {
  if (!std::isfinite(v)) return Number::real(v);
  if (v == 0.0) return Number(0);
  int exp = 0;
  const double mant = std::frexp(v, &exp);  // v = mant * 2^exp, |mant| in [0.5,1)
  const double scaled = std::ldexp(mant, 53);
  if (scaled != std::floor(scaled)) return Number::real(v);
  std::int64_t m = static_cast<std::int64_t>(scaled);
  int e2 = exp - 53;
  while (m != 0 && (m & 1) == 0) { m >>= 1; ++e2; }
  if (e2 >= 0) {
    if (e2 > 62) return Number::real(v);
    Rational r;
    if (!detail::make_rational(static_cast<__int128>(m) << e2, 1, r)) return Number::real(v);
    return Number(r);
  }
  if (e2 < -62) return Number::real(v);
  Rational r;
  if (!detail::make_rational(m, static_cast<__int128>(1) << (-e2), r)) return Number::real(v);
  return Number(r);
}

}  // namespace hjdyn
