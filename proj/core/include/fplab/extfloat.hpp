#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fplab/format.hpp"
#include "fplab/rational.hpp"

namespace fplab {

// One element of the extended float set of a format: a finite value, +inf,
// -inf, or the canonical NaN, stored as an IEEE-layout bit pattern
// [sign | biased exponent | mantissa]. Values are immutable.
//
// Arithmetic is round-to-nearest-even from the exact result, with the usual
// special-value rules (inf + -inf = NaN, inf * 0 = NaN, NaN absorbs).
// Exact zero results are canonicalized to +0; -0 exists only as a decodable
// encoding and compares real-equal to +0.
class ExtFloat {
public:
  ExtFloat(FloatFormat fmt, std::uint64_t bits);

  static ExtFloat zero(FloatFormat fmt) { return ExtFloat(fmt, 0); }
  static ExtFloat inf(FloatFormat fmt, bool negative = false);
  static ExtFloat nan(FloatFormat fmt);
  static ExtFloat omega(FloatFormat fmt);      // smallest positive (subnormal)
  static ExtFloat max_finite(FloatFormat fmt); // Omega
  // 2^e for e in [emin - p, emax]; throws if out of range.
  static ExtFloat pow2(FloatFormat fmt, int e);
  static ExtFloat from_int(FloatFormat fmt, long v);  // rounds

  const FloatFormat& format() const { return fmt_; }
  std::uint64_t bits() const { return bits_; }

  bool is_nan() const;
  bool is_inf() const;
  bool is_finite() const { return !is_nan() && !is_inf(); }
  bool is_zero() const;  // either encoding of zero
  bool sign_bit() const { return (bits_ & fmt_.sign_mask()) != 0; }

  Rational to_rational() const;
  std::string to_string() const;      // "0x<hex>@<format>"
  std::string to_decimal_string() const;  // human-readable value
  static ExtFloat parse(std::string_view text);  // inverse of to_string

  friend ExtFloat negate(const ExtFloat& x);
  friend ExtFloat abs(const ExtFloat& x);

private:
  FloatFormat fmt_;
  std::uint64_t bits_;
};

// value = (-1)^sign * sig * 2^exp2 with 0 <= sig < 2^(p+1); exp2 = emin - p
// for subnormals and zero. Only meaningful for finite values.
struct Unpacked {
  int sign;           // 0 or 1
  std::uint64_t sig;
  int exp2;
};
Unpacked unpack(const ExtFloat& x);

// Round an exact rational to the format (the rounding function: nearest,
// ties to even, overflow to infinity at |x| >= Omega + 2^(emax-p-1)).
ExtFloat round_to_format(const Rational& x, FloatFormat fmt);

ExtFloat fadd(const ExtFloat& x, const ExtFloat& y);
ExtFloat fsub(const ExtFloat& x, const ExtFloat& y);
ExtFloat fmul(const ExtFloat& x, const ExtFloat& y);

// Real-valued comparison: +0 == -0; NaN is unordered against everything.
std::partial_ordering real_compare(const ExtFloat& a, const ExtFloat& b);
bool real_equals(const ExtFloat& a, const ExtFloat& b);
bool real_less(const ExtFloat& a, const ExtFloat& b);
bool real_less_equal(const ExtFloat& a, const ExtFloat& b);
// Encoding equality (canonical NaN compares equal to itself; +0 != -0).
bool same_encoding(const ExtFloat& a, const ExtFloat& b);

// Successor / predecessor in the real order. next_up(Omega) = +inf,
// next_up(-omega) = +0, next_up(NaN) = NaN.
ExtFloat next_up(const ExtFloat& x);
ExtFloat next_down(const ExtFloat& x);

// E(x) = max(emin, floor(log2 |x|)); E(0) = emin. Throws on NaN/inf.
int expo(const ExtFloat& x);
// ulp(x) = 2^(E(x)-p); ulp(0) = omega. Throws on NaN/inf.
ExtFloat ulp(const ExtFloat& x);

// All finite values in [lo, hi] in ascending real order, signed zeros
// collapsed to a single +0 entry. Throws on NaN/inf bounds or lo > hi.
std::vector<ExtFloat> enumerate(const ExtFloat& lo, const ExtFloat& hi);

// All finite values of the format ascending (enumerate(-Omega, Omega)).
std::vector<ExtFloat> enumerate_all(FloatFormat fmt);

// Ascending by magnitude: 0, omega, -omega, 2*omega, ... (zeros collapsed).
std::vector<ExtFloat> enumerate_by_magnitude(FloatFormat fmt);

// j-th mantissa bit of a finite value, j in [1, p] (m_1 is the leading
// fraction bit). For subnormals these are the stored field bits.
int mantissa_bit(const ExtFloat& x, int j);

}  // namespace fplab
