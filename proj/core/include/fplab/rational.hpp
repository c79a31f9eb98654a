#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace fplab {

// Exact arbitrary-precision rational, extended with +/-infinity and NaN
// markers. Finite values are kept in canonical reduced form by GMP.
// Addition, subtraction and multiplication are exact on finite values and
// follow the usual conventions on specials (inf + -inf = NaN, inf * 0 = NaN,
// NaN absorbs everything).
class Rational {
public:
  enum class Kind : std::uint8_t { Finite, PosInf, NegInf, NaN };

  Rational() : kind_(Kind::Finite), v_(0) {}
  Rational(long num) : kind_(Kind::Finite), v_(num) {}
  Rational(long num, unsigned long den) : kind_(Kind::Finite), v_(num, den) { canonicalize(); }
  explicit Rational(mpq_class v) : kind_(Kind::Finite), v_(std::move(v)) { canonicalize(); }

  static Rational pos_inf() { return Rational(Kind::PosInf); }
  static Rational neg_inf() { return Rational(Kind::NegInf); }
  static Rational nan() { return Rational(Kind::NaN); }

  // 2^e for any integer e (negative allowed).
  static Rational pow2(long e);
  // Parse "n", "n/d" or a decimal string like "1.25" / "-0.5".
  static Rational parse(const std::string& text);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_nan() const { return kind_ == Kind::NaN; }
  bool is_inf() const { return kind_ == Kind::PosInf || kind_ == Kind::NegInf; }
  bool is_zero() const { return kind_ == Kind::Finite && sgn(v_) == 0; }

  const mpq_class& value() const;  // throws on non-finite

  int sign() const;  // -1, 0, +1; throws on NaN

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;

  Rational abs() const;

  // Comparisons are real-valued; any comparison involving NaN throws.
  bool operator==(const Rational& o) const { return compare(o) == 0; }
  bool operator!=(const Rational& o) const { return compare(o) != 0; }
  bool operator<(const Rational& o) const { return compare(o) < 0; }
  bool operator<=(const Rational& o) const { return compare(o) <= 0; }
  bool operator>(const Rational& o) const { return compare(o) > 0; }
  bool operator>=(const Rational& o) const { return compare(o) >= 0; }

  // floor(log2(|x|)) for finite nonzero x.
  long floor_log2_abs() const;

  std::string to_string() const;
  double to_double() const;  // lossy, for reports only

private:
  explicit Rational(Kind k) : kind_(k), v_(0) {}
  void canonicalize() { v_.canonicalize(); }
  int compare(const Rational& o) const;

  Kind kind_;
  mpq_class v_;
};

}  // namespace fplab
