#include "fplab/rational.hpp"

#include <limits>
#include <stdexcept>

namespace fplab {

Rational Rational::pow2(long e) {
  mpq_class q;
  if (e >= 0) {
    mpz_class z;
    mpz_ui_pow_ui(z.get_mpz_t(), 2, static_cast<unsigned long>(e));
    q = z;
  } else {
    mpz_class z;
    mpz_ui_pow_ui(z.get_mpz_t(), 2, static_cast<unsigned long>(-e));
    q = mpq_class(1) / mpq_class(z);
  }
  return Rational(q);
}

Rational Rational::parse(const std::string& text) {
  if (text == "inf" || text == "+inf") return pos_inf();
  if (text == "-inf") return neg_inf();
  if (text == "nan") return nan();
  const auto dot = text.find('.');
  if (dot == std::string::npos) {
    mpq_class q;
    if (q.set_str(text, 10) != 0) {
      throw std::invalid_argument("cannot parse rational '" + text + "'");
    }
    q.canonicalize();
    return Rational(q);
  }
  // Decimal form: digits '.' digits
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t frac_len = text.size() - dot - 1;
  mpz_class num;
  if (num.set_str(digits, 10) != 0) {
    throw std::invalid_argument("cannot parse rational '" + text + "'");
  }
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
  mpq_class q(num, den);
  q.canonicalize();
  return Rational(q);
}

const mpq_class& Rational::value() const {
  if (!is_finite()) throw std::domain_error("value() on non-finite rational");
  return v_;
}

int Rational::sign() const {
  switch (kind_) {
    case Kind::Finite: return sgn(v_);
    case Kind::PosInf: return 1;
    case Kind::NegInf: return -1;
    default: throw std::domain_error("sign() on NaN");
  }
}

Rational Rational::operator-() const {
  switch (kind_) {
    case Kind::Finite: return Rational(mpq_class(-v_));
    case Kind::PosInf: return neg_inf();
    case Kind::NegInf: return pos_inf();
    default: return nan();
  }
}

Rational Rational::operator+(const Rational& o) const {
  if (is_nan() || o.is_nan()) return nan();
  if (is_finite() && o.is_finite()) return Rational(mpq_class(v_ + o.v_));
  if (is_inf() && o.is_inf()) {
    return (kind_ == o.kind_) ? *this : nan();
  }
  return is_inf() ? *this : o;
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  if (is_nan() || o.is_nan()) return nan();
  if (is_finite() && o.is_finite()) return Rational(mpq_class(v_ * o.v_));
  // At least one infinity.
  const int sa = sign(), sb = o.sign();
  if (sa == 0 || sb == 0) return nan();  // inf * 0
  return (sa * sb > 0) ? pos_inf() : neg_inf();
}

Rational Rational::abs() const {
  switch (kind_) {
    case Kind::Finite: return Rational(mpq_class(::abs(v_)));
    case Kind::NaN: return nan();
    default: return pos_inf();
  }
}

int Rational::compare(const Rational& o) const {
  if (is_nan() || o.is_nan()) throw std::domain_error("ordered comparison with NaN");
  if (kind_ == o.kind_ && is_finite()) return cmp(v_, o.v_);
  if (kind_ == o.kind_) return 0;  // same infinity
  // Distinct kinds, none NaN.
  auto rank = [](Kind k) { return k == Kind::NegInf ? -1 : (k == Kind::PosInf ? 1 : 0); };
  const int ra = rank(kind_), rb = rank(o.kind_);
  return (ra < rb) ? -1 : (ra > rb ? 1 : 0);
}

long Rational::floor_log2_abs() const {
  if (!is_finite() || is_zero()) throw std::domain_error("floor_log2_abs on zero or non-finite");
  const mpz_class num = ::abs(v_.get_num());
  const mpz_class den = v_.get_den();
  // sizeinbase gives bit length; |x| in [2^(bn-bd), 2^(bn-bd+1)) roughly.
  const long bn = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2));
  const long bd = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  long e = bn - bd;  // candidate: 2^e <= |x| < 2^(e+2)
  // Adjust so 2^e <= |x| < 2^(e+1).
  mpz_class lhs, rhs;
  // compare |num| with den*2^e  <=>  |x| with 2^e
  auto cmp_pow = [&](long k) {
    if (k >= 0) {
      mpz_class t;
      mpz_mul_2exp(t.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(k));
      return cmp(num, t);
    }
    mpz_class t;
    mpz_mul_2exp(t.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(-k));
    return cmp(t, den);
  };
  while (cmp_pow(e) < 0) --e;
  while (cmp_pow(e + 1) >= 0) ++e;
  return e;
}

std::string Rational::to_string() const {
  switch (kind_) {
    case Kind::Finite: return v_.get_str();
    case Kind::PosInf: return "inf";
    case Kind::NegInf: return "-inf";
    default: return "nan";
  }
}

double Rational::to_double() const {
  switch (kind_) {
    case Kind::Finite: return v_.get_d();
    case Kind::PosInf: return std::numeric_limits<double>::infinity();
    case Kind::NegInf: return -std::numeric_limits<double>::infinity();
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace fplab
