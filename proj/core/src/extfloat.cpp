#include "fplab/extfloat.hpp"

#include <bit>
#include <stdexcept>

namespace fplab {

namespace {

using u128 = unsigned __int128;

int bit_length_u128(u128 v) {
  const std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return 128 - std::countl_zero(hi);
  const std::uint64_t lo = static_cast<std::uint64_t>(v);
  if (lo == 0) return 0;
  return 64 - std::countl_zero(lo);
}

void check_same_format(const ExtFloat& x, const ExtFloat& y) {
  if (x.format() != y.format()) {
    throw std::invalid_argument("operands have different float formats");
  }
}

// Round sign * mag * 2^base to the format, nearest-even, overflow to inf.
ExtFloat pack_round(FloatFormat fmt, int sign, u128 mag, int base) {
  if (mag == 0) return ExtFloat::zero(fmt);
  const int p = fmt.p();
  const int top = bit_length_u128(mag) - 1;
  const int value_exp = top + base;
  int e = std::max(fmt.emin(), value_exp);
  int grid = e - p;
  std::uint64_t sig;
  const int shift = grid - base;
  if (shift <= 0) {
    // Already on a grid at least as fine as needed; widen exactly.
    sig = static_cast<std::uint64_t>(mag << static_cast<unsigned>(-shift));
  } else {
    if (shift > top) {
      // |value| < 2^grid: rounds to 0 or to one grid step.
      if (top + 1 < shift) return ExtFloat::zero(fmt);  // below half a step
      // top + 1 == shift: value in [2^(grid-1), 2^grid).
      const bool exact_half = (mag == (u128(1) << top));
      if (exact_half) return ExtFloat::zero(fmt);  // tie to even (zero)
      return pack_round(fmt, sign, 1, grid);
    }
    const u128 q = mag >> shift;
    const u128 rem = mag - (q << shift);
    const u128 half = u128(1) << (shift - 1);
    u128 rounded = q;
    if (rem > half || (rem == half && (q & 1) != 0)) rounded += 1;
    if (rounded >> (p + 1)) {
      rounded >>= 1;
      ++e;
      ++grid;
    }
    sig = static_cast<std::uint64_t>(rounded);
  }
  // A carry in the exact path can also push past p+1 bits.
  while (sig >> (p + 1)) {
    // Exact multiple of the grid wider than p+1 bits: move the grid up.
    if (sig & 1) throw std::logic_error("pack_round: inexact regrid");
    sig >>= 1;
    ++e;
    ++grid;
  }
  if (sig == 0) return ExtFloat::zero(fmt);
  if (e > fmt.emax()) return ExtFloat::inf(fmt, sign != 0);
  std::uint64_t exp_field, mant_field;
  if (sig < (1ull << p)) {
    // Subnormal; only valid at e == emin.
    if (e != fmt.emin()) throw std::logic_error("pack_round: unnormalized significand");
    exp_field = 0;
    mant_field = sig;
  } else {
    exp_field = static_cast<std::uint64_t>(e - fmt.emin() + 1);
    mant_field = sig - (1ull << p);
  }
  std::uint64_t bits = (sign ? fmt.sign_mask() : 0) | (exp_field << p) | mant_field;
  return ExtFloat(fmt, bits);
}

}  // namespace

ExtFloat::ExtFloat(FloatFormat fmt, std::uint64_t bits) : fmt_(fmt), bits_(bits) {
  if (bits_ & ~fmt_.bits_mask()) {
    throw std::invalid_argument("bit pattern wider than the format");
  }
  // Canonicalize NaN: one quiet NaN encoding (positive sign, top mantissa bit).
  const std::uint64_t exp_field = (bits_ & fmt_.exponent_mask()) >> fmt_.p();
  const std::uint64_t mant_field = bits_ & fmt_.mantissa_mask();
  if (exp_field == ((1ull << fmt_.q()) - 1) && mant_field != 0) {
    bits_ = fmt_.exponent_mask() | (1ull << (fmt_.p() - 1));
  }
}

ExtFloat ExtFloat::inf(FloatFormat fmt, bool negative) {
  std::uint64_t bits = fmt.exponent_mask() | (negative ? fmt.sign_mask() : 0);
  return ExtFloat(fmt, bits);
}

ExtFloat ExtFloat::nan(FloatFormat fmt) {
  return ExtFloat(fmt, fmt.exponent_mask() | (1ull << (fmt.p() - 1)));
}

ExtFloat ExtFloat::omega(FloatFormat fmt) { return ExtFloat(fmt, 1); }

ExtFloat ExtFloat::max_finite(FloatFormat fmt) {
  const std::uint64_t exp_field = (1ull << fmt.q()) - 2;
  return ExtFloat(fmt, (exp_field << fmt.p()) | fmt.mantissa_mask());
}

ExtFloat ExtFloat::pow2(FloatFormat fmt, int e) {
  if (e < fmt.emin() - fmt.p() || e > fmt.emax()) {
    throw std::out_of_range("pow2 exponent outside format range");
  }
  if (e >= fmt.emin()) {
    const std::uint64_t exp_field = static_cast<std::uint64_t>(e - fmt.emin() + 1);
    return ExtFloat(fmt, exp_field << fmt.p());
  }
  return ExtFloat(fmt, 1ull << (e - (fmt.emin() - fmt.p())));
}

ExtFloat ExtFloat::from_int(FloatFormat fmt, long v) {
  return round_to_format(Rational(v), fmt);
}

bool ExtFloat::is_nan() const {
  const std::uint64_t exp_field = (bits_ & fmt_.exponent_mask()) >> fmt_.p();
  return exp_field == ((1ull << fmt_.q()) - 1) && (bits_ & fmt_.mantissa_mask()) != 0;
}

bool ExtFloat::is_inf() const {
  const std::uint64_t exp_field = (bits_ & fmt_.exponent_mask()) >> fmt_.p();
  return exp_field == ((1ull << fmt_.q()) - 1) && (bits_ & fmt_.mantissa_mask()) == 0;
}

bool ExtFloat::is_zero() const { return (bits_ & ~fmt_.sign_mask()) == 0; }

Rational ExtFloat::to_rational() const {
  if (is_nan()) return Rational::nan();
  if (is_inf()) return sign_bit() ? Rational::neg_inf() : Rational::pos_inf();
  const Unpacked u = unpack(*this);
  Rational r = Rational(static_cast<long>(u.sig));
  if (u.sig == 0) return Rational(0);
  r = r * Rational::pow2(u.exp2);
  return u.sign ? -r : r;
}

std::string ExtFloat::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(bits_));
  return std::string(buf) + "@" + fmt_.spec_string();
}

std::string ExtFloat::to_decimal_string() const {
  if (is_nan()) return "nan";
  if (is_inf()) return sign_bit() ? "-inf" : "inf";
  const Rational r = to_rational();
  // Dyadic rationals print exactly in decimal.
  const mpq_class& q = r.value();
  mpz_class den = q.get_den();
  unsigned long twos = mpz_scan1(den.get_mpz_t(), 0);
  mpz_class num = q.get_num();
  // num / 2^twos -> scale by 5^twos to get a decimal fraction.
  mpz_class five;
  mpz_ui_pow_ui(five.get_mpz_t(), 5, twos);
  num *= five;
  std::string digits = num.get_str();
  bool neg = false;
  if (!digits.empty() && digits[0] == '-') {
    neg = true;
    digits.erase(0, 1);
  }
  if (twos >= digits.size()) digits.insert(0, twos - digits.size() + 1, '0');
  std::string out = digits;
  if (twos > 0) out.insert(digits.size() - twos, ".");
  if (neg) out.insert(0, "-");
  return out;
}

ExtFloat ExtFloat::parse(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) throw std::invalid_argument("missing '@' in float literal");
  const FloatFormat fmt = FloatFormat::parse(text.substr(at + 1));
  std::string hex(text.substr(0, at));
  if (hex.rfind("0x", 0) != 0) throw std::invalid_argument("float literal must start with 0x");
  std::uint64_t bits = std::stoull(hex.substr(2), nullptr, 16);
  return ExtFloat(fmt, bits);
}

ExtFloat negate(const ExtFloat& x) {
  if (x.is_nan()) return x;
  return ExtFloat(x.fmt_, x.bits_ ^ x.fmt_.sign_mask());
}

ExtFloat abs(const ExtFloat& x) {
  if (x.is_nan()) return x;
  return ExtFloat(x.fmt_, x.bits_ & ~x.fmt_.sign_mask());
}

Unpacked unpack(const ExtFloat& x) {
  if (!x.is_finite()) throw std::domain_error("unpack of non-finite value");
  const FloatFormat& f = x.format();
  const std::uint64_t exp_field = (x.bits() & f.exponent_mask()) >> f.p();
  const std::uint64_t mant_field = x.bits() & f.mantissa_mask();
  Unpacked u;
  u.sign = x.sign_bit() ? 1 : 0;
  if (exp_field == 0) {
    u.sig = mant_field;
    u.exp2 = f.emin() - f.p();
  } else {
    u.sig = (1ull << f.p()) | mant_field;
    u.exp2 = f.emin() + static_cast<int>(exp_field) - 1 - f.p();
  }
  return u;
}

ExtFloat round_to_format(const Rational& x, FloatFormat fmt) {
  if (x.is_nan()) return ExtFloat::nan(fmt);
  if (x.kind() == Rational::Kind::PosInf) return ExtFloat::inf(fmt, false);
  if (x.kind() == Rational::Kind::NegInf) return ExtFloat::inf(fmt, true);
  if (x.is_zero()) return ExtFloat::zero(fmt);

  // Overflow threshold: |x| >= Omega + 2^(emax-p-1).
  const Rational omega_big = ExtFloat::max_finite(fmt).to_rational();
  const Rational threshold = omega_big + Rational::pow2(fmt.emax() - fmt.p() - 1);
  const Rational ax = x.abs();
  if (ax >= threshold) return ExtFloat::inf(fmt, x.sign() < 0);

  const long vexp = ax.floor_log2_abs();
  const int e = std::max<long>(fmt.emin(), vexp);
  const int grid = e - fmt.p();
  // t = |x| / 2^grid; round t to an integer, ties to even.
  const Rational t = ax * Rational::pow2(-grid);
  mpz_class n;
  mpz_fdiv_q(n.get_mpz_t(), t.value().get_num_mpz_t(), t.value().get_den_mpz_t());
  const Rational frac = t - Rational(mpq_class(n));
  const Rational half(1, 2);
  if (frac > half || (frac == half && mpz_odd_p(n.get_mpz_t()))) {
    n += 1;
  }
  if (!n.fits_ulong_p()) throw std::logic_error("round_to_format: significand overflow");
  return pack_round(fmt, x.sign() < 0 ? 1 : 0, static_cast<u128>(n.get_ui()), grid);
}

ExtFloat fadd(const ExtFloat& x, const ExtFloat& y) {
  check_same_format(x, y);
  const FloatFormat fmt = x.format();
  if (x.is_nan() || y.is_nan()) return ExtFloat::nan(fmt);
  if (x.is_inf() || y.is_inf()) {
    if (x.is_inf() && y.is_inf()) {
      if (x.sign_bit() != y.sign_bit()) return ExtFloat::nan(fmt);
      return x;
    }
    return x.is_inf() ? x : y;
  }
  Unpacked a = unpack(x), b = unpack(y);
  if (a.sig == 0 && b.sig == 0) return ExtFloat::zero(fmt);
  if (a.sig == 0) return ExtFloat(fmt, y.bits());
  if (b.sig == 0) return ExtFloat(fmt, x.bits());
  if (a.exp2 < b.exp2) std::swap(a, b);
  const int p = fmt.p();
  int d = a.exp2 - b.exp2;
  __int128 sa, sb;
  int base;
  if (d <= p + 3) {
    sa = static_cast<__int128>(static_cast<u128>(a.sig) << d);
    sb = static_cast<__int128>(b.sig);
    base = b.exp2;
  } else {
    // Far apart: the smaller operand only contributes a sticky bit well
    // below the rounding boundary of the result.
    const int g = p + 4;
    sa = static_cast<__int128>(static_cast<u128>(a.sig) << g);
    sb = 1;
    base = a.exp2 - g;
  }
  if (a.sign) sa = -sa;
  if (b.sign) sb = -sb;
  const __int128 s = sa + sb;
  if (s == 0) return ExtFloat::zero(fmt);
  const int sign = s < 0 ? 1 : 0;
  const u128 mag = static_cast<u128>(s < 0 ? -s : s);
  return pack_round(fmt, sign, mag, base);
}

ExtFloat fsub(const ExtFloat& x, const ExtFloat& y) { return fadd(x, negate(y)); }

ExtFloat fmul(const ExtFloat& x, const ExtFloat& y) {
  check_same_format(x, y);
  const FloatFormat fmt = x.format();
  if (x.is_nan() || y.is_nan()) return ExtFloat::nan(fmt);
  const bool sign = x.sign_bit() != y.sign_bit();
  if (x.is_inf() || y.is_inf()) {
    if (x.is_zero() || y.is_zero()) return ExtFloat::nan(fmt);
    return ExtFloat::inf(fmt, sign);
  }
  const Unpacked a = unpack(x), b = unpack(y);
  if (a.sig == 0 || b.sig == 0) return ExtFloat::zero(fmt);
  const u128 mag = static_cast<u128>(a.sig) * static_cast<u128>(b.sig);
  return pack_round(fmt, sign ? 1 : 0, mag, a.exp2 + b.exp2);
}

std::partial_ordering real_compare(const ExtFloat& a, const ExtFloat& b) {
  if (a.is_nan() || b.is_nan()) return std::partial_ordering::unordered;
  auto side = [](const ExtFloat& v) { return v.is_inf() ? (v.sign_bit() ? -1 : 1) : 0; };
  const int sa = side(a), sb = side(b);
  if (sa != 0 || sb != 0) {
    if (sa == sb) return std::partial_ordering::equivalent;
    if (sa < sb) return std::partial_ordering::less;
    return std::partial_ordering::greater;
  }
  const Unpacked ua = unpack(a), ub = unpack(b);
  if (ua.sig == 0 && ub.sig == 0) return std::partial_ordering::equivalent;
  const int va = ua.sig == 0 ? 0 : (ua.sign ? -1 : 1);
  const int vb = ub.sig == 0 ? 0 : (ub.sign ? -1 : 1);
  if (va != vb) return va < vb ? std::partial_ordering::less : std::partial_ordering::greater;
  // Same nonzero sign; compare magnitudes.
  const int ta = bit_length_u128(ua.sig) + ua.exp2;
  const int tb = bit_length_u128(ub.sig) + ub.exp2;
  int cmp;
  if (ta != tb) {
    cmp = ta < tb ? -1 : 1;
  } else {
    const int shift = ua.exp2 - ub.exp2;
    const u128 ma = shift >= 0 ? (static_cast<u128>(ua.sig) << shift) : static_cast<u128>(ua.sig);
    const u128 mb = shift >= 0 ? static_cast<u128>(ub.sig) : (static_cast<u128>(ub.sig) << -shift);
    cmp = ma < mb ? -1 : (ma > mb ? 1 : 0);
  }
  if (va < 0) cmp = -cmp;
  if (cmp == 0) return std::partial_ordering::equivalent;
  return cmp < 0 ? std::partial_ordering::less : std::partial_ordering::greater;
}

bool real_equals(const ExtFloat& a, const ExtFloat& b) {
  return real_compare(a, b) == std::partial_ordering::equivalent;
}

bool real_less(const ExtFloat& a, const ExtFloat& b) {
  return real_compare(a, b) == std::partial_ordering::less;
}

bool real_less_equal(const ExtFloat& a, const ExtFloat& b) {
  const auto c = real_compare(a, b);
  return c == std::partial_ordering::less || c == std::partial_ordering::equivalent;
}

bool same_encoding(const ExtFloat& a, const ExtFloat& b) {
  return a.format() == b.format() && a.bits() == b.bits();
}

ExtFloat next_up(const ExtFloat& x) {
  const FloatFormat fmt = x.format();
  if (x.is_nan()) return x;
  if (x.is_inf()) return x.sign_bit() ? negate(ExtFloat::max_finite(fmt)) : x;
  if (x.is_zero()) return ExtFloat::omega(fmt);
  const std::uint64_t mag = x.bits() & ~fmt.sign_mask();
  if (!x.sign_bit()) {
    // mag+1 walks through the positive encodings in value order; the
    // all-ones-exponent/zero-mantissa pattern is +inf, reached from Omega.
    return ExtFloat(fmt, mag + 1);
  }
  if (mag == 1) return ExtFloat::zero(fmt);  // next_up(-omega) = +0
  return ExtFloat(fmt, fmt.sign_mask() | (mag - 1));
}

ExtFloat next_down(const ExtFloat& x) {
  if (x.is_nan()) return x;
  return negate(next_up(negate(x)));
}

int expo(const ExtFloat& x) {
  if (!x.is_finite()) throw std::domain_error("special value has no exponent");
  const Unpacked u = unpack(x);
  if (u.sig == 0) return x.format().emin();
  const int vexp = bit_length_u128(u.sig) - 1 + u.exp2;
  return std::max(x.format().emin(), vexp);
}

ExtFloat ulp(const ExtFloat& x) {
  if (!x.is_finite()) throw std::domain_error("special value has no ulp");
  return ExtFloat::pow2(x.format(), expo(x) - x.format().p());
}

std::vector<ExtFloat> enumerate(const ExtFloat& lo, const ExtFloat& hi) {
  if (!lo.is_finite() || !hi.is_finite()) {
    throw std::invalid_argument("enumerate bounds must be finite");
  }
  if (real_less(hi, lo)) throw std::invalid_argument("enumerate bounds out of order");
  std::vector<ExtFloat> out;
  ExtFloat cur = lo.is_zero() ? ExtFloat::zero(lo.format()) : lo;
  while (true) {
    out.push_back(cur);
    if (!real_less(cur, hi)) break;
    cur = next_up(cur);  // skips -0 by construction
  }
  return out;
}

std::vector<ExtFloat> enumerate_all(FloatFormat fmt) {
  const ExtFloat top = ExtFloat::max_finite(fmt);
  return enumerate(negate(top), top);
}

std::vector<ExtFloat> enumerate_by_magnitude(FloatFormat fmt) {
  std::vector<ExtFloat> out;
  out.push_back(ExtFloat::zero(fmt));
  ExtFloat cur = ExtFloat::omega(fmt);
  const ExtFloat top = ExtFloat::max_finite(fmt);
  while (true) {
    out.push_back(cur);
    out.push_back(negate(cur));
    if (real_equals(cur, top)) break;
    cur = next_up(cur);
  }
  return out;
}

int mantissa_bit(const ExtFloat& x, int j) {
  if (!x.is_finite()) throw std::domain_error("mantissa_bit of non-finite value");
  const int p = x.format().p();
  if (j < 1 || j > p) throw std::out_of_range("mantissa bit index");
  return static_cast<int>((x.bits() >> (p - j)) & 1);
}

}  // namespace fplab
