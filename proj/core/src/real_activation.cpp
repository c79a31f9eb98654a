#include "fplab/real_activation.hpp"

#include <mpfr.h>

#include <array>
#include <stdexcept>
#include <utility>

namespace fplab {

namespace {

// Minimal interval arithmetic over MPFR with outward rounding. Endpoints
// may be infinite; every operation keeps a true enclosure.
class Iv {
public:
  explicit Iv(long prec) {
    mpfr_init2(lo_, prec);
    mpfr_init2(hi_, prec);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
  }
  Iv(const Iv& o) {
    mpfr_init2(lo_, mpfr_get_prec(o.lo_));
    mpfr_init2(hi_, mpfr_get_prec(o.hi_));
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  Iv& operator=(const Iv& o) {
    if (this != &o) {
      mpfr_set_prec(lo_, mpfr_get_prec(o.lo_));
      mpfr_set_prec(hi_, mpfr_get_prec(o.hi_));
      mpfr_set(lo_, o.lo_, MPFR_RNDD);
      mpfr_set(hi_, o.hi_, MPFR_RNDU);
    }
    return *this;
  }
  ~Iv() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
  }

  long prec() const { return mpfr_get_prec(lo_); }

  static Iv from_rational(const Rational& x, long prec) {
    Iv r(prec);
    if (x.is_finite()) {
      mpfr_set_q(r.lo_, x.value().get_mpq_t(), MPFR_RNDD);
      mpfr_set_q(r.hi_, x.value().get_mpq_t(), MPFR_RNDU);
    } else if (x.kind() == Rational::Kind::PosInf) {
      mpfr_set_inf(r.lo_, 1);
      mpfr_set_inf(r.hi_, 1);
    } else {
      mpfr_set_inf(r.lo_, -1);
      mpfr_set_inf(r.hi_, -1);
    }
    return r;
  }
  static Iv from_long(long v, long prec) {
    Iv r(prec);
    mpfr_set_si(r.lo_, v, MPFR_RNDD);
    mpfr_set_si(r.hi_, v, MPFR_RNDU);
    return r;
  }
  // Enclosure of an MPFR constant (e.g. mpfr_const_pi).
  using ConstFn = int (*)(mpfr_ptr, mpfr_rnd_t);
  static Iv constant(ConstFn fn, long prec) {
    Iv r(prec);
    fn(r.lo_, MPFR_RNDD);
    fn(r.hi_, MPFR_RNDU);
    return r;
  }

  Iv neg() const {
    Iv r(prec());
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
    return r;
  }
  Iv add(const Iv& o) const {
    Iv r(prec());
    mpfr_add(r.lo_, lo_, o.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, hi_, o.hi_, MPFR_RNDU);
    return r;
  }
  Iv sub(const Iv& o) const { return add(o.neg()); }
  Iv mul(const Iv& o) const {
    Iv r(prec());
    mpfr_t t;
    mpfr_init2(t, prec());
    const mpfr_srcptr as[2] = {lo_, hi_};
    const mpfr_srcptr bs[2] = {o.lo_, o.hi_};
    bool first = true;
    for (auto a : as) {
      for (auto b : bs) {
        if ((mpfr_zero_p(a) && mpfr_inf_p(b)) || (mpfr_inf_p(a) && mpfr_zero_p(b))) {
          // Treat 0 * inf corners as 0 (the true range is handled by the
          // other corners of the enclosure).
          mpfr_set_zero(t, 1);
          if (first || mpfr_cmp(t, r.lo_) < 0) mpfr_set(r.lo_, t, MPFR_RNDD);
          if (first || mpfr_cmp(t, r.hi_) > 0) mpfr_set(r.hi_, t, MPFR_RNDU);
          first = false;
          continue;
        }
        mpfr_mul(t, a, b, MPFR_RNDD);
        if (first || mpfr_cmp(t, r.lo_) < 0) mpfr_set(r.lo_, t, MPFR_RNDD);
        mpfr_mul(t, a, b, MPFR_RNDU);
        if (first || mpfr_cmp(t, r.hi_) > 0) mpfr_set(r.hi_, t, MPFR_RNDU);
        first = false;
      }
    }
    mpfr_clear(t);
    return r;
  }
  // Reciprocal; requires the interval not to contain zero.
  Iv recip() const {
    if (mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0) {
      throw std::domain_error("interval reciprocal across zero");
    }
    Iv r(prec());
    mpfr_ui_div(r.lo_, 1, hi_, MPFR_RNDD);
    mpfr_ui_div(r.hi_, 1, lo_, MPFR_RNDU);
    return r;
  }

  using MonoFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);
  Iv mono(MonoFn fn) const {  // nondecreasing elementary function
    Iv r(prec());
    fn(r.lo_, lo_, MPFR_RNDD);
    fn(r.hi_, hi_, MPFR_RNDU);
    return r;
  }
  Iv exp() const { return mono(mpfr_exp); }
  Iv expm1() const { return mono(mpfr_expm1); }
  Iv log1p() const { return mono(mpfr_log1p); }
  Iv tanh() const { return mono(mpfr_tanh); }
  Iv sinh() const { return mono(mpfr_sinh); }
  Iv erf() const { return mono(mpfr_erf); }
  Iv sqrt() const { return mono(mpfr_sqrt); }

  // sin/cos: if a critical point may lie inside the interval, fall back to
  // [-1, 1]; precision escalation shrinks intervals around rational inputs
  // (which are never critical points) until this cannot happen.
  Iv sin_safe() const { return trig(true); }
  Iv cos_safe() const { return trig(false); }

  RealInterval to_real_interval() const {
    RealInterval out;
    out.lo = endpoint_to_rational(lo_);
    out.hi = endpoint_to_rational(hi_);
    out.exact = out.lo.is_finite() && out.hi.is_finite() && out.lo == out.hi;
    return out;
  }

private:
  Iv trig(bool is_sin) const {
    Iv r(prec());
    if (maybe_contains_trig_critical(is_sin)) {
      mpfr_set_si(r.lo_, -1, MPFR_RNDD);
      mpfr_set_si(r.hi_, 1, MPFR_RNDU);
      return r;
    }
    mpfr_t a, b;
    mpfr_init2(a, prec());
    mpfr_init2(b, prec());
    auto fn = is_sin ? mpfr_sin : mpfr_cos;
    fn(a, lo_, MPFR_RNDD);
    fn(b, hi_, MPFR_RNDD);
    mpfr_min(r.lo_, a, b, MPFR_RNDD);
    fn(a, lo_, MPFR_RNDU);
    fn(b, hi_, MPFR_RNDU);
    mpfr_max(r.hi_, a, b, MPFR_RNDU);
    mpfr_clear(a);
    mpfr_clear(b);
    return r;
  }

  bool maybe_contains_trig_critical(bool for_sin) const {
    if (mpfr_inf_p(lo_) || mpfr_inf_p(hi_)) return true;
    // Critical points of sin are pi/2 + k*pi, of cos are k*pi. Compare
    // floor(x/pi - offset) at both endpoints with outward rounding.
    mpfr_t pi, t;
    mpfr_init2(pi, prec() + 8);
    mpfr_init2(t, prec() + 8);
    mpfr_const_pi(pi, MPFR_RNDD);
    mpfr_div(t, lo_, pi, MPFR_RNDD);
    if (for_sin) mpfr_sub_d(t, t, 0.5, MPFR_RNDD);
    mpfr_floor(t, t);
    const long na = mpfr_get_si(t, MPFR_RNDN);
    mpfr_const_pi(pi, MPFR_RNDU);
    mpfr_div(t, hi_, pi, MPFR_RNDU);
    if (for_sin) mpfr_sub_d(t, t, 0.5, MPFR_RNDU);
    mpfr_floor(t, t);
    const long nb = mpfr_get_si(t, MPFR_RNDN);
    mpfr_clear(pi);
    mpfr_clear(t);
    return na != nb;
  }

  static Rational endpoint_to_rational(mpfr_srcptr v) {
    if (mpfr_nan_p(v)) return Rational::nan();
    if (mpfr_inf_p(v)) return mpfr_sgn(v) > 0 ? Rational::pos_inf() : Rational::neg_inf();
    if (mpfr_zero_p(v)) return Rational(0);
    mpz_class z;
    const mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), v);
    return Rational(mpq_class(z)) * Rational::pow2(static_cast<long>(e));
  }

  mpfr_t lo_;
  mpfr_t hi_;
};

Iv selu_alpha_iv(long prec) { return Iv::from_rational(RealActivation::selu_alpha(), prec); }
Iv selu_lambda_iv(long prec) { return Iv::from_rational(RealActivation::selu_lambda(), prec); }

Iv sigmoid_iv(const Iv& x) {
  // 1 / (1 + e^-x); the denominator is in (1, inf).
  return x.neg().exp().add(Iv::from_long(1, x.prec())).recip();
}

Iv softplus_iv(const Iv& x) { return x.exp().log1p(); }

Iv gaussian_half_iv(const Iv& x) {
  const Iv half = Iv::from_rational(Rational(1, 2), x.prec());
  return x.mul(x).mul(half).neg().exp();
}

Iv gelu_iv(const Iv& x) {
  // x/2 * (1 + erf(x / sqrt 2))
  const long prec = x.prec();
  const Iv inv_sqrt2 = Iv::from_long(2, prec).sqrt().recip();
  const Iv half = Iv::from_rational(Rational(1, 2), prec);
  return x.mul(half).mul(x.mul(inv_sqrt2).erf().add(Iv::from_long(1, prec)));
}

Iv cosh_iv(const Iv& x) {
  const Iv half = Iv::from_rational(Rational(1, 2), x.prec());
  return x.exp().add(x.neg().exp()).mul(half);
}

}  // namespace

RealActivation RealActivation::from_name(std::string_view name) {
  static const std::array<std::pair<std::string_view, Kind>, 14> table = {{
      {"identity", Kind::Identity},
      {"relu", Kind::ReLU},
      {"elu", Kind::ELU},
      {"selu", Kind::SeLU},
      {"gelu", Kind::GELU},
      {"swish", Kind::Swish},
      {"mish", Kind::Mish},
      {"sin", Kind::Sin},
      {"cos", Kind::Cos},
      {"sigmoid", Kind::Sigmoid},
      {"tanh", Kind::Tanh},
      {"one_plus_square", Kind::OnePlusSquare},
      {"cosh", Kind::Cosh},
      {"gaussian_half", Kind::GaussianHalf},
  }};
  for (const auto& [n, k] : table) {
    if (n == name) return RealActivation(k);
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string RealActivation::name() const {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::ReLU: return "relu";
    case Kind::ELU: return "elu";
    case Kind::SeLU: return "selu";
    case Kind::GELU: return "gelu";
    case Kind::Swish: return "swish";
    case Kind::Mish: return "mish";
    case Kind::Sin: return "sin";
    case Kind::Cos: return "cos";
    case Kind::Sigmoid: return "sigmoid";
    case Kind::Tanh: return "tanh";
    case Kind::OnePlusSquare: return "one_plus_square";
    case Kind::Cosh: return "cosh";
    case Kind::GaussianHalf: return "gaussian_half";
  }
  return "?";
}

const Rational& RealActivation::selu_alpha() {
  static const Rational a = Rational::parse("1.6732632423543772848170429916717");
  return a;
}

const Rational& RealActivation::selu_lambda() {
  static const Rational l = Rational::parse("1.0507009873554804934193349852946");
  return l;
}

std::optional<Rational> RealActivation::exact_value(const Rational& x) const {
  if (!x.is_finite()) return std::nullopt;
  const bool zero = x.is_zero();
  switch (kind_) {
    case Kind::Identity: return x;
    case Kind::ReLU: return x.sign() > 0 ? x : Rational(0);
    case Kind::OnePlusSquare: return Rational(1) + x * x;
    case Kind::ELU:
      if (x.sign() >= 0) return x;
      return std::nullopt;
    case Kind::SeLU:
      if (x.sign() >= 0) return selu_lambda() * x;
      return std::nullopt;
    case Kind::GELU:
    case Kind::Swish:
    case Kind::Mish:
    case Kind::Sin:
    case Kind::Tanh:
      return zero ? std::optional<Rational>(Rational(0)) : std::nullopt;
    case Kind::Cos:
    case Kind::Cosh:
    case Kind::GaussianHalf:
      return zero ? std::optional<Rational>(Rational(1)) : std::nullopt;
    case Kind::Sigmoid:
      return zero ? std::optional<Rational>(Rational(1, 2)) : std::nullopt;
  }
  return std::nullopt;
}

RealInterval RealActivation::eval_interval(const Rational& x, long precision) const {
  if (auto ex = exact_value(x)) return RealInterval::point(*ex);
  const long prec = precision + 16;
  const Iv xi = Iv::from_rational(x, prec);
  Iv r(prec);
  switch (kind_) {
    case Kind::ELU: r = xi.expm1(); break;  // x < 0 here (x >= 0 is exact)
    case Kind::SeLU: r = xi.expm1().mul(selu_alpha_iv(prec)).mul(selu_lambda_iv(prec)); break;
    case Kind::GELU: r = gelu_iv(xi); break;
    case Kind::Swish: r = xi.mul(sigmoid_iv(xi)); break;
    case Kind::Mish: r = xi.mul(softplus_iv(xi).tanh()); break;
    case Kind::Sin: r = xi.sin_safe(); break;
    case Kind::Cos: r = xi.cos_safe(); break;
    case Kind::Sigmoid: r = sigmoid_iv(xi); break;
    case Kind::Tanh: r = xi.tanh(); break;
    case Kind::Cosh: r = cosh_iv(xi); break;
    case Kind::GaussianHalf: r = gaussian_half_iv(xi); break;
    default: throw std::logic_error("eval_interval: kind should have been exact");
  }
  return r.to_real_interval();
}

RealInterval RealActivation::deriv_interval(const Rational& x, long precision) const {
  const long prec = precision + 16;
  const Iv xi = Iv::from_rational(x, prec);
  const Iv one = Iv::from_long(1, prec);
  Iv r(prec);
  switch (kind_) {
    case Kind::Identity: return RealInterval::point(Rational(1));
    case Kind::ReLU:
      if (x.sign() > 0) return RealInterval::point(Rational(1));
      if (x.sign() < 0) return RealInterval::point(Rational(0));
      return {Rational(0), Rational(1), false};
    case Kind::OnePlusSquare: return RealInterval::point(Rational(2) * x);
    case Kind::ELU:
      if (x.sign() > 0) return RealInterval::point(Rational(1));
      r = xi.exp();
      break;
    case Kind::SeLU:
      if (x.sign() > 0) return RealInterval::point(selu_lambda());
      r = xi.exp().mul(selu_alpha_iv(prec)).mul(selu_lambda_iv(prec));
      break;
    case Kind::GELU: {
      // Phi(x) + x * pdf(x), Phi = (1 + erf(x/sqrt2))/2, pdf = e^(-x^2/2)/sqrt(2 pi).
      const Iv pi = Iv::constant(mpfr_const_pi, prec);
      const Iv inv_sqrt_2pi = pi.mul(Iv::from_long(2, prec)).sqrt().recip();
      const Iv pdf = gaussian_half_iv(xi).mul(inv_sqrt_2pi);
      const Iv inv_sqrt2 = Iv::from_long(2, prec).sqrt().recip();
      const Iv Phi =
          xi.mul(inv_sqrt2).erf().add(one).mul(Iv::from_rational(Rational(1, 2), prec));
      r = Phi.add(xi.mul(pdf));
      break;
    }
    case Kind::Swish: {
      const Iv s = sigmoid_iv(xi);
      r = s.mul(one.add(xi.mul(one.sub(s))));
      break;
    }
    case Kind::Mish: {
      const Iv sp = softplus_iv(xi);
      const Iv th = sp.tanh();
      const Iv sech2 = one.sub(th.mul(th));
      r = th.add(xi.mul(sech2).mul(sigmoid_iv(xi)));
      break;
    }
    case Kind::Sin: r = xi.cos_safe(); break;
    case Kind::Cos: r = xi.sin_safe().neg(); break;
    case Kind::Sigmoid: {
      const Iv s = sigmoid_iv(xi);
      r = s.mul(one.sub(s));
      break;
    }
    case Kind::Tanh: {
      const Iv th = xi.tanh();
      r = one.sub(th.mul(th));
      break;
    }
    case Kind::Cosh: r = xi.sinh(); break;
    case Kind::GaussianHalf: r = xi.neg().mul(gaussian_half_iv(xi)); break;
  }
  return r.to_real_interval();
}

std::optional<Rational> RealActivation::limit(bool at_pos_inf) const {
  switch (kind_) {
    case Kind::Identity: return at_pos_inf ? Rational::pos_inf() : Rational::neg_inf();
    case Kind::ReLU: return at_pos_inf ? Rational::pos_inf() : Rational(0);
    case Kind::ELU: return at_pos_inf ? Rational::pos_inf() : Rational(-1);
    case Kind::SeLU:
      return at_pos_inf ? Rational::pos_inf() : -(selu_lambda() * selu_alpha());
    case Kind::GELU:
    case Kind::Swish:
    case Kind::Mish: return at_pos_inf ? Rational::pos_inf() : Rational(0);
    case Kind::Sin:
    case Kind::Cos: return std::nullopt;
    case Kind::Sigmoid: return at_pos_inf ? Rational(1) : Rational(0);
    case Kind::Tanh: return at_pos_inf ? Rational(1) : Rational(-1);
    case Kind::OnePlusSquare:
    case Kind::Cosh: return Rational::pos_inf();
    case Kind::GaussianHalf: return Rational(0);
  }
  return std::nullopt;
}

std::optional<int> RealActivation::deriv_bound_coeff() const {
  switch (kind_) {
    case Kind::Cos: return 1;            // |sin x| <= |x|
    case Kind::OnePlusSquare: return 2;  // |2x|
    case Kind::Cosh: return 2;           // |sinh x| <= 2|x| for |x| <= 2.1
    case Kind::GaussianHalf: return 1;   // |x e^(-x^2/2)| <= |x|
    default: return std::nullopt;
  }
}

Rational RealActivation::range_bound_0_8() const {
  switch (kind_) {
    case Kind::Identity:
    case Kind::ReLU:
    case Kind::ELU:
    case Kind::GELU:
    case Kind::Swish:
    case Kind::Mish: return Rational(9);
    case Kind::SeLU: return selu_lambda() * Rational(8) + Rational(1);
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Sigmoid:
    case Kind::Tanh:
    case Kind::GaussianHalf: return Rational(1);
    case Kind::OnePlusSquare: return Rational(65);
    case Kind::Cosh: return Rational(1491);
  }
  return Rational(0);
}

bool RealActivation::is_monotone() const {
  switch (kind_) {
    case Kind::Identity:
    case Kind::ReLU:
    case Kind::ELU:
    case Kind::SeLU:
    case Kind::Sigmoid:
    case Kind::Tanh: return true;
    default: return false;
  }
}

RealInterval eval_real(const RealActivation& f, const Rational& x, long precision) {
  if (auto ex = f.exact_value(x)) return RealInterval::point(*ex);
  long prec = precision;
  const long cap = std::max<long>(8 * precision, 4096);
  while (true) {
    RealInterval iv = f.eval_interval(x, prec);
    if (iv.exact) return iv;
    if (iv.lo.is_finite() && iv.hi.is_finite()) {
      const Rational w = iv.width();
      Rational scale = iv.lo.abs();
      const Rational hi_abs = iv.hi.abs();
      if (hi_abs > scale) scale = hi_abs;
      const Rational tol = Rational::pow2(-precision);
      if (scale.is_zero() ? (w < tol) : (w < tol * scale)) return iv;
    }
    if (prec >= cap) return iv;
    prec *= 2;
  }
}

}  // namespace fplab
