#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "fplab/rational.hpp"

namespace fplab {

// An enclosure [lo, hi] of a real value; exact means lo == hi.
struct RealInterval {
  Rational lo;
  Rational hi;
  bool exact = false;

  static RealInterval point(Rational v) { return {v, v, true}; }
  Rational width() const { return hi - lo; }
  bool contains_zero() const { return lo.sign() <= 0 && hi.sign() >= 0; }
};

// Real-valued reference activation functions. Piecewise-rational kinds
// evaluate exactly; the rest evaluate to arbitrarily tight enclosures via
// MPFR with directed rounding.
class RealActivation {
public:
  enum class Kind {
    Identity,
    ReLU,
    ELU,
    SeLU,
    GELU,
    Swish,
    Mish,
    Sin,
    Cos,
    Sigmoid,
    Tanh,
    OnePlusSquare,  // 1 + x^2
    Cosh,
    GaussianHalf,   // e^(-x^2/2)
  };

  explicit RealActivation(Kind k) : kind_(k) {}
  static RealActivation from_name(std::string_view name);

  Kind kind() const { return kind_; }
  std::string name() const;

  // Exact rational value, when the function is rational at x (always for
  // Identity/ReLU/OnePlusSquare; on x >= 0 for ELU/SeLU; at x = 0 for the
  // transcendental kinds).
  std::optional<Rational> exact_value(const Rational& x) const;

  // Enclosure of rho(x) at the given working precision (bits).
  RealInterval eval_interval(const Rational& x, long precision) const;

  // Enclosure of rho'(x) (analytic derivative formulas).
  RealInterval deriv_interval(const Rational& x, long precision) const;

  // Limit at +inf / -inf as an extended rational; nullopt if none exists
  // (Sin, Cos), in which case the correctly rounded function maps the
  // infinity to NaN.
  std::optional<Rational> limit(bool at_pos_inf) const;

  // For the necessary-condition kinds: a registered constant c with
  // |rho'(x)| <= c*|x| near zero (|x| <= 1/4). nullopt for other kinds.
  std::optional<int> deriv_bound_coeff() const;

  // A rational upper bound of sup |rho| over [0, 8].
  Rational range_bound_0_8() const;

  // True if rho is nondecreasing on all of R.
  bool is_monotone() const;

  // Fixed SeLU constants (exact decimal rationals).
  static const Rational& selu_alpha();
  static const Rational& selu_lambda();

private:
  Kind kind_;
};

// An enclosure of rho(x) whose relative width is below 2^-precision
// (absolute when rho(x) could be zero); exact for rational kinds.
RealInterval eval_real(const RealActivation& f, const Rational& x, long precision);

}  // namespace fplab
