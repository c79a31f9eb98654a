#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fplab/extfloat.hpp"
#include "fplab/real_activation.hpp"

namespace fplab {

// ulp of a real value r with |round(r)| finite: 2^(max(e, emin) - p) where
// 2^e <= |r| < 2^(e+1); ulp(0) = omega.
Rational ulp_of_real(const Rational& r, FloatFormat fmt);

// A total activation map on the extended floats of one format. Copies share
// the underlying (memoized) state; evaluation is deterministic.
class ActivationImpl {
public:
  enum class Mode { CorrectlyRounded, UlpPerturbed, Table, CompositeGelu };

  static ActivationImpl correctly_rounded(RealActivation f, FloatFormat fmt);
  // Deterministic per-input perturbation within K ulp of rho; requires
  // 0 <= K <= 10. K < 1/2 returns the correctly rounded base unchanged.
  // Inputs where the base rounds to zero stay pinned at zero.
  static ActivationImpl ulp_perturbed(RealActivation f, FloatFormat fmt, Rational k,
                                      std::uint64_t seed);
  static ActivationImpl table(FloatFormat fmt,
                              std::unordered_map<std::uint64_t, std::uint64_t> entries);
  static ActivationImpl table_from_file(FloatFormat fmt, const std::string& path);
  // In-format composite GELU (tanh form), for ulp measurement of a real
  // composite implementation.
  static ActivationImpl composite_gelu(FloatFormat fmt);

  // Spec strings: "cr:<kind>", "ulp:<kind>:K=<k>:seed=<n>", "table:<file>",
  // "impl:gelu".
  static ActivationImpl parse(std::string_view spec, FloatFormat fmt);

  ExtFloat operator()(const ExtFloat& x) const;

  FloatFormat format() const;
  Mode mode() const;
  std::optional<RealActivation> base() const;
  std::string spec_string() const;

private:
  struct State;
  explicit ActivationImpl(std::shared_ptr<State> s) : state_(std::move(s)) {}
  std::shared_ptr<State> state_;
};

struct UlpErrorReport {
  ExtFloat lo;
  ExtFloat hi;
  // Exact bounds on the max ulp error over the domain, plus the argmax.
  Rational max_err_lo;
  Rational max_err_hi;
  ExtFloat worst_input;
  bool any_nonfinite_output = false;
  std::vector<std::pair<ExtFloat, double>> per_input;  // approximate errors

  bool max_at_most(const Rational& k) const { return !any_nonfinite_output && max_err_hi <= k; }
};

// Max over [lo,hi]_F of |sigma(x) - rho(x)| / ulp(rho(x)), rho evaluated
// exactly (enclosures tightened until the error bounds are decisive).
// Throws if the correctly rounded reference leaves the finite range.
UlpErrorReport measure_ulp(const ActivationImpl& impl, const RealActivation& f,
                           const ExtFloat& lo, const ExtFloat& hi);

struct Condition1Constants {
  ExtFloat c0;
  ExtFloat c1;
  ExtFloat c2;
};

// Search for C0, C1, C2 with sigma(C0) = 0, 2^emin <= |sigma(C1)| < 5/4,
// |sigma(C2)| > (2^(-p-2))^+, and |Ci|, |Ci - Cj| <= 2^emax. Scans the
// format ascending by magnitude (exhaustive on narrow formats, a documented
// exponent grid on wide ones); returns the first witnesses.
std::optional<Condition1Constants> find_condition1_constants(const ActivationImpl& sigma);

struct Condition2Report {
  bool ulp_ok = false;
  Rational measured_ulp_err;
  bool range_ok = false;
  bool growth_ok = false;  // |sigma(x)| <= 2|rho(x)| for |x| >= 1
  std::optional<ExtFloat> growth_witness;
  bool zero_ok = false;
  std::optional<ExtFloat> c0;

  bool pass() const { return ulp_ok && range_ok && growth_ok && zero_ok; }
};

// Verify the four-clause implementation condition at error budget K:
// K-ulp accuracy on [0,8], |rho([0,8])| <= 2^emax, |sigma(x)| <= 2|rho(x)|
// for |x| >= 1 (exhaustive on narrow formats, grid-sampled on wide), and
// sigma(C0) = 0 for some C0.
Condition2Report check_condition2(const RealActivation& rho, const ActivationImpl& sigma,
                                  const Rational& k);

// The documented sample grid for wide formats: for every exponent and both
// signs, 2^min(p,6) evenly spaced mantissas (plus the binade endpoints).
std::vector<ExtFloat> sample_grid(FloatFormat fmt, const ExtFloat& lo, const ExtFloat& hi);

}  // namespace fplab
