#include "fplab/activation_impl.hpp"

#include <algorithm>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fplab/rng.hpp"

namespace fplab {

Rational ulp_of_real(const Rational& r, FloatFormat fmt) {
  if (!r.is_finite()) throw std::domain_error("ulp_of_real on non-finite value");
  if (r.is_zero()) return Rational::pow2(fmt.emin() - fmt.p());
  const long e = r.floor_log2_abs();
  return Rational::pow2(std::max<long>(e, fmt.emin()) - fmt.p());
}

namespace {

long ziv_start_precision(FloatFormat fmt) { return std::max(fmt.p() + 8, 32); }
long ziv_cap_precision(FloatFormat fmt) { return 16 * (fmt.p() + fmt.q()); }

// Correctly rounded value of f at finite x, by precision escalation.
ExtFloat correctly_rounded_value(const RealActivation& f, FloatFormat fmt, const Rational& xr,
                                 const ExtFloat& x_for_error) {
  if (auto ex = f.exact_value(xr)) return round_to_format(*ex, fmt);
  long prec = ziv_start_precision(fmt);
  const long cap = ziv_cap_precision(fmt);
  while (true) {
    const RealInterval iv = f.eval_interval(xr, prec);
    const ExtFloat rlo = round_to_format(iv.lo, fmt);
    const ExtFloat rhi = round_to_format(iv.hi, fmt);
    if (same_encoding(rlo, rhi)) return rlo;
    if (prec >= cap) {
      throw std::runtime_error("correct rounding undecided at precision cap (" +
                               std::to_string(cap) + " bits) for " + f.name() + " at " +
                               x_for_error.to_string() + "; possible hard-to-round point");
    }
    prec *= 2;
  }
}

// Enclosure of rho(x) tight enough that its binade (and so ulp) is
// unambiguous, assuming round(rho(x)) is finite and nonzero.
RealInterval enclose_with_known_binade(const RealActivation& f, FloatFormat fmt,
                                       const Rational& xr) {
  if (auto ex = f.exact_value(xr)) return RealInterval::point(*ex);
  long prec = ziv_start_precision(fmt) * 2;
  const long cap = 64 * (fmt.p() + fmt.q());
  while (true) {
    const RealInterval iv = f.eval_interval(xr, prec);
    if (iv.lo.is_finite() && iv.hi.is_finite() && iv.lo.sign() == iv.hi.sign() &&
        iv.lo.sign() != 0) {
      if (iv.lo.floor_log2_abs() == iv.hi.floor_log2_abs()) return iv;
    }
    if (prec >= cap) {
      throw std::runtime_error("cannot isolate the binade of " + f.name() +
                               " (value may be an exact power of two)");
    }
    prec *= 2;
  }
}

// Like the above, but when the value hugs a power of two beyond the
// precision cap (e.g. tanh at saturation), fall back to a tight enclosure
// and the smaller candidate ulp. An under-estimated ulp only shrinks the
// perturbation ball, never invalidates it.
std::pair<RealInterval, Rational> enclose_for_perturbation(const RealActivation& f,
                                                           FloatFormat fmt,
                                                           const Rational& xr) {
  if (auto ex = f.exact_value(xr)) {
    const RealInterval iv = RealInterval::point(*ex);
    return {iv, ulp_of_real(iv.lo, fmt)};
  }
  long prec = ziv_start_precision(fmt) * 2;
  const long cap = 64 * (fmt.p() + fmt.q());
  // Once the enclosure is far below any representable ulp there is nothing
  // left to learn from more precision.
  const Rational negligible = Rational::pow2(fmt.emin() - fmt.p() - 8);
  while (true) {
    const RealInterval iv = f.eval_interval(xr, prec);
    if (iv.lo.is_finite() && iv.hi.is_finite() && iv.lo.sign() == iv.hi.sign() &&
        iv.lo.sign() != 0) {
      const bool same_binade = iv.lo.floor_log2_abs() == iv.hi.floor_log2_abs();
      if (same_binade || prec >= cap || iv.width() < negligible) {
        const Rational u_lo = ulp_of_real(iv.lo, fmt);
        const Rational u_hi = ulp_of_real(iv.hi, fmt);
        return {iv, std::min(u_lo, u_hi)};
      }
    }
    if (prec >= cap) {
      throw std::runtime_error("perturbation reference undecided at cap for " + f.name());
    }
    prec *= 2;
  }
}

}  // namespace

struct ActivationImpl::State {
  Mode mode;
  FloatFormat fmt;
  std::optional<RealActivation> f;
  Rational k;
  std::uint64_t seed = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> table;
  std::string table_path;
  mutable std::unordered_map<std::uint64_t, std::uint64_t> cache;

  State(Mode m, FloatFormat ft) : mode(m), fmt(ft) {}

  ExtFloat eval(const ExtFloat& x) const;
  ExtFloat eval_correctly_rounded(const ExtFloat& x) const;
  ExtFloat eval_perturbed(const ExtFloat& x) const;
  ExtFloat eval_composite_gelu(const ExtFloat& x) const;
};

ExtFloat ActivationImpl::State::eval(const ExtFloat& x) const {
  if (x.format() != fmt) throw std::invalid_argument("activation input format mismatch");
  if (x.is_nan()) return ExtFloat::nan(fmt);
  const auto it = cache.find(x.bits());
  if (it != cache.end()) return ExtFloat(fmt, it->second);
  ExtFloat out = ExtFloat::nan(fmt);
  switch (mode) {
    case Mode::CorrectlyRounded: out = eval_correctly_rounded(x); break;
    case Mode::UlpPerturbed: out = eval_perturbed(x); break;
    case Mode::CompositeGelu: out = eval_composite_gelu(x); break;
    case Mode::Table: {
      const auto t = table.find(x.bits());
      out = (t == table.end()) ? ExtFloat::nan(fmt) : ExtFloat(fmt, t->second);
      break;
    }
  }
  cache.emplace(x.bits(), out.bits());
  return out;
}

ExtFloat ActivationImpl::State::eval_correctly_rounded(const ExtFloat& x) const {
  if (x.is_inf()) {
    const auto lim = f->limit(!x.sign_bit());
    if (!lim) return ExtFloat::nan(fmt);
    return round_to_format(*lim, fmt);
  }
  return correctly_rounded_value(*f, fmt, x.to_rational(), x);
}

ExtFloat ActivationImpl::State::eval_perturbed(const ExtFloat& x) const {
  const ExtFloat base = eval_correctly_rounded(x);
  if (k < Rational(1, 2)) return base;
  if (!base.is_finite() || base.is_zero()) return base;  // zeros stay pinned
  const Rational xr = x.to_rational();

  // Candidate floats y with |y - rho(x)| <= K * ulp(rho(x)), certainly.
  auto [iv, u] = enclose_for_perturbation(*f, fmt, xr);
  long extra = 0;
  while (true) {
    const Rational ku = k * u;
    std::vector<ExtFloat> certain;
    bool uncertain = false;
    auto classify = [&](const ExtFloat& y) {
      const Rational yr = y.to_rational();
      const bool cert = (yr - iv.lo) <= ku && (iv.hi - yr) <= ku;
      const bool poss = (yr - iv.hi) <= ku && (iv.lo - yr) <= ku;
      if (cert) {
        certain.push_back(y);
      } else if (poss) {
        uncertain = true;
      }
      return poss;
    };
    // Walk down from round(lo), then up, while membership is possible.
    ExtFloat start = round_to_format(iv.lo, fmt);
    if (start.is_inf()) start = start.sign_bit() ? negate(ExtFloat::max_finite(fmt))
                                                 : ExtFloat::max_finite(fmt);
    for (ExtFloat y = start; y.is_finite() && classify(y); y = next_down(y)) {
    }
    for (ExtFloat y = next_up(start); y.is_finite() && classify(y); y = next_up(y)) {
    }
    if (!uncertain) {
      if (certain.empty()) throw std::logic_error("perturbation ball has no candidates");
      std::sort(certain.begin(), certain.end(),
                [](const ExtFloat& a, const ExtFloat& b) { return real_less(a, b); });
      SplitMix64 rng(SplitMix64::mix(seed, x.bits()));
      return certain[rng.below(certain.size())];
    }
    if (iv.exact || extra > 8) {
      throw std::runtime_error("perturbation ball boundary undecided for " + f->name() +
                               " at " + x.to_string());
    }
    // Tighten the enclosure and retry.
    ++extra;
    const long prec = (64 << extra) * (fmt.p() + fmt.q());
    iv = f->eval_interval(xr, prec);
  }
}

ExtFloat ActivationImpl::State::eval_composite_gelu(const ExtFloat& x) const {
  // 0.5 * x * (1 + tanh(sqrt(2/pi) * (x + 0.044715 * x^3))), evaluated
  // entirely in the target format with a correctly rounded tanh kernel.
  if (x.is_inf()) return x.sign_bit() ? ExtFloat::zero(fmt) : x;
  static const Rational c1 = Rational::parse("0.7978845608028654");
  static const Rational c2 = Rational::parse("0.044715");
  const ExtFloat c1f = round_to_format(c1, fmt);
  const ExtFloat c2f = round_to_format(c2, fmt);
  const ExtFloat half = round_to_format(Rational(1, 2), fmt);
  const ExtFloat one = round_to_format(Rational(1), fmt);
  const ExtFloat x2 = fmul(x, x);
  const ExtFloat x3 = fmul(x2, x);
  const ExtFloat inner = fmul(c1f, fadd(x, fmul(c2f, x3)));
  const ExtFloat th = correctly_rounded_value(RealActivation(RealActivation::Kind::Tanh), fmt,
                                              inner.is_finite() ? inner.to_rational()
                                                                : Rational(0),
                                              inner);
  const ExtFloat th2 = inner.is_finite() ? th
                       : inner.sign_bit() ? round_to_format(Rational(-1), fmt)
                                          : round_to_format(Rational(1), fmt);
  return fmul(fmul(half, x), fadd(one, th2));
}

ActivationImpl ActivationImpl::correctly_rounded(RealActivation f, FloatFormat fmt) {
  auto s = std::make_shared<State>(Mode::CorrectlyRounded, fmt);
  s->f = f;
  return ActivationImpl(std::move(s));
}

ActivationImpl ActivationImpl::ulp_perturbed(RealActivation f, FloatFormat fmt, Rational k,
                                             std::uint64_t seed) {
  if (k < Rational(0) || k > Rational(10)) {
    throw std::invalid_argument("ulp perturbation radius K must be in [0, 10]");
  }
  auto s = std::make_shared<State>(Mode::UlpPerturbed, fmt);
  s->f = f;
  s->k = k;
  s->seed = seed;
  return ActivationImpl(std::move(s));
}

ActivationImpl ActivationImpl::table(FloatFormat fmt,
                                     std::unordered_map<std::uint64_t, std::uint64_t> entries) {
  auto s = std::make_shared<State>(Mode::Table, fmt);
  s->table = std::move(entries);
  return ActivationImpl(std::move(s));
}

ActivationImpl ActivationImpl::table_from_file(FloatFormat fmt, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file " + path);
  std::unordered_map<std::uint64_t, std::uint64_t> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a >> b)) throw std::runtime_error("bad table line: " + line);
    entries[std::stoull(a, nullptr, 16)] = std::stoull(b, nullptr, 16);
  }
  auto impl = table(fmt, std::move(entries));
  impl.state_->table_path = path;
  return impl;
}

ActivationImpl ActivationImpl::composite_gelu(FloatFormat fmt) {
  auto s = std::make_shared<State>(Mode::CompositeGelu, fmt);
  s->f = RealActivation(RealActivation::Kind::GELU);
  return ActivationImpl(std::move(s));
}

ActivationImpl ActivationImpl::parse(std::string_view spec, FloatFormat fmt) {
  if (spec.rfind("cr:", 0) == 0) {
    return correctly_rounded(RealActivation::from_name(spec.substr(3)), fmt);
  }
  if (spec.rfind("table:", 0) == 0) {
    return table_from_file(fmt, std::string(spec.substr(6)));
  }
  if (spec == "impl:gelu") return composite_gelu(fmt);
  if (spec.rfind("ulp:", 0) == 0) {
    std::string rest(spec.substr(4));
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto colon = rest.find(':', pos);
      parts.push_back(rest.substr(pos, colon == std::string::npos ? colon : colon - pos));
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
    if (parts.empty()) throw std::invalid_argument("bad activation spec");
    Rational k(2);
    std::uint64_t seed = 0;
    for (std::size_t t = 1; t < parts.size(); ++t) {
      if (parts[t].rfind("K=", 0) == 0) {
        k = Rational::parse(parts[t].substr(2));
      } else if (parts[t].rfind("seed=", 0) == 0) {
        seed = std::stoull(parts[t].substr(5));
      } else {
        throw std::invalid_argument("bad activation spec field '" + parts[t] + "'");
      }
    }
    return ulp_perturbed(RealActivation::from_name(parts[0]), fmt, k, seed);
  }
  throw std::invalid_argument("cannot parse activation spec '" + std::string(spec) + "'");
}

ExtFloat ActivationImpl::operator()(const ExtFloat& x) const { return state_->eval(x); }

FloatFormat ActivationImpl::format() const { return state_->fmt; }
ActivationImpl::Mode ActivationImpl::mode() const { return state_->mode; }
std::optional<RealActivation> ActivationImpl::base() const { return state_->f; }

std::string ActivationImpl::spec_string() const {
  switch (state_->mode) {
    case Mode::CorrectlyRounded: return "cr:" + state_->f->name();
    case Mode::UlpPerturbed:
      return "ulp:" + state_->f->name() + ":K=" + state_->k.to_string() +
             ":seed=" + std::to_string(state_->seed);
    case Mode::Table: return "table:" + state_->table_path;
    case Mode::CompositeGelu: return "impl:gelu";
  }
  return "?";
}

UlpErrorReport measure_ulp(const ActivationImpl& impl, const RealActivation& f,
                           const ExtFloat& lo, const ExtFloat& hi) {
  const FloatFormat fmt = impl.format();
  UlpErrorReport rep{lo,
                     hi,
                     Rational(0),
                     Rational(0),
                     lo,
                     false,
                     {}};
  for (const ExtFloat& x : enumerate(lo, hi)) {
    const Rational xr = x.to_rational();
    const auto exact = f.exact_value(xr);
    RealInterval iv = exact ? RealInterval::point(*exact)
                            : eval_real(f, xr, 2 * (fmt.p() + fmt.q()) + 48);
    // Precondition: the correctly rounded reference stays finite.
    if (!round_to_format(iv.lo, fmt).is_finite() || !round_to_format(iv.hi, fmt).is_finite()) {
      throw std::domain_error("ulp reference overflows at " + x.to_string());
    }
    const ExtFloat sx = impl(x);
    if (!sx.is_finite()) {
      rep.any_nonfinite_output = true;
      rep.worst_input = x;
      rep.per_input.emplace_back(x, std::numeric_limits<double>::infinity());
      continue;
    }
    // Pin the binade of the reference so ulp(rho(x)) is unambiguous.
    if (!iv.exact && (iv.contains_zero() ||
                      iv.lo.floor_log2_abs() != iv.hi.floor_log2_abs())) {
      iv = enclose_with_known_binade(f, fmt, xr);
    }
    const Rational u = ulp_of_real(iv.lo, fmt);
    const Rational y = sx.to_rational();
    Rational d_lo(0), d_hi(0);
    if (y >= iv.hi) {
      d_lo = y - iv.hi;
      d_hi = y - iv.lo;
    } else if (y <= iv.lo) {
      d_lo = iv.lo - y;
      d_hi = iv.hi - y;
    } else {
      d_lo = Rational(0);
      d_hi = std::max(iv.hi - y, y - iv.lo);
    }
    const Rational inv_u(mpq_class(1) / u.value());
    const Rational err_lo = d_lo * inv_u;
    const Rational err_hi = d_hi * inv_u;
    rep.per_input.emplace_back(x, err_hi.to_double());
    if (err_hi > rep.max_err_hi) {
      rep.max_err_hi = err_hi;
      rep.worst_input = x;
    }
    if (err_lo > rep.max_err_lo) rep.max_err_lo = err_lo;
  }
  return rep;
}

namespace {

bool within_emax(const ExtFloat& x) {
  const Rational bound = Rational::pow2(x.format().emax());
  return x.to_rational().abs() <= bound;
}

}  // namespace

std::vector<ExtFloat> sample_grid(FloatFormat fmt, const ExtFloat& lo, const ExtFloat& hi) {
  std::vector<ExtFloat> out;
  const int step_bits = std::max(0, fmt.p() - 6);
  const std::uint64_t step = 1ull << step_bits;
  for (int sgn = 0; sgn < 2; ++sgn) {
    for (int e = 0; e < (1 << fmt.q()) - 1; ++e) {
      for (std::uint64_t m = 0;; m += step) {
        if (m > fmt.mantissa_mask()) break;
        std::uint64_t bits = (static_cast<std::uint64_t>(e) << fmt.p()) | m;
        if (sgn) bits |= fmt.sign_mask();
        const ExtFloat x(fmt, bits);
        if (!x.is_finite()) continue;
        if (real_less(x, lo) || real_less(hi, x)) continue;
        out.push_back(x);
        if (m == fmt.mantissa_mask()) break;
      }
      // Binade top.
      std::uint64_t bits = (static_cast<std::uint64_t>(e) << fmt.p()) | fmt.mantissa_mask();
      if (sgn) bits |= fmt.sign_mask();
      const ExtFloat x(fmt, bits);
      if (x.is_finite() && !real_less(x, lo) && !real_less(hi, x)) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ExtFloat& a, const ExtFloat& b) { return real_less(a, b); });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const ExtFloat& a, const ExtFloat& b) { return real_equals(a, b); }),
            out.end());
  return out;
}

std::optional<Condition1Constants> find_condition1_constants(const ActivationImpl& sigma) {
  const FloatFormat fmt = sigma.format();
  const bool exhaustive = fmt.total_bits() <= 16;
  std::vector<ExtFloat> scan;
  if (exhaustive) {
    scan = enumerate_by_magnitude(fmt);
  } else {
    scan = sample_grid(fmt, negate(ExtFloat::max_finite(fmt)), ExtFloat::max_finite(fmt));
    std::sort(scan.begin(), scan.end(), [](const ExtFloat& a, const ExtFloat& b) {
      return real_less(abs(a), abs(b));
    });
  }
  const Rational five_fourths(5, 4);
  const Rational two_emin = Rational::pow2(fmt.emin());
  const Rational c2_floor =
      next_up(ExtFloat::pow2(fmt, -fmt.p() - 2)).to_rational();

  constexpr std::size_t kCandidateCap = 512;
  std::vector<ExtFloat> c0s, c1s, c2s;
  for (const ExtFloat& x : scan) {
    if (!within_emax(x)) continue;
    const ExtFloat y = sigma(x);
    if (!y.is_finite()) continue;
    const Rational ay = y.to_rational().abs();
    if (c0s.size() < kCandidateCap && ay.is_zero()) c0s.push_back(x);
    if (c1s.size() < kCandidateCap && ay >= two_emin && ay < five_fourths) c1s.push_back(x);
    if (c2s.size() < kCandidateCap && ay > c2_floor) c2s.push_back(x);
    if (c0s.size() >= kCandidateCap && c1s.size() >= kCandidateCap &&
        c2s.size() >= kCandidateCap) {
      break;
    }
  }
  const Rational gap = Rational::pow2(fmt.emax());
  auto ok_pair = [&](const ExtFloat& a, const ExtFloat& b) {
    return (a.to_rational() - b.to_rational()).abs() <= gap;
  };
  for (const ExtFloat& c0 : c0s) {
    for (const ExtFloat& c1 : c1s) {
      if (!ok_pair(c0, c1)) continue;
      for (const ExtFloat& c2 : c2s) {
        if (ok_pair(c0, c2) && ok_pair(c1, c2)) return Condition1Constants{c0, c1, c2};
      }
    }
  }
  return std::nullopt;
}

Condition2Report check_condition2(const RealActivation& rho, const ActivationImpl& sigma,
                                  const Rational& k) {
  if (k > Rational(10)) throw std::invalid_argument("Condition-2 budget K must be <= 10");
  const FloatFormat fmt = sigma.format();
  Condition2Report rep;

  const ExtFloat zero = ExtFloat::zero(fmt);
  const ExtFloat eight = ExtFloat::from_int(fmt, 8);
  const UlpErrorReport ulp_rep = measure_ulp(sigma, rho, zero, eight);
  rep.measured_ulp_err = ulp_rep.max_err_hi;
  rep.ulp_ok = ulp_rep.max_at_most(k);

  rep.range_ok = rho.range_bound_0_8() <= Rational::pow2(fmt.emax());

  // |sigma(x)| <= 2 |rho(x)| for |x| >= 1.
  const bool exhaustive = fmt.total_bits() <= 16;
  std::vector<ExtFloat> xs;
  const ExtFloat one = ExtFloat::from_int(fmt, 1);
  const ExtFloat top = ExtFloat::max_finite(fmt);
  if (exhaustive) {
    for (const ExtFloat& x : enumerate(one, top)) {
      xs.push_back(x);
      xs.push_back(negate(x));
    }
  } else {
    for (const ExtFloat& x : sample_grid(fmt, one, top)) {
      xs.push_back(x);
      xs.push_back(negate(x));
    }
  }
  rep.growth_ok = true;
  for (const ExtFloat& x : xs) {
    const ExtFloat sx = sigma(x);
    const Rational xr = x.to_rational();
    if (sx.is_nan()) {
      rep.growth_ok = false;
      rep.growth_witness = x;
      break;
    }
    long prec = 2 * (fmt.p() + fmt.q()) + 32;
    bool decided = false;
    for (int round = 0; round < 6 && !decided; ++round, prec *= 2) {
      const auto exact = rho.exact_value(xr);
      const RealInterval iv = exact ? RealInterval::point(*exact) : rho.eval_interval(xr, prec);
      const Rational bound_lo =
          iv.contains_zero() ? Rational(0) : Rational(2) * std::min(iv.lo.abs(), iv.hi.abs());
      const Rational bound_hi = Rational(2) * std::max(iv.lo.abs(), iv.hi.abs());
      const Rational sabs =
          sx.is_inf() ? Rational::pos_inf() : sx.to_rational().abs();
      if (sabs.is_inf()) {
        decided = true;
        if (!(iv.lo.is_inf() || iv.hi.is_inf())) {
          rep.growth_ok = false;
          rep.growth_witness = x;
        }
        break;
      }
      if (sabs <= bound_lo) {
        decided = true;  // certainly within bound
      } else if (sabs > bound_hi) {
        decided = true;
        rep.growth_ok = false;
        rep.growth_witness = x;
      } else if (iv.exact) {
        decided = true;
        if (sabs > Rational(2) * iv.lo.abs()) {
          rep.growth_ok = false;
          rep.growth_witness = x;
        }
      }
    }
    if (!decided) {
      throw std::runtime_error("growth clause undecided at " + x.to_string());
    }
    if (!rep.growth_ok) break;
  }

  // sigma(C0) = 0 for some C0.
  std::vector<ExtFloat> scan =
      exhaustive ? enumerate_by_magnitude(fmt)
                 : sample_grid(fmt, negate(ExtFloat::max_finite(fmt)), ExtFloat::max_finite(fmt));
  for (const ExtFloat& x : scan) {
    if (sigma(x).is_zero()) {
      rep.zero_ok = true;
      rep.c0 = x;
      break;
    }
  }
  return rep;
}

}  // namespace fplab
