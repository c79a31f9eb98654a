#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fplab {

// A binary floating-point format with p mantissa bits and q exponent bits
// (plus one sign bit). Finite values are
//   s * 1.m1..mp * 2^e   for e in [emin, emax], and
//   s * 0.m1..mp * 2^emin (subnormals),
// with emin = -2^(q-1)+2 and emax = 2^(q-1)-1. The all-ones exponent field
// encodes infinities and NaN, IEEE style.
class FloatFormat {
public:
  FloatFormat(int mantissa_bits, int exponent_bits);

  // Spec strings: "pNqM" plus the aliases fp16, bf16, fp32, fp64, e4m3, e5m2.
  static FloatFormat parse(std::string_view spec);

  int p() const { return p_; }
  int q() const { return q_; }
  int emin() const { return -(1 << (q_ - 1)) + 2; }
  int emax() const { return (1 << (q_ - 1)) - 1; }
  int bias() const { return (1 << (q_ - 1)) - 1; }
  int total_bits() const { return p_ + q_ + 1; }

  // Exponent of the smallest positive (subnormal) value omega = 2^(emin-p).
  int omega_exp2() const { return emin() - p_; }

  // Bit-field layout: [sign | exponent (q bits) | mantissa (p bits)].
  std::uint64_t mantissa_mask() const { return (p_ == 64) ? ~0ull : ((1ull << p_) - 1); }
  std::uint64_t exponent_mask() const { return ((1ull << q_) - 1) << p_; }
  std::uint64_t sign_mask() const { return 1ull << (p_ + q_); }
  std::uint64_t bits_mask() const {
    return (total_bits() == 64) ? ~0ull : ((1ull << total_bits()) - 1);
  }

  std::string spec_string() const;

  bool operator==(const FloatFormat& o) const { return p_ == o.p_ && q_ == o.q_; }
  bool operator!=(const FloatFormat& o) const { return !(*this == o); }

private:
  int p_;
  int q_;
};

}  // namespace fplab
