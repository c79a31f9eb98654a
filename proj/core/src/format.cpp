#include "fplab/format.hpp"

#include <charconv>

namespace fplab {

FloatFormat::FloatFormat(int mantissa_bits, int exponent_bits)
    : p_(mantissa_bits), q_(exponent_bits) {
  if (q_ < 4 || q_ > 11) {
    throw std::invalid_argument("exponent bit-count q must be in [4, 11], got q=" +
                                std::to_string(q_));
  }
  const int cap = (1 << (q_ - 1)) - 3;
  if (p_ < 2 || p_ > cap) {
    throw std::invalid_argument("mantissa bit-count p must satisfy 2 <= p <= 2^(q-1)-3 = " +
                                std::to_string(cap) + ", got p=" + std::to_string(p_));
  }
  if (total_bits() > 64) {
    throw std::invalid_argument("format wider than 64 bits is not supported");
  }
}

FloatFormat FloatFormat::parse(std::string_view spec) {
  if (spec == "fp16") return FloatFormat(10, 5);
  if (spec == "bf16") return FloatFormat(7, 8);
  if (spec == "fp32") return FloatFormat(23, 8);
  if (spec == "fp64") return FloatFormat(52, 11);
  if (spec == "e4m3") return FloatFormat(3, 4);
  if (spec == "e5m2") return FloatFormat(2, 5);

  if (spec.size() >= 4 && spec[0] == 'p') {
    const auto qpos = spec.find('q');
    if (qpos != std::string_view::npos && qpos > 1) {
      int p = 0, q = 0;
      const auto* pb = spec.data() + 1;
      const auto* pe = spec.data() + qpos;
      const auto* qb = spec.data() + qpos + 1;
      const auto* qe = spec.data() + spec.size();
      auto r1 = std::from_chars(pb, pe, p);
      auto r2 = std::from_chars(qb, qe, q);
      if (r1.ec == std::errc() && r1.ptr == pe && r2.ec == std::errc() && r2.ptr == qe) {
        return FloatFormat(p, q);
      }
    }
  }
  throw std::invalid_argument("cannot parse format spec '" + std::string(spec) + "'");
}

std::string FloatFormat::spec_string() const {
  return "p" + std::to_string(p_) + "q" + std::to_string(q_);
}

}  // namespace fplab
