#pragma once

#include <cstdint>

namespace fplab {

// SplitMix64: the fixed generator used for every seeded choice in this
// project. Self-contained so that seeded artifacts are identical across
// platforms and standard libraries.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~0ull - (~0ull % bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  // Derive an independent stream for a labeled subtask.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t label) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull * (label + 1)));
    return g.next();
  }

private:
  std::uint64_t state_;
};

}  // namespace fplab
