#pragma once

#include <algorithm>
#include <cstdint>

#include "latflow/core/numeric.hpp"

namespace latflow {

/// Counter-based generator: draw i of stream s under seed S is
///
///   z = S ^ (s * 0xD1B54A32D192ED03) + (i + 1) * 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   out = z ^ (z >> 31)
///
/// i.e. the SplitMix64 output at position i. Any draw can be reproduced from
/// (seed, stream, index) alone, in any language.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(seed ^ (stream * 0xD1B54A32D192ED03ULL)) {}

  static std::uint64_t mix(std::uint64_t key, std::uint64_t index) {
    std::uint64_t z = key + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t at(std::uint64_t index) const { return mix(key_, index); }
  std::uint64_t next() { return at(counter_++); }

  /// Uniform on [0, 1) with 53 random bits; every value is a dyadic rational.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform Float on [0, 1) at the working precision, built from the eight
/// draws slot * 8 .. slot * 8 + 7 (most significant first) and truncated.
/// Raising the precision refines the same number instead of drawing a new one.
inline Float uniform_float(const CounterRng& rng, std::uint64_t slot) {
  const unsigned words = std::min<unsigned>(8, (precision_bits() + 70) / 64);
  Float u = 0;
  for (unsigned w = words; w-- > 0;) u = (u + Float(static_cast<unsigned long long>(rng.at(slot * 8 + w)))) / mp::ldexp(Float(1), 64);
  if (u >= 1) u = 1 - mp::ldexp(Float(1), -static_cast<int>(precision_bits()));
  return u;
}

}  // namespace latflow
