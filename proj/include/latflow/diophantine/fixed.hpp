#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "latflow/core/scalar.hpp"

namespace latflow {

/// Residue in R/Z held as a 64L-bit binary fraction; addition wraps, so sums
/// are reduced mod 1 for free. Word 0 is least significant.
template <int L>
struct FixedFrac {
  std::array<std::uint64_t, L> w{};

  static constexpr int bits = 64 * L;

  /// Fraction x - floor(x), rounded to the nearest multiple of 2^{-64L}.
  static FixedFrac from_float(const Float& x) {
    Float f = x - mp::floor(x);
    return from_scaled(round_to_bigint(Float(mp::ldexp(f, bits))));
  }

  static FixedFrac from_rational(const Rational& x) {
    const BigInt num = mp::numerator(x), den = mp::denominator(x);
    BigInt r = num % den;
    if (r < 0) r += den;
    // round(r * 2^bits / den)
    const BigInt scaled = ((r << bits) * 2 + den) / (den * 2);
    return from_scaled(scaled);
  }

  static FixedFrac from_units(std::uint64_t u) {
    FixedFrac f;
    f.w[0] = u;
    return f;
  }

  static FixedFrac from_scaled(BigInt v) {
    const BigInt mod = BigInt(1) << bits;
    v %= mod;
    if (v < 0) v += mod;
    FixedFrac f;
    for (int i = 0; i < L; ++i) {
      f.w[i] = static_cast<std::uint64_t>((v & BigInt(~std::uint64_t{0})).template convert_to<unsigned long long>());
      v >>= 64;
    }
    return f;
  }

  FixedFrac& operator+=(const FixedFrac& o) {
    unsigned __int128 carry = 0;
    for (int i = 0; i < L; ++i) {
      const unsigned __int128 s = static_cast<unsigned __int128>(w[i]) + o.w[i] + carry;
      w[i] = static_cast<std::uint64_t>(s);
      carry = s >> 64;
    }
    return *this;
  }

  FixedFrac operator+(const FixedFrac& o) const {
    FixedFrac r = *this;
    r += o;
    return r;
  }

  FixedFrac negated() const {
    FixedFrac r;
    unsigned __int128 carry = 1;
    for (int i = 0; i < L; ++i) {
      const unsigned __int128 s = static_cast<unsigned __int128>(~w[i]) + carry;
      r.w[i] = static_cast<std::uint64_t>(s);
      carry = s >> 64;
    }
    return r;
  }

  /// Distance to the nearest integer, in [0, 1/2].
  FixedFrac dist() const { return (w[L - 1] >> 63) ? negated() : *this; }

  friend bool operator==(const FixedFrac& a, const FixedFrac& b) { return a.w == b.w; }

  friend bool operator<(const FixedFrac& a, const FixedFrac& b) {
    for (int i = L - 1; i >= 0; --i)
      if (a.w[i] != b.w[i]) return a.w[i] < b.w[i];
    return false;
  }

  Float to_float() const {
    Float v = 0;
    for (int i = L - 1; i >= 0; --i) v = v * mp::ldexp(Float(1), 64) + Float(static_cast<unsigned long long>(w[i]));
    return mp::ldexp(v, -bits);
  }

  /// Top 128 bits as a long double.
  long double to_long_double() const {
    long double v = std::ldexp(static_cast<long double>(w[L - 1]), -64);
    if constexpr (L > 1) v += std::ldexp(static_cast<long double>(w[L - 2]), -128);
    return v;
  }

  static FixedFrac max_value() {
    FixedFrac f;
    f.w.fill(~std::uint64_t{0});
    return f;
  }
};

template <int L>
FixedFrac<L> to_fixed(const Scalar& s) {
  return s.is_exact() ? FixedFrac<L>::from_rational(s.rational()) : FixedFrac<L>::from_float(s.to_float());
}

}  // namespace latflow
