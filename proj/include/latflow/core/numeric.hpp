#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "latflow/core/errors.hpp"

namespace latflow {

namespace mp = boost::multiprecision;

/// Binary floating point with runtime-selected mantissa width.
using Float = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;
/// Exact rational, used wherever inputs are rational and no rounding is wanted.
using Rational = mp::number<mp::gmp_rational, mp::et_off>;
using BigInt = mp::number<mp::gmp_int, mp::et_off>;

inline constexpr unsigned kDefaultPrecisionBits = 128;

namespace detail {

inline unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

inline unsigned& requested_bits() {
  static unsigned bits = [] {
    Float::default_precision(digits10_for_bits(kDefaultPrecisionBits));
    return kDefaultPrecisionBits;
  }();
  return bits;
}

// Sets the default width before any Float in user code is constructed.
inline const unsigned startup_bits = requested_bits();

}  // namespace detail

/// Working precision P in bits for newly created Float values (MPFR rounds
/// the mantissa width up slightly, never down).
inline unsigned precision_bits() { return detail::requested_bits(); }

/// Sets the working precision for the lifetime of the scope.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits)
      : saved_bits_(precision_bits()), saved_digits_(Float::default_precision()) {
    if (bits < 53) throw DomainError("precision must be at least 53 bits");
    Float::default_precision(detail::digits10_for_bits(bits));
    detail::requested_bits() = bits;
  }
  ~PrecisionScope() {
    Float::default_precision(saved_digits_);
    detail::requested_bits() = saved_bits_;
  }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_bits_;
  unsigned saved_digits_;
};

/// 2^{-P/2}, the relative tolerance attached to the working precision.
inline Float half_precision_tolerance() {
  return mp::ldexp(Float(1), -static_cast<int>(precision_bits() / 2));
}

/// Re-rounds a value to the current working precision.
inline Float at_working_precision(const Float& x) {
  Float y;
  mpfr_set(y.backend().data(), x.backend().data(), MPFR_RNDN);
  return y;
}

inline Float to_float(const Rational& r) {
  Float out;
  mpfr_set_q(out.backend().data(), r.backend().data(), MPFR_RNDN);
  return out;
}

inline Float pi_float() { return boost::math::constants::pi<Float>(); }

inline BigInt round_to_bigint(const Float& x) {
  BigInt z;
  mpfr_get_z(z.backend().data(), x.backend().data(), MPFR_RNDN);
  return z;
}

inline BigInt floor_to_bigint(const Float& x) {
  BigInt z;
  mpfr_get_z(z.backend().data(), x.backend().data(), MPFR_RNDD);
  return z;
}

inline std::int64_t to_int64(const BigInt& z) {
  if (z > std::numeric_limits<std::int64_t>::max() || z < std::numeric_limits<std::int64_t>::min())
    throw NumericOverflow("integer does not fit in 64 bits: " + z.str());
  return z.convert_to<std::int64_t>();
}

inline std::int64_t round_to_int64(const Float& x) {
  if (!mp::isfinite(x)) throw NumericOverflow("rounding a non-finite value");
  return to_int64(round_to_bigint(x));
}

inline Float float_from_int(std::int64_t v) { return Float(static_cast<long long>(v)); }

/// Decimal string that reads back to the identical value at the same precision.
inline std::string to_decimal_string(const Float& x) {
  if (mp::isnan(x)) return "nan";
  if (mp::isinf(x)) return x > 0 ? "inf" : "-inf";
  const auto prec = mpfr_get_prec(x.backend().data());
  const auto digits = static_cast<std::streamsize>(std::ceil(prec * 0.30102999566398120)) + 2;
  return x.str(digits, std::ios_base::scientific);
}

inline Float parse_float(std::string_view text) {
  std::string s(text);
  if (s == "inf" || s == "+inf") return std::numeric_limits<Float>::infinity();
  if (s == "-inf") return -std::numeric_limits<Float>::infinity();
  Float out;
  if (mpfr_set_str(out.backend().data(), s.c_str(), 10, MPFR_RNDN) != 0)
    throw ParseError("not a decimal number: '" + s + "'");
  return out;
}

/// Parses "p/q", integers, and finite decimals ("1.25", "3e-4") exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ParseError("empty rational literal");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + s + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  BigInt mantissa = 0;
  long exponent = 0;
  bool any_digit = false;
  bool after_point = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      any_digit = true;
      if (after_point) --exponent;
    } else if (c == '.' && !after_point) {
      after_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw ParseError("not a number: '" + s + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw ParseError("trailing characters in '" + s + "'");
    try {
      std::size_t used = 0;
      exponent += std::stol(s.substr(pos + 1), &used);
      if (pos + 1 + used != s.size()) throw ParseError("bad exponent in '" + s + "'");
    } catch (const std::logic_error&) {
      throw ParseError("bad exponent in '" + s + "'");
    }
  }
  if (std::labs(exponent) > 100000) throw ParseError("exponent out of range in '" + s + "'");
  Rational value(mantissa);
  BigInt scale = mp::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
  value = exponent >= 0 ? value * scale : value / scale;
  return negative ? Rational(-value) : value;
}

inline std::string to_string(const Rational& r) {
  if (mp::denominator(r) == 1) return mp::numerator(r).str();
  return mp::numerator(r).str() + "/" + mp::denominator(r).str();
}

}  // namespace latflow
