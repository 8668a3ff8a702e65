#pragma once

#include <cstdint>
#include <vector>

#include "latflow/lattice/enumerate.hpp"
#include "latflow/lattice/lattice_state.hpp"

namespace latflow {

struct ShortVectorResult {
  std::vector<std::int64_t> vector;  // coefficients in the given basis
  Scalar length;
  bool certified = false;
  std::uint64_t nodes = 0;
};

/// Shortest nonzero vector of the lattice spanned by the columns of `basis`
/// (rows >= cols). Budget exhaustion returns the best vector found so far,
/// uncertified.
inline ShortVectorResult shortest_vector(const Matrix<Float>& basis, std::uint64_t budget = kDefaultNodeBudget) {
  Enumerator en = [&] {
    try {
      return Enumerator(basis);
    } catch (const NonInvertibleBasis& e) {
      throw PrecisionInsufficient(e.what());
    }
  }();
  const std::size_t n = en.dim();

  std::vector<std::int64_t> best(n, 0);
  best[0] = 1;
  Float best2 = norm2(en.vector_of(best));
  const auto visitor = [&](const std::vector<std::int64_t>& x, long double) -> long double {
    const Float v2 = norm2(en.vector_of(x));
    if (v2 < best2) {
      best2 = v2;
      best = x;
    }
    return best2.convert_to<long double>();
  };
  const auto status = en.run(best2.convert_to<long double>(), visitor, budget);

  ShortVectorResult out;
  out.vector = en.to_original(best);
  normalize_sign(out.vector);
  out.certified = !status.exhausted;
  out.nodes = status.nodes;

  // The witness is recomputed from the original basis; heavy cancellation
  // there means the working precision cannot resolve its length.
  std::vector<Float> v(basis.rows(), Float(0));
  Float magnitude = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (out.vector[j] == 0) continue;
    const Float c(static_cast<long long>(out.vector[j]));
    Float col2 = 0;
    for (std::size_t r = 0; r < v.size(); ++r) {
      v[r] += c * basis(r, j);
      col2 += basis(r, j) * basis(r, j);
    }
    magnitude += mp::abs(c) * mp::sqrt(col2);
  }
  const Float len = mp::sqrt(norm2(v));
  if (len == 0 || magnitude > len * mp::ldexp(Float(1), static_cast<int>(precision_bits() / 2)))
    throw PrecisionInsufficient("shortest vector is lost to cancellation at " + std::to_string(precision_bits()) +
                                " bits");
  out.length = Scalar(len);
  return out;
}

inline ShortVectorResult shortest_vector(const LatticeState& lattice, std::uint64_t budget = kDefaultNodeBudget) {
  return shortest_vector(lattice.float_basis(), budget);
}

/// Runs `f` at the working precision, then at doubled widths up to
/// `max_bits`, until it stops reporting a precision problem.
template <class F>
auto with_precision_escalation(F&& f, unsigned max_bits = 512) {
  for (unsigned bits = precision_bits();; bits *= 2) {
    PrecisionScope scope(bits);
    try {
      return f();
    } catch (const PrecisionInsufficient&) {
      if (bits * 2 > max_bits) throw;
    } catch (const NonInvertibleBasis&) {
      if (bits * 2 > max_bits) throw;
    }
  }
}

}  // namespace latflow
