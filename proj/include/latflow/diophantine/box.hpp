#pragma once

#include <cstdint>
#include <vector>

#include "latflow/diophantine/types.hpp"
#include "latflow/lattice/shortest_vector.hpp"

namespace latflow {

struct BoxSolution {
  std::vector<std::int64_t> q;
  std::vector<std::int64_t> p;
};

struct BoxResult {
  bool solvable = false;
  std::vector<BoxSolution> solutions;  // one of each +-(q, p) pair
  bool exhausted = false;              // node budget ran out; absence of solutions is unproven
  std::uint64_t nodes = 0;
  unsigned precision = 0;
};

/// All integer (q, p), q != 0, with |Y_i q - p_i| < a_i and |q_j| < b_j.
///
/// The box is the unit cube of the lattice diag(1/a, 1/b) u_Y Z^{m+n}, so
/// every solution lies in the ball of radius sqrt(m + n) and the search is
/// complete unless the node budget runs out.
inline BoxResult box_solve(const SystemY& y, const std::vector<Float>& a, const std::vector<Float>& b,
                           bool find_all = false, std::uint64_t budget = kDefaultNodeBudget,
                           unsigned max_bits = 512) {
  const std::size_t m = y.m(), n = y.n(), k = m + n;
  if (a.size() != m || b.size() != n) throw DimensionMismatch("box bounds do not match Y");
  for (const auto& v : a)
    if (!(v > 0)) throw DomainError("box bounds must be positive");
  for (const auto& v : b)
    if (!(v > 0)) throw DomainError("box bounds must be positive");

  return with_precision_escalation(
      [&] {
        const SystemY yp = y.at_current_precision();
        const Matrix<Float> yf = yp.float_entries();
        std::vector<Float> ai(m), bi(n);
        for (std::size_t i = 0; i < m; ++i) ai[i] = a[i];
        for (std::size_t j = 0; j < n; ++j) bi[j] = b[j];

        Matrix<Float> basis(k, k, Float(0));
        for (std::size_t i = 0; i < m; ++i) basis(i, i) = 1 / ai[i];
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t i = 0; i < m; ++i) basis(i, m + j) = yf(i, j) / ai[i];
          basis(m + j, m + j) = 1 / bi[j];
        }
        const Enumerator en(basis);

        BoxResult res;
        res.precision = precision_bits();
        bool stop = false;
        const auto visitor = [&](const std::vector<std::int64_t>& x, long double) -> long double {
          if (stop) return -1;
          const std::vector<std::int64_t> c = en.to_original(x);
          BoxSolution s{std::vector<std::int64_t>(c.begin() + static_cast<std::ptrdiff_t>(m), c.end()),
                        std::vector<std::int64_t>(m)};
          bool nonzero = false;
          for (std::size_t j = 0; j < n; ++j) {
            if (s.q[j] != 0) nonzero = true;
            if (!(Float(s.q[j] < 0 ? -s.q[j] : s.q[j]) < bi[j])) return static_cast<long double>(k);
          }
          if (!nonzero) return static_cast<long double>(k);
          for (std::size_t i = 0; i < m; ++i) {
            Float v = Float(static_cast<long long>(c[i]));
            for (std::size_t j = 0; j < n; ++j)
              if (s.q[j] != 0) v += yf(i, j) * static_cast<long long>(s.q[j]);
            if (!(mp::abs(v) < ai[i])) return static_cast<long double>(k);
            s.p[i] = -c[i];
          }
          res.solvable = true;
          res.solutions.push_back(std::move(s));
          if (!find_all) {
            stop = true;
            return -1;
          }
          return static_cast<long double>(k);
        };
        const auto status = en.run(static_cast<long double>(k), visitor, budget);
        res.exhausted = status.exhausted && !stop;
        res.nodes = status.nodes;
        return res;
      },
      max_bits);
}

}  // namespace latflow
