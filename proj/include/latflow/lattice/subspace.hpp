#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <utility>
#include <vector>

#include "latflow/lattice/integer.hpp"
#include "latflow/lattice/shortest_vector.hpp"

namespace latflow {

/// Proper nonzero rational subspace of R^k, held as a primitive integer basis.
class RationalSubspace {
 public:
  /// Validates independence and primitivity; throws InvalidSubspace.
  explicit RationalSubspace(IntMatrix basis) : basis_(std::move(basis)) {
    const std::size_t k = basis_.rows(), j = basis_.cols();
    if (j < 1 || j >= k) throw InvalidSubspace("dimension must lie in [1, k-1]");
    if (minor_gcd() != 1) throw InvalidSubspace("basis is dependent or not primitive");
  }

  /// Primitive basis of span(generators) ∩ Z^k, pairwise reduced.
  static RationalSubspace saturate(const IntMatrix& generators) {
    IntMatrix lat = integer::kernel(integer::kernel(generators.transpose()).transpose());
    if (lat.cols() == 0) throw InvalidSubspace("generators span the zero subspace");
    integer::pair_reduce(lat);
    return RationalSubspace(std::move(lat));
  }

  static RationalSubspace line(std::vector<std::int64_t> v) {
    const std::int64_t g = integer::gcd_of(v);
    if (g == 0) throw InvalidSubspace("zero vector");
    IntMatrix b(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) b(i, 0) = v[i] / g;
    return RationalSubspace(std::move(b));
  }

  std::size_t k() const { return basis_.rows(); }
  std::size_t dim() const { return basis_.cols(); }
  const IntMatrix& basis() const { return basis_; }

  std::int64_t height() const {
    std::int64_t h = 0;
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t j = 0; j < dim(); ++j) h = std::max(h, std::abs(basis_(i, j)));
    return h;
  }

  /// Row Hermite form of the basis; equal for equal subspaces.
  IntMatrix canonical() const { return integer::hermite_rows(basis_.transpose()); }

  friend bool operator==(const RationalSubspace& a, const RationalSubspace& b) {
    return a.k() == b.k() && a.dim() == b.dim() && a.canonical() == b.canonical();
  }

 private:
  BigInt minor_gcd() const {
    const std::size_t k = basis_.rows(), j = basis_.cols();
    std::vector<std::size_t> rows(j);
    std::iota(rows.begin(), rows.end(), 0);
    BigInt g = 0;
    for (;;) {
      Matrix<BigInt> minor(j, j);
      for (std::size_t a = 0; a < j; ++a)
        for (std::size_t b = 0; b < j; ++b) minor(a, b) = BigInt(static_cast<long long>(basis_(rows[a], b)));
      g = mp::gcd(g, integer::determinant(minor));
      if (g == 1) return g;
      std::size_t i = j;
      while (i > 0 && rows[i - 1] == k - j + i - 1) --i;
      if (i == 0) return g;
      ++rows[i - 1];
      for (std::size_t l = i; l < j; ++l) rows[l] = rows[l - 1] + 1;
    }
  }

  IntMatrix basis_;
};

/// Minkowski constant E(k) = 2 / omega_k^{1/k}, omega_k the volume of the unit k-ball.
/// Since E is increasing in k, E(k) also bounds every sublattice of dimension <= k.
inline Float minkowski_constant(std::size_t k) {
  if (k == 0) throw DomainError("dimension must be positive");
  Float omega_prev = 1, omega = 2;  // omega_0, omega_1
  for (std::size_t d = 2; d <= k; ++d) {
    Float next = omega_prev * 2 * pi_float() / static_cast<unsigned long>(d);
    omega_prev = omega;
    omega = next;
  }
  return 2 / mp::pow(omega, Float(1) / static_cast<unsigned long>(k));
}

inline Matrix<Float> image_basis(const RationalSubspace& v, const Matrix<Float>& g) {
  if (g.cols() != v.k()) throw DimensionMismatch("subspace and matrix dimensions differ");
  return multiply(g, v.basis());
}

/// l_V(g): covolume of g Z^k ∩ gV inside gV, the product of Gram-Schmidt norms of g B.
inline Float subspace_covolume(const RationalSubspace& v, const Matrix<Float>& g) {
  const Matrix<Float> gb = image_basis(v, g);
  const GramSchmidt gs = gram_schmidt(gb);
  try {
    check_resolvable(gb, gs);
  } catch (const NonInvertibleBasis& e) {
    throw PrecisionInsufficient(std::string("Gram determinant unresolved: ") + e.what());
  }
  Float prod = 1;
  for (const auto& n2 : gs.norms2) prod *= n2;
  return mp::sqrt(prod);
}

/// Exact when g is rational and the Gram determinant is a perfect square.
inline Scalar subspace_covolume(const RationalSubspace& v, const Matrix<Scalar>& g) {
  if (all_exact(g)) {
    const Matrix<Rational> gr = g.map([](const Scalar& s) { return s.rational(); });
    const Matrix<Rational> gb = multiply(gr, v.basis());
    const Rational gram = determinant(gb.transpose() * gb);
    if (gram <= 0) throw InvalidSubspace("image of the subspace is degenerate");
    const BigInt num = mp::numerator(gram), den = mp::denominator(gram);
    const BigInt sn = mp::sqrt(num), sd = mp::sqrt(den);
    if (sn * sn == num && sd * sd == den) return Scalar(Rational(sn, sd));
    return Scalar(Float(mp::sqrt(to_float(gram))));
  }
  return Scalar(subspace_covolume(v, to_float(g)));
}

struct SubLine {
  RationalSubspace line;
  Float covolume;
  bool certified;
};

/// A rational line V' ⊂ V whose covolume is the shortest vector length of
/// the sublattice g Z^k ∩ gV; hence l_{V'} <= E(k) l_V^{1/dim V}.
inline SubLine minkowski_sub_line(const RationalSubspace& v, const Matrix<Float>& g,
                                  std::uint64_t budget = kDefaultNodeBudget) {
  const Matrix<Float> gb = image_basis(v, g);
  const ShortVectorResult sv = shortest_vector(gb, budget);
  std::vector<std::int64_t> w(v.k(), 0);
  for (std::size_t i = 0; i < v.k(); ++i) {
    __int128 acc = 0;
    for (std::size_t j = 0; j < v.dim(); ++j) acc += static_cast<__int128>(v.basis()(i, j)) * sv.vector[j];
    w[i] = integer::checked(acc);
  }
  normalize_sign(w);
  return {RationalSubspace::line(std::move(w)), sv.length.to_float(), sv.certified};
}

struct SubspaceEnumOptions {
  std::int64_t height_cap = 1;
  std::size_t line_budget = 10000;     // lines kept
  std::size_t per_dim_budget = 1000;   // subspaces kept for each dimension >= 2
  std::size_t attempts_factor = 100;   // spanning sets tried per kept subspace
};

namespace detail {

inline bool lex_less(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Primitive vectors with first nonzero entry positive, by height then lexicographically.
inline std::vector<std::vector<std::int64_t>> primitive_vectors(std::size_t k, std::int64_t cap, std::size_t budget) {
  std::vector<std::vector<std::int64_t>> out;
  for (std::int64_t h = 1; h <= cap && out.size() < budget; ++h) {
    std::vector<std::int64_t> v(k, -h);
    for (;;) {
      std::int64_t height = 0, first = 0;
      for (auto x : v) {
        height = std::max(height, std::abs(x));
        if (first == 0) first = x;
      }
      if (height == h && first > 0 && integer::gcd_of(v) == 1) {
        out.push_back(v);
        if (out.size() >= budget) break;
      }
      std::size_t i = k;
      while (i > 0 && v[i - 1] == h) v[--i] = -h;
      if (i == 0) break;
      ++v[i - 1];
    }
  }
  return out;
}

}  // namespace detail

/// Rational subspaces of every dimension 1..k-1 whose reduced primitive basis
/// has height <= cap, ordered by dimension, then height, then canonical form.
/// Dimensions >= 2 are built from spans of low-height primitive vectors and
/// truncated at the per-dimension budget. Results are cached.
inline const std::vector<RationalSubspace>& enumerate_subspaces(std::size_t k, const SubspaceEnumOptions& opt) {
  if (k < 2) throw DomainError("no proper subspaces below dimension 2");
  using Key = std::tuple<std::size_t, std::int64_t, std::size_t, std::size_t, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::vector<RationalSubspace>> cache;
  const Key key{k, opt.height_cap, opt.line_budget, opt.per_dim_budget, opt.attempts_factor};
  std::lock_guard lock(mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const auto vectors = detail::primitive_vectors(k, opt.height_cap, opt.line_budget);
  std::vector<RationalSubspace> out;
  for (const auto& v : vectors) out.push_back(RationalSubspace::line(v));

  for (std::size_t j = 2; j < k; ++j) {
    std::vector<std::pair<IntMatrix, RationalSubspace>> found;
    std::set<std::vector<std::int64_t>> seen;
    const std::size_t max_attempts = opt.per_dim_budget * opt.attempts_factor;
    std::size_t attempts = 0;
    // j-subsets in colexicographic order, so low-height spans come first.
    std::vector<std::size_t> idx(j);
    std::iota(idx.begin(), idx.end(), 0);
    while (idx.back() < vectors.size() && found.size() < opt.per_dim_budget && attempts < max_attempts) {
      ++attempts;
      IntMatrix gen(k, j);
      for (std::size_t c = 0; c < j; ++c)
        for (std::size_t r = 0; r < k; ++r) gen(r, c) = vectors[idx[c]][r];
      if (integer::kernel(gen).cols() == 0) {
        RationalSubspace s = RationalSubspace::saturate(gen);
        if (s.height() <= opt.height_cap) {
          IntMatrix canon = s.canonical();
          std::vector<std::int64_t> flat;
          for (std::size_t r = 0; r < canon.rows(); ++r)
            for (std::size_t c = 0; c < canon.cols(); ++c) flat.push_back(canon(r, c));
          if (seen.insert(flat).second) found.emplace_back(std::move(canon), std::move(s));
        }
      }
      std::size_t p = 0;
      while (p + 1 < j && idx[p] + 1 == idx[p + 1]) {
        idx[p] = p;
        ++p;
      }
      ++idx[p];
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
      if (a.second.height() != b.second.height()) return a.second.height() < b.second.height();
      const auto& x = a.first;
      const auto& y = b.first;
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
          if (x(r, c) != y(r, c)) return x(r, c) < y(r, c);
      return false;
    });
    for (auto& f : found) out.push_back(std::move(f.second));
  }
  return cache.emplace(key, std::move(out)).first->second;
}

inline const std::vector<RationalSubspace>& enumerate_subspaces(std::size_t k, std::int64_t height_cap) {
  SubspaceEnumOptions opt;
  opt.height_cap = height_cap;
  return enumerate_subspaces(k, opt);
}

struct SubspaceBound {
  Float bound;  // E(k) * min_V l_V(g)^{1/dim V}
  RationalSubspace minimizer;
};

inline SubspaceBound delta_upper_bound_via_subspaces(const Matrix<Float>& g, const SubspaceEnumOptions& opt) {
  const std::size_t k = g.rows();
  const auto& list = enumerate_subspaces(k, opt);
  std::size_t best_i = 0;
  Float best = std::numeric_limits<Float>::infinity();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Float cov = subspace_covolume(list[i], g);
    const Float r = list[i].dim() == 1 ? cov : mp::pow(cov, Float(1) / static_cast<unsigned long>(list[i].dim()));
    if (r < best) {
      best = r;
      best_i = i;
    }
  }
  return {minkowski_constant(k) * best, list[best_i]};
}

inline Scalar delta_upper_bound_via_subspaces(const Matrix<Scalar>& g, std::int64_t height_cap) {
  SubspaceEnumOptions opt;
  opt.height_cap = height_cap;
  return Scalar(delta_upper_bound_via_subspaces(to_float(g), opt).bound);
}

}  // namespace latflow
