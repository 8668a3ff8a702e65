#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latflow/core/scalar.hpp"

namespace latflow {

/// How a lattice basis was composed: g_t u_Y g.
struct Provenance {
  std::size_t m = 0, n = 0;
  std::vector<Scalar> t;  // weights, empty if no flow was applied
  Matrix<Scalar> y;       // m x n, empty if no unipotent factor
  Matrix<Scalar> base;    // k x k, empty means identity
};

/// Unimodular lattice g Z^k given by the columns of a k x k basis.
class LatticeState {
 public:
  explicit LatticeState(Matrix<Scalar> basis, std::optional<Provenance> provenance = std::nullopt)
      : basis_(std::move(basis)), provenance_(std::move(provenance)) {
    if (basis_.rows() != basis_.cols()) throw DimensionMismatch("lattice basis must be square");
    if (basis_.rows() < 2) throw DomainError("lattice dimension must be at least 2");
    const Scalar det = determinant(basis_);
    if (det.is_exact()) {
      if (det == Scalar(0)) throw NonInvertibleBasis("columns are dependent");
      if (mp::abs(det.rational()) != 1) throw DomainError("basis is not unimodular: det = " + det.to_string());
    } else {
      const Float d = mp::abs(det.to_float());
      if (d == 0) throw NonInvertibleBasis("columns are dependent at working precision");
      if (mp::abs(d - 1) > half_precision_tolerance())
        throw DomainError("basis is not unimodular: |det| = " + to_decimal_string(d));
    }
  }

  static LatticeState standard(std::size_t k) { return LatticeState(Matrix<Scalar>::identity(k)); }

  std::size_t k() const { return basis_.rows(); }
  const Matrix<Scalar>& basis() const { return basis_; }
  Matrix<Float> float_basis() const { return to_float(basis_); }
  bool is_exact() const { return all_exact(basis_); }
  const std::optional<Provenance>& provenance() const { return provenance_; }

  nlohmann::json to_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (std::size_t j = 0; j < k(); ++j) {
      nlohmann::json col = nlohmann::json::array();
      for (std::size_t i = 0; i < k(); ++i) col.push_back(basis_(i, j).to_string());
      cols.push_back(col);
    }
    const bool exact = is_exact();
    return {{"k", k()},
            {"mode", exact ? "exact" : "float"},
            {"precision_bits", exact ? 0u : precision_bits()},
            {"columns", cols}};
  }

  static LatticeState from_json(const nlohmann::json& j) {
    const auto k = j.at("k").get<std::size_t>();
    const auto mode = j.at("mode").get<std::string>() == "exact" ? Scalar::Mode::exact : Scalar::Mode::floating;
    const auto& cols = j.at("columns");
    if (cols.size() != k) throw ParseError("column count does not match k");
    std::optional<PrecisionScope> scope;
    if (mode == Scalar::Mode::floating) scope.emplace(j.at("precision_bits").get<unsigned>());
    Matrix<Scalar> b(k, k);
    for (std::size_t c = 0; c < k; ++c) {
      if (cols[c].size() != k) throw ParseError("column length does not match k");
      for (std::size_t r = 0; r < k; ++r) b(r, c) = Scalar::parse(cols[c][r].get<std::string>(), mode);
    }
    return LatticeState(std::move(b));
  }

 private:
  Matrix<Scalar> basis_;
  std::optional<Provenance> provenance_;
};

}  // namespace latflow
