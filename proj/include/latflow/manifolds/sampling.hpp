#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "latflow/core/random.hpp"
#include "latflow/core/scalar.hpp"
#include "latflow/core/errors.hpp"

namespace latflow {

struct SamplerConfig {
  std::size_t count = 100;
  std::uint64_t seed = 1;
  bool stratified = true;  // jittered grid cells first, plain uniform points after
};

/// One parameter point; u is the position in [0,1)^d before mapping to the box.
struct ParameterSample {
  std::vector<Scalar> x;
  std::vector<Float> u;
  std::size_t index = 0;
  bool stratified = false;
};

namespace detail {

inline std::size_t strata_per_axis(std::size_t count, std::size_t d) {
  std::size_t g = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(count), 1.0 / static_cast<double>(d))));
  while (g > 1 && [&] {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < d; ++i) cells *= g;
    return cells > count;
  }())
    --g;
  return std::max<std::size_t>(g, 1);
}

}  // namespace detail

/// Unit-cube positions for a sampler config in dimension d. Coordinate i of point j
/// uses slot j * d + i of the seeded stream, so any point can be regenerated alone.
inline std::vector<ParameterSample> sample_unit_cube(std::size_t d, const SamplerConfig& cfg) {
  if (d == 0) throw DomainError("parameter dimension must be positive");
  if (cfg.count == 0) throw DomainError("sample count must be positive");
  const CounterRng rng(cfg.seed, 1);
  const std::size_t g = cfg.stratified ? detail::strata_per_axis(cfg.count, d) : 0;
  std::size_t cells = cfg.stratified ? 1 : 0;
  for (std::size_t i = 0; cfg.stratified && i < d; ++i) cells *= g;
  if (cells == 1 && cfg.count > 1) cells = 0;  // a single cell is no stratification
  std::vector<ParameterSample> out;
  for (std::size_t j = 0; j < cfg.count; ++j) {
    ParameterSample s;
    s.index = j;
    s.stratified = j < cells;
    std::size_t cell = j;
    for (std::size_t i = 0; i < d; ++i) {
      Float u = uniform_float(rng, j * d + i);
      if (s.stratified) {
        const std::size_t c = cell % g;
        cell /= g;
        u = (Float(static_cast<unsigned long long>(c)) + u) / Float(static_cast<unsigned long long>(g));
      }
      s.u.push_back(u);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Maps unit-cube samples affinely onto the box [lo, hi].
inline std::vector<ParameterSample> sample_box(const std::vector<Scalar>& lo, const std::vector<Scalar>& hi,
                                               const SamplerConfig& cfg) {
  if (lo.size() != hi.size()) throw DimensionMismatch("box bounds differ in dimension");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw DomainError("empty box");
  auto out = sample_unit_cube(lo.size(), cfg);
  for (auto& s : out) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const Float lf = lo[i].to_float(), hf = hi[i].to_float();
      Float v = lf + s.u[i] * (hf - lf);
      if (v < lf) v = lf;
      if (v > hf) v = hf;
      s.x.push_back(Scalar(v));
    }
  }
  return out;
}

}  // namespace latflow
