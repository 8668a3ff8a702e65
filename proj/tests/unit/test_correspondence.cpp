#include <gtest/gtest.h>

#include "latflow/correspondence/cross_validate.hpp"
#include "latflow/correspondence/dictionary.hpp"
#include "support.hpp"

using namespace latflow;
using latflow::testing::rel_diff;

namespace {

Scalar q(long long a, long long b = 1) { return Scalar(Rational(a, b)); }

const std::vector<std::pair<std::size_t, std::size_t>> kShapes{{1, 1}, {1, 2}, {2, 1}, {2, 3}, {3, 2}};

std::vector<Float> t_grid(double lo, double step, double hi) {
  std::vector<Float> out;
  for (double t = lo; t <= hi + 1e-9; t += step) out.push_back(Float(t));
  return out;
}

Float tol() { return mp::sqrt(half_precision_tolerance()); }

}  // namespace

TEST(Dictionary, GammaFromOmegaExamples) {
  for (const auto& [m, n] : kShapes) EXPECT_EQ(gamma_from_omega(q(n, m), m, n), Scalar(0));
  EXPECT_EQ(gamma_from_omega(q(3), 1, 1), q(1, 2));
  EXPECT_EQ(gamma_from_omega(q(4), 1, 2), q(1, 5));
  for (const auto& [m, n] : kShapes) {
    const Scalar big = gamma_from_omega(q(1000000000000LL), m, n);
    EXPECT_LT(big, q(1, n));
    EXPECT_LT((q(1, n) - big).to_float(), 1e-11);
  }
  EXPECT_THROW(gamma_from_omega(q(1, 2), 1, 1), DomainError);
  EXPECT_THROW(gamma_from_omega(q(1), 1, 2), DomainError);
}

TEST(Dictionary, OmegaFromGammaExamples) {
  for (const auto& [m, n] : kShapes) EXPECT_EQ(omega_from_gamma(q(0), m, n), q(n, m));
  EXPECT_EQ(omega_from_gamma(q(1, 2), 1, 1), q(3));
  EXPECT_THROW(omega_from_gamma(q(1), 1, 1), DomainError);
  EXPECT_THROW(omega_from_gamma(q(1, 2), 1, 2), DomainError);
  EXPECT_THROW(omega_from_gamma(q(-1, 10), 1, 1), DomainError);
}

TEST(Dictionary, RoundTripOnRandomExponents) {
  CounterRng rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const auto& [m, n] = kShapes[static_cast<std::size_t>(i) % kShapes.size()];
    const Scalar omega = q(n, m) + q(rng.integer(0, 100000), rng.integer(1, 1000));
    const Scalar gamma = gamma_from_omega(omega, m, n);
    EXPECT_EQ(omega_from_gamma(gamma, m, n), omega);
    EXPECT_EQ(gamma_from_omega(omega_from_gamma(gamma, m, n), m, n), gamma);
  }
}

TEST(Dictionary, GammaIncreasingAndBounded) {
  for (const auto& [m, n] : kShapes) {
    Scalar prev = gamma_from_omega(q(n, m), m, n);
    for (int k = 1; k <= 200; ++k) {
      const Scalar g = gamma_from_omega(q(n, m) + q(k * k, 7), m, n);
      EXPECT_GT(g, prev);
      EXPECT_LT(g, q(1, n));
      prev = g;
    }
  }
}

TEST(Dictionary, ThresholdRateExamples) {
  for (const auto& [m, n] : kShapes) EXPECT_EQ(threshold_rate(q(n, m), m, n), Scalar(0));
  EXPECT_EQ(threshold_rate(q(1), 1, 1), Scalar(0));
  EXPECT_EQ(threshold_rate(q(4), 1, 2), q(1, 5));
  EXPECT_THROW(threshold_rate(q(1), 2, 3), DomainError);
}

TEST(Dictionary, ThresholdMatchesGammaUnderNormConversion) {
  for (const auto& [m, n] : kShapes) {
    EXPECT_EQ(ray_norm_factor(m, n), Scalar(2));
    for (int k = 0; k < 40; ++k) {
      const Scalar v = q(n, m) + q(k, 3);
      // a per-|t| rate times |t| / t equals the per-t rate
      const Scalar per_norm = norm_rate_from_ray_rate(threshold_rate(v, m, n), m, n);
      EXPECT_EQ(per_norm * ray_norm_factor(m, n), gamma_from_omega(v, m, n));
      EXPECT_EQ(ray_rate_from_norm_rate(per_norm, m, n), threshold_rate(v, m, n));
    }
  }
}

TEST(Dictionary, ThresholdMatchesMeasuredRateOnRationalPoints) {
  // Y = 1/3: delta = 3 e^{-t}, so the per-|t| growth tends to 1/2 = 1/(n |t|/t)
  std::vector<Weights> pts;
  for (int t = 20; t <= 60; t += 2) pts.push_back(central_ray(1, 1, t));
  const auto samples = trajectory(LatticeState::standard(2), SystemY(Matrix<Scalar>{{q(1, 3)}}), pts);
  const Float measured = ray_rate_from_norm_rate(Scalar(growth_exponent(samples, 1).regression), 1, 1).to_float();
  EXPECT_LT(Float(mp::abs(measured - Float(1))), 1e-25);
}

TEST(SolveN, SatisfiesDefiningEquation) {
  const std::vector<RateFunction> phis{RateFunction::constant(q(3, 2)), RateFunction::power(q(1), q(-1)),
                                       RateFunction::expression("1/log(x+3)", true),
                                       RateFunction::power(q(2), q(-1, 2))};
  for (const auto& phi : phis)
    for (const auto& [m, n] : kShapes)
      for (double t : {0.5, 3.0, 17.0}) {
        const Float mf(static_cast<long long>(m)), nf(static_cast<long long>(n));
        const Float big_n = solve_n_of_t(phi, m, n, Float(t));
        const Float lhs = (mf + nf) / (mf * nf) * t;
        const Float rhs = (1 + nf / mf) * mp::log(big_n) - mp::log(phi(big_n));
        EXPECT_LT(Float(mp::abs(lhs - rhs)), tol() * 16) << m << "x" << n << " t=" << t;
      }
}

TEST(PsiFromPhi, ConstantOneGivesOne) {
  for (const auto& [m, n] : kShapes) {
    const auto psi = psi_from_phi(RateFunction::constant(1), m, n, t_grid(0.5, 0.5, 20));
    for (const auto& y : psi.table_y()) EXPECT_LT(Float(mp::abs(y - 1)), tol() * 16);
  }
}

TEST(PsiFromPhi, InverseRateGivesCubeRootDecay) {
  const auto ts = t_grid(0.5, 0.5, 30);
  const auto psi = psi_from_phi(RateFunction::power(1, -1), 1, 1, ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    EXPECT_LT(rel_diff(psi.table_y()[i], mp::exp(-ts[i] / 3)), tol().convert_to<double>() * 16);
}

TEST(PsiFromPhi, ConstantsMapToConstants) {
  for (const auto& c : {q(1, 2), q(2), q(5), q(1, 7)})
    for (const auto& [m, n] : kShapes) {
      // N = c^{m/(m+n)} e^{t/n}
      const Float expected = mp::pow(c.to_float(), Float(static_cast<long long>(m)) / static_cast<long long>(m + n));
      const auto psi = psi_from_phi(RateFunction::constant(c), m, n, t_grid(1, 1, 15));
      for (const auto& y : psi.table_y()) EXPECT_LT(rel_diff(y, expected), tol().convert_to<double>() * 16);
    }
}

TEST(PsiFromPhi, NonIncreasingPhiGivesNonIncreasingPsi) {
  for (const char* text : {"1/log(x+3)", "x^(-1/3)", "1/(1+log(1+x))^2"}) {
    const auto phi = RateFunction::expression(text, true);
    for (const auto& [m, n] : kShapes) {
      const auto psi = psi_from_phi(phi, m, n, t_grid(0.25, 0.25, 20));
      for (std::size_t i = 1; i < psi.table_y().size(); ++i)
        EXPECT_LE(psi.table_y()[i], psi.table_y()[i - 1] * (1 + half_precision_tolerance())) << text;
    }
  }
}

TEST(PsiFromPhi, RejectsIncreasingPhi) {
  EXPECT_THROW(psi_from_phi(RateFunction::power(1, 1), 1, 1, t_grid(1, 1, 3)), DomainError);
  EXPECT_THROW(psi_from_phi(RateFunction::expression("x^3", true), 1, 1, t_grid(1, 1, 3)), SolveFailure);
}

TEST(RecordTransfer, GoldenRatioAndSqrtTwo) {
  for (const char* text : {"(1+sqrt(5))/2", "sqrt(2)"}) {
    const SystemY y = SystemY::parse(text);
    for (const auto& r : best_approximations(y, 100000).records) {
      const RecordTransfer tr = record_transfer(y, r);
      EXPECT_TRUE(tr.holds) << text << " q=" << r.qnorm;
      // the two terms balance at t
      const Float a = r.dist.to_float() * mp::exp(tr.t), b = Float(static_cast<long long>(r.qnorm)) * mp::exp(-tr.t);
      EXPECT_LT(rel_diff(a, b), 1e-25);
    }
  }
}

TEST(RecordTransfer, HoldsInHigherDimensions) {
  const SystemY y = SystemY::parse("sqrt(2); sqrt(3)");
  for (const auto& r : best_approximations(y, 20000).records) EXPECT_TRUE(record_transfer(y, r).holds);
}

TEST(RecordTransfer, LiouvilleRecordDipsBelowThreshold) {
  const SystemY y = SystemY::parse("liouville(10)");
  const auto recs = best_approximations(y, 1000000).records;
  ASSERT_EQ(recs.back().qnorm, 1000000);
  const RecordTransfer tr = record_transfer(y, recs.back());
  EXPECT_TRUE(tr.holds);
  EXPECT_LT(tr.delta, mp::exp(Float(-0.4) * tr.t));
}

TEST(CrossValidate, OneThirdIsSingularOnBothSides) {
  CorrespondenceConfig cfg;
  cfg.q_max = 1000;
  const auto cv = cross_validate(SystemY(Matrix<Scalar>{{q(1, 3)}}), cfg);
  EXPECT_TRUE(cv.omega_direct.infinite);
  EXPECT_TRUE(cv.omega_orbit_infinite);
  EXPECT_TRUE(cv.orbit_rational);
  EXPECT_EQ(cv.discrepancy, 0);
  EXPECT_TRUE(cv.singular.consistent);
  EXPECT_TRUE(cv.divergence.consistent);
  EXPECT_TRUE(cv.verdicts_agree);
  for (const auto& s : cv.samples) {
    const Float t = s.t.ray_parameter().to_float();
    if (t < 2) continue;
    EXPECT_LT(rel_diff(s.delta.to_float(), 3 * mp::exp(-t)), mp::sqrt(half_precision_tolerance()).convert_to<double>());
  }
}

TEST(CrossValidate, GoldenRatioAgrees) {
  const auto cv = cross_validate(SystemY::parse("(1+sqrt(5))/2"));
  EXPECT_LE(cv.gamma_norm.estimate, 0.05);
  EXPECT_LT(cv.discrepancy, 0.1);
  EXPECT_FALSE(cv.singular.consistent);
  EXPECT_FALSE(cv.divergence.consistent);
  EXPECT_TRUE(cv.verdicts_agree);
  for (const auto& tr : cv.transfers) EXPECT_TRUE(tr.holds);
}
