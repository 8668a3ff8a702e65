#include <gtest/gtest.h>

#include <sstream>

#include "latflow/flows/trajectory.hpp"
#include "latflow/flows/weights.hpp"
#include "latflow/lattice/lattice_state.hpp"
#include "support.hpp"

using namespace latflow;
using latflow::testing::brute_force_min;
using latflow::testing::random_unimodular;
using latflow::testing::rel_diff;
using latflow::testing::to_float_matrix;

namespace {

Scalar q(long long a, long long b = 1) { return Scalar(Rational(a, b)); }

SystemY rational_y(long long a, long long b) { return SystemY(Matrix<Scalar>{{q(a, b)}}); }

std::vector<Weights> central_points(double t_min, double step, double t_max) {
  std::vector<Weights> pts;
  for (double t = t_min; t <= t_max + 1e-9; t += step) pts.push_back(central_ray(1, 1, Scalar(Float(t))));
  return pts;
}

TrajectorySample synthetic(double t, const Float& delta) {
  return TrajectorySample{central_ray(1, 1, Scalar(Float(t))), Scalar(delta), {}, true, precision_bits()};
}

Matrix<Float> scaled(const Weights& t, const Matrix<Float>& b) {
  Matrix<Float> out = b;
  for (std::size_t i = 0; i < t.k(); ++i) {
    const Float ti = t[i].to_float();
    const Float f = mp::exp(i < t.m() ? ti : Float(-ti));
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) *= f;
  }
  return out;
}

}  // namespace

TEST(Weights, CentralRayCoordinates) {
  const Weights a = central_ray(1, 1, 2);
  EXPECT_EQ(a.t(), (std::vector<Scalar>{2, 2}));
  EXPECT_EQ(a.norm(), Scalar(4));
  EXPECT_EQ(a.ray_parameter(), Scalar(2));

  const Weights b = central_ray(2, 1, 6);
  EXPECT_EQ(b.t(), (std::vector<Scalar>{3, 3, 6}));
  EXPECT_EQ(b.norm(), Scalar(12));

  const Weights c = central_ray(2, 3, 30);
  EXPECT_EQ(c.t(), (std::vector<Scalar>{15, 15, 10, 10, 10}));
  EXPECT_EQ(c.ray_parameter(), Scalar(30));
}

TEST(Weights, RejectsUnbalancedOrNonPositive) {
  EXPECT_THROW(Weights(1, 1, {1, 2}), DomainError);
  EXPECT_THROW(Weights(1, 1, {0, 0}), DomainError);
  EXPECT_THROW(Weights(2, 1, {1, 1}), DimensionMismatch);
  EXPECT_THROW(central_ray(1, 1, 0), DomainError);
}

TEST(WeightSet, GridIsBalancedAndSorted) {
  const WeightSet s = WeightSet::grid(2, 1, 1, 8);
  // expanding pairs (a, b) with a, b >= 1 and a + b <= 4
  EXPECT_EQ(s.points().size(), 6u);
  for (std::size_t i = 0; i < s.points().size(); ++i) {
    const Weights& w = s.points()[i];
    EXPECT_EQ(w[0] + w[1], w[2]);
    if (i) EXPECT_LE(s.points()[i - 1].norm(), w.norm());
  }
}

TEST(WeightSet, SpacingFloorEnforced) {
  EXPECT_THROW(WeightSet::explicit_list({central_ray(1, 1, 1), central_ray(1, 1, q(11, 10))}, 1), DomainError);
  EXPECT_NO_THROW(WeightSet::explicit_list({central_ray(1, 1, 1), central_ray(1, 1, 2)}, 1));
}

TEST(FlowMatrix, CentralRayExample) {
  const auto g = to_float(flow_matrix(central_ray(1, 1, 1)));
  EXPECT_LT(rel_diff(g(0, 0), mp::exp(Float(1))), 1e-30);
  EXPECT_LT(rel_diff(g(1, 1), mp::exp(Float(-1))), 1e-30);
  EXPECT_EQ(g(0, 1), 0);
}

TEST(FlowMatrix, DeterminantOneForRandomWeights) {
  CounterRng rng(7, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const Float a = rng.uniform(0.1, 3), b = rng.uniform(0.1, 3);
    const Float c = (a + b) * rng.uniform(0.05, 0.95);
    const Weights w(2, 2, {Scalar(a), Scalar(b), Scalar(c), Scalar(Float(a + b - c))});
    const Float d = determinant(to_float(flow_matrix(w)));
    EXPECT_LT(Float(mp::abs(d - 1)), mp::sqrt(half_precision_tolerance()));
  }
}

TEST(FlowMatrix, AdditiveAlongARay) {
  const Weights dir(2, 1, {1, 2, 3});
  for (int s = 1; s <= 4; ++s)
    for (int r = 1; r <= 4; ++r) {
      const Weights a(2, 1, {s, 2 * s, 3 * s}), b(2, 1, {r, 2 * r, 3 * r});
      const auto lhs = to_float(flow_matrix(a)) * to_float(flow_matrix(b));
      const auto rhs = to_float(flow_matrix(a + b));
      for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(rel_diff(lhs(i, i), rhs(i, i)), 1e-30);
    }
  EXPECT_EQ(dir.norm(), Scalar(6));
}

TEST(Unipotent, ComposesAdditively) {
  const SystemY a(Matrix<Scalar>{{q(1, 3), q(-2, 7)}, {q(5), q(1, 2)}});
  const SystemY b(Matrix<Scalar>{{q(2, 3), q(1, 7)}, {q(-4), q(3, 2)}});
  Matrix<Scalar> sum(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) sum(i, j) = a(i, j) + b(i, j);
  EXPECT_EQ(unipotent(a) * unipotent(b), unipotent(SystemY(sum)));
  EXPECT_EQ(unipotent(SystemY(Matrix<Scalar>{{q(0)}})), Matrix<Scalar>::identity(2));
}

TEST(Trajectory, ZeroSystemDecaysExactly) {
  const auto samples = trajectory(LatticeState::standard(2), rational_y(0, 1), central_points(1, 1, 5));
  ASSERT_EQ(samples.size(), 5u);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_TRUE(samples[i].certified);
    EXPECT_LT(rel_diff(samples[i].delta.to_float(), mp::exp(Float(-static_cast<long long>(i + 1)))),
              mp::sqrt(half_precision_tolerance()).convert_to<double>());
  }
}

TEST(Trajectory, OneThirdMatchesWitness) {
  const auto samples = trajectory(LatticeState::standard(2), rational_y(1, 3), central_points(2, 0.5, 12));
  for (const auto& s : samples) {
    const Float t = s.t.ray_parameter().to_float();
    EXPECT_LT(rel_diff(s.delta.to_float(), 3 * mp::exp(Float(-t))), 1e-30) << "t = " << t;
    // brute force over coefficient box
    const Matrix<Float> b{{mp::exp(t), mp::exp(t) / 3}, {Float(0), mp::exp(Float(-t))}};
    EXPECT_LT(rel_diff(s.delta.to_float(), brute_force_min(b, 6)), 1e-30);
    EXPECT_EQ(std::abs(s.witness[1]), 3);
  }
}

TEST(Trajectory, GoldenRatioStaysBoundedBelow) {
  const auto samples = trajectory(LatticeState::standard(2), SystemY::parse("(1+sqrt(5))/2"), central_points(10, 1, 25));
  ASSERT_EQ(samples.size(), 16u);
  for (const auto& s : samples) {
    EXPECT_TRUE(s.certified);
    // |v|^2 >= 2|q (q phi - p)| and q |q phi - p| >= 0.38 for q >= 1
    EXPECT_GE(s.delta.to_float(), 0.85);
  }
}

TEST(Trajectory, WeightSetOverloadSortsByNorm) {
  const auto set = WeightSet::grid(2, 1, 1, 6);
  const auto samples = trajectory(SystemY::parse("sqrt(2); sqrt(3)"), set);
  ASSERT_EQ(samples.size(), set.points().size());
  for (std::size_t i = 1; i < samples.size(); ++i) EXPECT_LE(samples[i - 1].t.norm(), samples[i].t.norm());
}

TEST(Trajectory, RejectsMismatchedWeights) {
  EXPECT_THROW(trajectory(LatticeState::standard(2), rational_y(1, 3), {central_ray(2, 1, 1)}), DimensionMismatch);
}

TEST(GrowthExponent, ConstantDeltaGivesZero) {
  std::vector<TrajectorySample> s;
  for (int t = 1; t <= 20; ++t) s.push_back(synthetic(t, Float(1)));
  const auto fit = growth_exponent(s);
  EXPECT_EQ(fit.estimate, 0);
  EXPECT_LT(Float(mp::abs(fit.regression)), 1e-30);
}

TEST(GrowthExponent, ExponentialDecayGivesOneHalf) {
  const auto samples = trajectory(LatticeState::standard(2), rational_y(0, 1), central_points(1, 1, 20));
  const auto fit = growth_exponent(samples);
  EXPECT_LT(Float(mp::abs(fit.estimate - Float(0.5))), 1e-30);
  EXPECT_LT(Float(mp::abs(fit.regression - Float(0.5))), 1e-30);
}

TEST(GrowthExponent, GoldenRatioNearZero) {
  const auto samples = trajectory(LatticeState::standard(2), SystemY::parse("(1+sqrt(5))/2"), central_points(10, 1, 25));
  EXPECT_LE(growth_exponent(samples).estimate, 0.05);
}

TEST(GrowthExponent, Preconditions) {
  std::vector<TrajectorySample> s;
  for (int t = 1; t <= 9; ++t) s.push_back(synthetic(t, Float(1)));
  EXPECT_THROW(growth_exponent(s), TooFewSamples);
  s.push_back(synthetic(10, Float(1)));
  EXPECT_NO_THROW(growth_exponent(s));
  EXPECT_THROW(growth_exponent(s, 0), DomainError);
  EXPECT_THROW(growth_exponent(s, 1.5), DomainError);
}

TEST(DivergesFaster, DecayingDeltaConsistent) {
  std::vector<TrajectorySample> s;
  for (int t = 1; t <= 30; ++t) s.push_back(synthetic(t, mp::exp(Float(-t))));
  const auto rep = diverges_faster(s, RateFunction::constant(1), {q(1), q(1, 10), q(1, 1000)});
  EXPECT_TRUE(rep.consistent);
  EXPECT_EQ(rep.verdict(), "consistent-with-divergence-faster");
}

TEST(DivergesFaster, BoundedBelowDeltaNotConsistent) {
  std::vector<TrajectorySample> s;
  for (int t = 1; t <= 30; ++t) s.push_back(synthetic(t, Float(0.4) + Float(0.1) * (t % 3)));
  const auto rep = diverges_faster(s, RateFunction::constant(1), {q(1, 10)});
  EXPECT_FALSE(rep.consistent);
  EXPECT_EQ(*rep.rows[0].last_violation, rep.horizon);
}

TEST(DivergesFaster, OneThirdTrajectory) {
  const auto samples = trajectory(LatticeState::standard(2), rational_y(1, 3), central_points(2, 1, 10));
  EXPECT_TRUE(diverges_faster(samples, RateFunction::constant(1), {q(1), q(1, 2), q(1, 5)}).consistent);

  // 3e^{-t} < c e^{-t/2} iff t > 2 log(3/c)
  const auto psi = RateFunction::expression("exp(-x/2)", true);
  const auto rep = diverges_faster(samples, psi, {q(1), q(1, 10)});
  EXPECT_EQ(rep.horizon, 20);
  EXPECT_EQ(*rep.rows[0].last_violation, 4);
  EXPECT_TRUE(rep.rows[0].tail_clear);
  EXPECT_EQ(*rep.rows[1].last_violation, 12);
  EXPECT_FALSE(rep.rows[1].tail_clear);
  EXPECT_FALSE(rep.consistent);
}

TEST(DivergesFaster, Preconditions) {
  EXPECT_THROW(diverges_faster({}, RateFunction::constant(1), {q(1)}), TooFewSamples);
  EXPECT_THROW(diverges_faster({synthetic(1, Float(1))}, RateFunction::constant(1), {}), DomainError);
}

TEST(FlowProperties, OperatorNormBounds) {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemY y(Matrix<Scalar>{{Scalar(Float(rng.uniform(-1, 1)))}, {Scalar(Float(rng.uniform(-1, 1)))}});
    const Matrix<Float> base = to_float(unipotent(y)) * to_float_matrix(random_unimodular(3, rng));
    const Float a = rng.uniform(0, 1.5), b = rng.uniform(0, 1.5);
    const Weights t(2, 1, {Scalar(a), Scalar(b), Scalar(Float(a + b))});
    const Float d0 = shortest_vector(base).length.to_float();
    const Float d1 = shortest_vector(scaled(t, base)).length.to_float();
    const Float slack = 1 + Float(1e-25);
    EXPECT_LE(d1, mp::exp(std::max(a, b)) * d0 * slack);
    EXPECT_GE(d1 * slack, mp::exp(Float(-(a + b))) * d0);
  }
}

TEST(FlowProperties, DeltaBelowEveryPrimitiveVector) {
  const SystemY y = SystemY::parse("sqrt(2)");
  const auto samples = trajectory(LatticeState::standard(2), y, central_points(1, 1, 12));
  for (const auto& s : samples) {
    const Matrix<Float> b = orbit_basis(s.t, y, Matrix<Float>::identity(2));
    EXPECT_LE(s.delta.to_float(), brute_force_min(b, 40) * (1 + Float(1e-30)));
  }
}

TEST(FlowProperties, JitteredTimesMoveEstimateLittle) {
  CounterRng rng(5, 1);
  for (const char* text : {"1/3", "2/7", "sqrt(2)"}) {
    const SystemY y = SystemY::parse(text);
    std::vector<Weights> grid, jittered;
    for (int t = 2; t <= 24; ++t) {
      grid.push_back(central_ray(1, 1, t));
      jittered.push_back(central_ray(1, 1, Scalar(Float(t + rng.uniform(-0.1, 0.1)))));
    }
    const auto a = growth_exponent(trajectory(LatticeState::standard(2), y, grid)).estimate;
    const auto b = growth_exponent(trajectory(LatticeState::standard(2), y, jittered)).estimate;
    EXPECT_LE(Float(mp::abs(a - b)), 0.05) << text;
  }
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const auto samples = trajectory(LatticeState::standard(2), rational_y(1, 3), central_points(2, 1, 4));
  std::ostringstream os;
  write_trajectory_csv(os, samples);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t_1,t_2,delta,certified,witness");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
