#include <gtest/gtest.h>

#include <cmath>

#include "latflow/diophantine/approx.hpp"
#include "latflow/diophantine/scans.hpp"
#include "support.hpp"

using namespace latflow;

namespace {

Scalar q(long long a, long long b = 1) { return Scalar(Rational(a, b)); }

const char* kGolden = "(1+sqrt(5))/2";

std::vector<std::int64_t> qnorms(const std::vector<ApproxRecord>& r) {
  std::vector<std::int64_t> out;
  for (const auto& x : r) out.push_back(x.qnorm);
  return out;
}

// Distinct convergent denominators <= q_max from the partial quotients.
std::vector<std::int64_t> convergent_denominators(const std::vector<std::int64_t>& a, std::int64_t q_max) {
  std::vector<std::int64_t> out;
  std::int64_t prev = 0, cur = 1;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (out.empty() || out.back() != cur) out.push_back(cur);
    const std::int64_t next = a[i] * cur + prev;
    prev = cur;
    cur = next;
    if (cur > q_max) break;
  }
  return out;
}

// Partial quotients of sqrt(d) by the integer recurrence.
std::vector<std::int64_t> sqrt_partial_quotients(std::int64_t d, std::size_t count) {
  const auto a0 = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(d))));
  std::vector<std::int64_t> a{a0};
  std::int64_t m = 0, den = 1, ai = a0;
  while (a.size() < count) {
    m = den * ai - m;
    den = (d - m * m) / den;
    ai = (a0 + m) / den;
    a.push_back(ai);
  }
  return a;
}

// Record-setting |q| by direct search over the half box (first nonzero coordinate positive).
std::vector<std::int64_t> brute_records(const Matrix<Float>& y, std::int64_t q_max) {
  const std::size_t m = y.rows(), n = y.cols();
  std::vector<std::pair<std::int64_t, Float>> best;  // best dist per sup norm
  std::vector<Float> per_norm(static_cast<std::size_t>(q_max) + 1, Float(2));
  std::vector<std::int64_t> v(n, -q_max);
  for (;;) {
    std::size_t lead = 0;
    while (lead < n && v[lead] == 0) ++lead;
    if (lead < n && v[lead] > 0) {
      Float worst = 0;
      for (std::size_t i = 0; i < m; ++i) {
        Float s = 0;
        for (std::size_t j = 0; j < n; ++j) s += y(i, j) * static_cast<long long>(v[j]);
        worst = std::max(worst, Float(mp::abs(s - mp::round(s))));
      }
      const auto norm = static_cast<std::size_t>(sup_norm(v));
      per_norm[norm] = std::min(per_norm[norm], worst);
    }
    std::size_t i = 0;
    while (i < n && v[i] == q_max) v[i++] = -q_max;
    if (i == n) break;
    ++v[i];
  }
  std::vector<std::int64_t> out;
  Float record = 2;
  for (std::int64_t s = 1; s <= q_max; ++s)
    if (per_norm[static_cast<std::size_t>(s)] < record) {
      record = per_norm[static_cast<std::size_t>(s)];
      out.push_back(s);
    }
  return out;
}

void expect_record_invariants(const SystemY& y, const std::vector<ApproxRecord>& recs) {
  const Matrix<Float> yf = y.float_entries();
  for (std::size_t r = 0; r < recs.size(); ++r) {
    for (std::size_t i = 0; i < y.m(); ++i) {
      Float s = 0;
      for (std::size_t j = 0; j < y.n(); ++j) s += yf(i, j) * static_cast<long long>(recs[r].q[j]);
      EXPECT_LE(Float(mp::abs(s - Float(static_cast<long long>(recs[r].p[i])))), Float(0.5) + Float(1e-30));
    }
    EXPECT_EQ(recs[r].qnorm, sup_norm(recs[r].q));
    if (r) {
      EXPECT_LT(recs[r].dist, recs[r - 1].dist);
      EXPECT_GT(recs[r].qnorm, recs[r - 1].qnorm);
    }
  }
}

Float pi_product_f(const std::vector<Float>& x) {
  Float p = 1;
  for (const auto& v : x) p *= mp::abs(v);
  return p;
}

}  // namespace

TEST(BestApproximations, RationalHitsZero) {
  const auto res = best_approximations(SystemY(Matrix<Scalar>{{q(1, 3)}}), 10);
  ASSERT_FALSE(res.records.empty());
  EXPECT_EQ(res.records.back().qnorm, 3);
  EXPECT_EQ(res.records.back().dist, Scalar(0));
  EXPECT_TRUE(res.records.back().dist.is_exact());
}

TEST(BestApproximations, GoldenRatioGivesFibonacci) {
  const auto res = best_approximations(SystemY::parse(kGolden), 100);
  EXPECT_EQ(qnorms(res.records), (std::vector<std::int64_t>{1, 2, 3, 5, 8, 13, 21, 34, 55, 89}));
  EXPECT_EQ(qnorms(res.records), convergent_denominators(std::vector<std::int64_t>(30, 1), 100));
}

TEST(BestApproximations, SqrtTwoGivesPell) {
  const auto res = best_approximations(SystemY::parse("sqrt(2)"), 100);
  EXPECT_EQ(qnorms(res.records), (std::vector<std::int64_t>{1, 2, 5, 12, 29, 70}));
}

TEST(BestApproximations, QuadraticSurdsMatchContinuedFractions) {
  for (std::int64_t d : {3, 7, 13, 19, 31}) {
    const std::int64_t q_max = 100000;
    const auto res = best_approximations(SystemY::parse("sqrt(" + std::to_string(d) + ")"), q_max);
    EXPECT_EQ(qnorms(res.records), convergent_denominators(sqrt_partial_quotients(d, 60), q_max)) << "d = " << d;
  }
}

TEST(BestApproximations, MatchesBruteForceOnRandomSystems) {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t m = 1 + trial % 2, n = trial % 3 == 2 ? 2 : 1;
    Matrix<Scalar> e(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = Scalar(Float(rng.uniform(0, 1)));
    const SystemY y(e);
    const std::int64_t q_max = n == 1 ? 3000 : 40;
    const auto res = best_approximations(y, q_max);
    EXPECT_EQ(qnorms(res.records), brute_records(y.float_entries(), q_max)) << "trial " << trial;
    expect_record_invariants(y, res.records);
  }
}

TEST(BestApproximations, LatticeRouteAgreesWithSweep) {
  const SystemY y = SystemY::parse("sqrt(2), sqrt(3)");
  const auto sweep = best_approximations(y, 200);
  BestApproxOptions opt;
  opt.force_lattice = true;
  const auto lat = best_approximations(y, 200, opt);
  EXPECT_EQ(sweep.method, "exhaustive");
  EXPECT_EQ(lat.method, "lattice");
  EXPECT_EQ(qnorms(sweep.records), qnorms(lat.records));
}

TEST(BestApproximations, RecordInvariantsOnSeveralShapes) {
  for (const char* text : {"sqrt(2); sqrt(3)", "sqrt(2), sqrt(3)", "pi", "e; pi; sqrt(5)"}) {
    const SystemY y = SystemY::parse(text);
    expect_record_invariants(y, best_approximations(y, y.n() == 1 ? 20000 : 300).records);
  }
}

TEST(BestApproximations, RejectsBadHorizon) {
  EXPECT_THROW(best_approximations(SystemY::parse("sqrt(2)"), 0), DomainError);
}

TEST(OmegaEstimate, RationalIsInfinite) {
  const auto fit = omega_estimate(best_approximations(SystemY(Matrix<Scalar>{{q(2, 7)}}), 50).records);
  EXPECT_TRUE(fit.infinite);
  EXPECT_TRUE(mp::isinf(fit.estimate));
}

TEST(OmegaEstimate, GoldenRatioMatchesFibonacciOracle) {
  const auto res = best_approximations(SystemY::parse(kGolden), 100000);
  const auto fit = omega_estimate(res.records, 5);
  // |F_k phi - F_{k+1}| = phi^{-k} by Binet
  const Float phi = (1 + mp::sqrt(Float(5))) / 2;
  Float oracle = 0;
  std::int64_t a = 1, b = 1;
  int k = 2;
  std::vector<Float> ratios;
  while (b <= 100000) {
    if (b > 1) ratios.push_back(Float(k) * mp::log(phi) / mp::log(Float(static_cast<long long>(b))));
    const std::int64_t c = a + b;
    a = b;
    b = c;
    ++k;
  }
  for (std::size_t i = ratios.size() - 5; i < ratios.size(); ++i) oracle = std::max(oracle, ratios[i]);
  EXPECT_LT(Float(mp::abs(fit.tail_max - oracle)), 1e-20);
}

TEST(OmegaEstimate, GoldenRatioBand) {
  const auto fit = omega_estimate(best_approximations(SystemY::parse(kGolden), 100000).records, 5);
  EXPECT_GE(fit.estimate, 0.95);
  EXPECT_LE(fit.estimate, 1.05);
}

TEST(OmegaEstimate, LiouvilleNumber) {
  const auto fit = omega_estimate(best_approximations(SystemY::parse("liouville(10)"), 1000000).records, 5);
  EXPECT_GE(fit.estimate, 3.9);
}

TEST(OmegaEstimate, TooFewRecords) {
  const auto res = best_approximations(SystemY::parse("sqrt(2)"), 3);
  EXPECT_THROW(omega_estimate(res.records), TooFewRecords);
}

TEST(OmegaEstimate, DirichletLowerBoundForRandomSystems) {
  CounterRng rng(33, 0);
  for (const auto [m, n] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 1}}) {
    int hits = 0;
    for (int trial = 0; trial < 100; ++trial) {
      Matrix<Scalar> e(m, n);
      for (std::size_t i = 0; i < m; ++i) e(i, 0) = Scalar(Float(rng.uniform(0, 1)));
      try {
        const auto fit = omega_estimate(best_approximations(SystemY(e), 10000).records);
        if (fit.estimate >= Float(static_cast<long long>(n)) / static_cast<long long>(m) - 0.1) ++hits;
      } catch (const TooFewRecords&) {
      }
    }
    EXPECT_GE(hits, 95) << m << "x" << n;
  }
}

TEST(Products, PiAndPiPlus) {
  EXPECT_EQ(pi_product({q(1, 2), q(3)}), q(3, 2));
  EXPECT_EQ(pi_plus({q(1, 2), q(3)}), q(3));
  EXPECT_EQ(pi_plus({q(-4), q(0), q(1, 5)}), q(4));
  EXPECT_EQ(pi_product({q(-2), q(5)}), q(10));
}

TEST(Products, VeryWellApproximableImpliesMultiplicative) {
  // Pi(Yq - p) <= dist^m and Pi_+(q) <= |q|^n per record
  for (const char* text : {"sqrt(2); sqrt(3)", "sqrt(2), sqrt(3)", "liouville(10)"}) {
    const SystemY y = SystemY::parse(text);
    const auto recs = best_approximations(y, y.n() == 1 ? 100000 : 300).records;
    const Float dirichlet = Float(static_cast<long long>(y.n())) / static_cast<long long>(y.m());
    const Matrix<Float> yf = y.float_entries();
    for (const auto& r : recs) {
      if (r.qnorm < 2 || r.dist == Scalar(0)) continue;
      const Float ratio = -mp::log(r.dist.to_float()) / mp::log(Float(static_cast<long long>(r.qnorm)));
      if (ratio <= dirichlet) continue;
      std::vector<Float> resid;
      for (std::size_t i = 0; i < y.m(); ++i) {
        Float s = -Float(static_cast<long long>(r.p[i]));
        for (std::size_t j = 0; j < y.n(); ++j) s += yf(i, j) * static_cast<long long>(r.q[j]);
        resid.push_back(s);
      }
      std::vector<Scalar> qs;
      for (auto v : r.q) qs.push_back(Scalar(static_cast<long long>(v)));
      const Float prod = pi_product_f(resid), plus = pi_plus(qs).to_float();
      const Float delta = ratio * static_cast<long long>(y.m()) / static_cast<long long>(y.n()) - 1;
      EXPECT_GT(delta, 0);
      if (plus > 1) EXPECT_LE(prod, mp::pow(plus, -(1 + delta)) * (1 + Float(1e-20))) << text;
    }
  }
}

TEST(SingularScan, RationalConsistentGoldenNot) {
  const auto phi = RateFunction::constant(1);
  const std::vector<Scalar> c{q(1, 2), q(1, 5)};
  EXPECT_TRUE(singular_scan(SystemY(Matrix<Scalar>{{q(1, 3)}}), phi, c, Float(4096)).consistent);
  const auto g = singular_scan(SystemY::parse(kGolden), phi, c, Float(4096));
  EXPECT_FALSE(g.consistent);
  EXPECT_EQ(g.verdict, "not-consistent");
  EXPECT_EQ(*g.rows.back().last_failure, g.horizon);
}

TEST(SingularScan, Preconditions) {
  const SystemY y = SystemY::parse("sqrt(2)");
  EXPECT_THROW(singular_scan(y, RateFunction::power(1, 1), {q(1)}, Float(64)), DomainError);
  EXPECT_THROW(singular_scan(y, RateFunction::constant(1), {}, Float(64)), DomainError);
  EXPECT_THROW(singular_scan(y, RateFunction::constant(1), {q(-1)}, Float(64)), DomainError);
}

TEST(DiEpsilon, RationalInDi) {
  std::vector<Float> t;
  for (int i = 1; i <= 20; ++i) t.push_back(Float(i) / 2);
  EXPECT_TRUE(di_epsilon_test(SystemY(Matrix<Scalar>{{q(1, 3)}}), q(1, 2), t).consistent);
}

TEST(DiEpsilon, GoldenRatioThresholds) {
  std::vector<Float> t;
  for (int i = 2; i <= 24; ++i) t.push_back(Float(i) / 2);
  const SystemY y = SystemY::parse(kGolden);
  const auto low = di_epsilon_test(y, Scalar(Float(0.3)), t);
  EXPECT_FALSE(low.consistent);
  const auto high = di_epsilon_test(y, Scalar(Float(0.9)), t);
  EXPECT_TRUE(high.consistent);
  EXPECT_LE(high.burn_in, 3);

  // point by point against a direct search
  const long double g = (1 + std::sqrt(5.0L)) / 2;
  for (const auto* rep : {&low, &high}) {
    const long double eps = rep == &low ? 0.3L : 0.9L;
    for (const auto& p : rep->rows[0].points) {
      const long double tt = p.x.convert_to<long double>();
      const long double bound = eps * std::exp(tt);
      bool found = false;
      for (long long qq = 1; qq < bound && !found; ++qq) {
        const long double v = qq * g;
        found = std::fabs(v - std::round(v)) < eps * std::exp(-tt);
      }
      EXPECT_EQ(p.solvable, found) << "eps " << static_cast<double>(eps) << " t " << static_cast<double>(tt);
    }
  }
}

TEST(DiEpsilon, RejectsEpsOutsideUnitInterval) {
  EXPECT_THROW(di_epsilon_test(SystemY::parse("sqrt(2)"), q(1), {Float(1)}), DomainError);
  EXPECT_THROW(di_epsilon_test(SystemY::parse("sqrt(2)"), q(0), {Float(1)}), DomainError);
}

TEST(WeightedSingularScan, CentralRayExamples) {
  const auto set = WeightSet::central(1, 1, 1, 1, 8);
  const auto phi = RateFunction::constant(1);
  const std::vector<Scalar> c{q(1, 2), q(1, 5)};
  EXPECT_TRUE(weighted_singular_scan(SystemY(Matrix<Scalar>{{q(2, 5)}}), phi, set, c).consistent);
  EXPECT_FALSE(weighted_singular_scan(SystemY::parse(kGolden), phi, set, c).consistent);
}

TEST(WeightedSingularScan, CentralRayMatchesSingularScan) {
  // on the central ray with t = log N the two systems coincide when phi is constant 1
  const SystemY y = SystemY::parse("sqrt(7)");
  std::vector<Weights> pts;
  std::vector<Float> ns;
  for (int j = 1; j <= 10; ++j) {
    const Float n = mp::pow(Float(2), j);
    ns.push_back(n);
    pts.push_back(central_ray(1, 1, Scalar(Float(mp::log(n)))));
  }
  const auto set = WeightSet::explicit_list(pts, Scalar(Float(0.5)));
  const auto phi = RateFunction::constant(1);
  for (const auto& c : {q(1, 2), q(1, 5), q(1)}) {
    // singular scan: |q| < cN, dist < c/N; weighted: |q| < c e^t, dist < c e^{-t}
    const auto a = singular_scan(y, phi, {c}, ns);
    const auto b = weighted_singular_scan(y, phi, set, {c});
    for (std::size_t i = 0; i < ns.size(); ++i) EXPECT_EQ(a.rows[0].points[i].solvable, b.rows[0].points[i].solvable);
  }
}

TEST(Vwma, SqrtTwoSqrtThreeNotConsistent) {
  const auto rep = vwma_scan(SystemY::parse("sqrt(2), sqrt(3)"), {q(1, 2)}, 10000);
  EXPECT_FALSE(rep.degenerate);
  EXPECT_FALSE(rep.consistent);
  EXPECT_EQ(rep.verdict, "not-consistent");
  EXPECT_EQ(rep.horizon, 10000);
}

TEST(Vwma, IntegralRowIsDegenerate) {
  const auto rep = vwma_scan(SystemY(Matrix<Scalar>{{q(0)}, {q(1, 3)}}), {q(1, 2)}, 100);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_EQ(rep.verdict, "degenerate-excluded");
}

TEST(Vwma, CountsMatchDirectSearch) {
  const SystemY y = SystemY::parse("sqrt(2), sqrt(3)");
  const auto rep = vwma_scan(y, {q(1, 10), q(1, 2)}, 60);
  const Float r2 = mp::sqrt(Float(2)), r3 = mp::sqrt(Float(3));
  for (const auto& row : rep.rows) {
    std::uint64_t count = 0;
    for (long long a = -60; a <= 60; ++a)
      for (long long b = -60; b <= 60; ++b) {
        if (a < 0 || (a == 0 && b <= 0)) continue;
        const Float v = r2 * a + r3 * b;
        const Float prod = mp::abs(v - mp::round(v));
        const Float plus = Float(std::max(std::llabs(a), 1LL)) * std::max(std::llabs(b), 1LL);
        if (mp::log(prod) < -(1 + row.delta.to_float()) * mp::log(plus)) ++count;
      }
    EXPECT_EQ(row.total, count);
  }
}

TEST(Transference, RationalAndOneByOneAgree) {
  TransferenceOptions opt;
  opt.q_max = 2000;
  opt.n_max = 16384;
  for (const char* text : {"1/3", "2/7; 1/5", "1/2, 3/4", kGolden, "sqrt(2)", "pi"}) {
    const auto rep = transference_check(SystemY::parse(text), opt);
    EXPECT_TRUE(rep.vwa_agree) << text;
    EXPECT_TRUE(rep.singular_agree) << text;
  }
  const auto r = transference_check(SystemY::parse("2/7; 1/5"), opt);
  EXPECT_TRUE(r.direct.omega.infinite);
  EXPECT_TRUE(r.transposed.omega.infinite);
  EXPECT_TRUE(r.direct.singular.consistent);
}

TEST(Transference, SqrtTwoSqrtThreeBothNotVwa) {
  const auto rep = transference_check(SystemY::parse("sqrt(2), sqrt(3)"));
  EXPECT_EQ(rep.direct.m, 1u);
  EXPECT_EQ(rep.transposed.m, 2u);
  EXPECT_FALSE(rep.direct.vwa);
  EXPECT_FALSE(rep.transposed.vwa);
  EXPECT_TRUE(rep.vwa_agree);
}

TEST(KhintchineGroshev, InverseSquaresConverge) {
  const auto rep = khintchine_groshev_sum(RateFunction::power(1, -2), 1, 1, 1000000);
  const Float zeta2 = mp::pow(Float(mp::acos(Float(-1))), 2) / 6;
  // tail beyond K is about 1/K
  EXPECT_LT(Float(mp::abs(rep.sum - zeta2 + Float(1) / 1000000)), 1e-11);
  EXPECT_EQ(rep.diagnostic, "converges");
  EXPECT_EQ(rep.partial_sums.front().first, 10);
  EXPECT_EQ(rep.partial_sums.back().first, 1000000);
}

TEST(KhintchineGroshev, HarmonicDiverges) {
  const auto rep = khintchine_groshev_sum(RateFunction::power(1, -1), 1, 1, 100000);
  EXPECT_EQ(rep.diagnostic, "diverges");
  // H_K = log K + gamma + O(1/K)
  EXPECT_LT(Float(mp::abs(rep.sum - mp::log(Float(100000)) - Float(0.5772156649015329))), 1e-5);
}

TEST(KhintchineGroshev, SquaredRateInTwoRowsConverges) {
  const auto rep = khintchine_groshev_sum(RateFunction::power(1, -1), 2, 1, 100000);
  EXPECT_EQ(rep.diagnostic, "converges");
  const auto two_cols = khintchine_groshev_sum(RateFunction::power(1, -1), 1, 2, 10000);
  EXPECT_EQ(two_cols.diagnostic, "diverges");
}
