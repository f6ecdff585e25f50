#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "brwre/errors.hpp"
#include "brwre/lattice_walk.hpp"

using namespace brwre;

namespace {
Site site(std::initializer_list<int> v) { return Site(v); }
}  // namespace

TEST(StepProb, NearestNeighbourOnly) {
  EXPECT_DOUBLE_EQ(step_prob(site({0, 0}), site({1, 0}), 2), 0.25);
  EXPECT_EQ(step_prob(site({0, 0, 0}), site({0, 0, 0}), 3), 0.0);
  EXPECT_EQ(step_prob(site({0, 0}), site({1, 1}), 2), 0.0);
  EXPECT_EQ(step_prob(site({0}), site({2}), 1), 0.0);
}

TEST(StepProb, RowsSumToOne) {
  for (int d = 1; d <= 4; ++d) {
    const Site x(static_cast<std::size_t>(d), 3);
    double s = 0.0;
    LatticeBox box(d, 5);
    for_each_cell(box, 5, [&](std::size_t, std::span<const int> y) { s += step_prob(x, y, d); });
    EXPECT_DOUBLE_EQ(s, 1.0) << "d=" << d;
  }
}

TEST(TStepDistribution, ZeroStepsIsDelta) {
  for (int d = 1; d <= 3; ++d) {
    const auto p = t_step_distribution(d, 0);
    EXPECT_EQ(p.values.size(), 1u);
    EXPECT_EQ(p.values[0], 1.0);
  }
}

TEST(TStepDistribution, TwoStepsInOneDimension) {
  const auto p = t_step_distribution(1, 2);
  EXPECT_DOUBLE_EQ(p.at({0}), 0.5);
  EXPECT_DOUBLE_EQ(p.at({2}), 0.25);
  EXPECT_DOUBLE_EQ(p.at({-2}), 0.25);
  EXPECT_EQ(p.at({1}), 0.0);
}

TEST(TStepDistribution, MassParityAndSymmetry) {
  const int d = 3, t = 6;
  const auto p = t_step_distribution(d, t);
  EXPECT_NEAR(p.total(), 1.0, 1e-12);
  for_each_cell(p.box, t, [&](std::size_t i, std::span<const int> x) {
    int l1 = 0;
    for (int v : x) l1 += std::abs(v);
    if (l1 > t || (l1 - t) % 2 != 0) {
      EXPECT_EQ(p.values[i], 0.0);
    }
    // signed coordinate permutation
    const int y[3]{-x[2], x[0], -x[1]};
    EXPECT_NEAR(p.values[i], p.at(std::span<const int>(y)), 1e-15);
  });
}

TEST(TStepDistribution, BudgetIsEnforced) {
  EXPECT_THROW(t_step_distribution(3, 20, DpBudget{1000}), ResourceLimitError);
}

TEST(ReturnProbability, RecurrentDimensionsAreExactlyOne) {
  for (int d : {1, 2}) {
    const auto e = return_probability(d, 1000, ReturnProbMethod::series);
    EXPECT_EQ(e.lower, 1.0);
    EXPECT_EQ(e.point, 1.0);
    EXPECT_EQ(e.upper, 1.0);
  }
}

TEST(ReturnProbability, ThreeDimensionalSeriesInterval) {
  const auto e = return_probability(3, 10000, ReturnProbMethod::series);
  EXPECT_LE(e.lower, e.point);
  EXPECT_LE(e.point, e.upper);
  EXPECT_LT(e.lower, 0.3405373);
  EXPECT_GT(e.upper, 0.3405373);
  EXPECT_LT(e.interval().width(), 1e-4);
}

TEST(ReturnProbability, MonteCarloBracketsSeries) {
  MonteCarloWalkOptions mc;
  mc.walks = 20000;
  mc.seed = 3;
  const auto m = return_probability(3, 2000, ReturnProbMethod::monte_carlo, mc);
  const auto s = return_probability_interval(3);
  EXPECT_LE(m.lower, m.point);
  EXPECT_LE(m.point, m.upper);
  EXPECT_LE(m.lower, s.upper);
  EXPECT_GE(m.upper, s.lower);
}

TEST(FkSolve, PureExpectation) {
  const auto k = simple_random_walk_kernel(1);
  auto f = [](std::span<const int> x) { return static_cast<double>(x[0] * x[0]); };
  auto one = [](int, std::span<const int>) { return 1.0; };
  auto zero = [](int, std::span<const int>) { return 0.0; };
  const auto phi = fk_solve(k, f, one, zero, 5, 2);
  // E^x[S_5^2] = x^2 + 5
  for (int x = -2; x <= 2; ++x) EXPECT_NEAR(phi.at({x}), x * x + 5.0, 1e-12);
}

TEST(FkSolve, ConstantMultiplier) {
  const auto k = simple_random_walk_kernel(2);
  auto one_site = [](std::span<const int>) { return 1.0; };
  auto alpha = [](int, std::span<const int>) { return 1.3; };
  auto zero = [](int, std::span<const int>) { return 0.0; };
  const auto phi = fk_solve(k, one_site, alpha, zero, 4, 1);
  for (double v : phi.values) EXPECT_NEAR(v * std::exp(phi.log_scale), std::pow(1.3, 4), 1e-12);
}

TEST(FkSolve, MatchesPathEnumeration) {
  auto a = [](int t, std::span<const int> x) { return 0.5 + std::fmod(std::abs(std::sin(7.0 * t + 3.0 * x[0])), 1.0); };
  auto b = [](int t, std::span<const int> x) { return 0.1 * std::cos(t + 2.0 * x[0]); };
  auto phi0 = [](std::span<const int> x) { return 1.0 + 0.25 * x[0]; };
  std::function<double(int, int)> naive = [&](int t, int x) -> double {
    if (t == 0) {
      const int s[1]{x};
      return phi0(s);
    }
    double v = 0.0;
    for (int step : {-1, 1}) {
      const int y[1]{x + step};
      v += 0.5 * a(t, y) * naive(t - 1, x + step);
    }
    const int s[1]{x};
    return v + b(t, s);
  };
  const auto phi = fk_solve(simple_random_walk_kernel(1), phi0, a, b, 3, 2);
  for (int x = -2; x <= 2; ++x) EXPECT_NEAR(phi.at({x}), naive(3, x), 1e-13);
}

TEST(FkSolve, SemigroupProperty) {
  const auto k = simple_random_walk_kernel(2);
  auto a = [](int t, std::span<const int> x) { return 1.0 + 0.1 * std::cos(t + x[0] - 2.0 * x[1]); };
  auto zero = [](int, std::span<const int>) { return 0.0; };
  auto phi0 = [](std::span<const int> x) { return std::exp(-0.1 * (x[0] * x[0] + x[1] * x[1])); };
  const int T = 5;
  const auto whole = fk_solve(k, phi0, a, zero, T, 0);
  // one step at a time, feeding the field back in
  LatticeField cur = fk_solve(k, phi0, [&](int, std::span<const int> x) { return a(1, x); }, zero, 1, T - 1);
  for (int t = 2; t <= T; ++t) {
    const LatticeField prev = cur;
    auto from_prev = [&](std::span<const int> x) { return prev.at(x) * std::exp(prev.log_scale); };
    cur = fk_solve(k, from_prev, [&](int, std::span<const int> x) { return a(t, x); }, zero, 1, T - t);
  }
  EXPECT_NEAR(whole.values[0] * std::exp(whole.log_scale), cur.values[0] * std::exp(cur.log_scale), 1e-12);
}

TEST(CollisionWeight, AlphaOneIsOne) {
  for (int d = 1; d <= 3; ++d)
    for (int t : {0, 1, 5, 20}) EXPECT_NEAR(collision_weight(d, t, 1.0, false), 1.0, 1e-12);
}

TEST(CollisionWeight, OneStepInOneDimension) {
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) EXPECT_NEAR(collision_weight(1, 1, alpha, false), (1.0 + alpha) / 2.0, 1e-15);
}

TEST(CollisionWeight, LatticeAndRenewalAgree) {
  for (int d = 1; d <= 3; ++d)
    for (int t = 0; t <= 6; ++t)
      for (auto o : {CollisionOrigin::from_one, CollisionOrigin::from_zero})
        for (bool cond : {false, true}) {
          const double a = collision_weight(d, t, 1.7, cond, o, CollisionMethod::lattice_dp);
          const double b = collision_weight(d, t, 1.7, cond, o, CollisionMethod::renewal);
          EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a)) << d << " " << t;
        }
}

TEST(CollisionWeight, ConditionedAtAlphaOneIsReturnProbability) {
  for (int t = 0; t <= 8; ++t) {
    const auto p = t_step_distribution(2, 2 * t);
    EXPECT_NEAR(collision_weight(2, t, 1.0, true), p.at({0, 0}), 1e-14);
  }
}

TEST(CollisionWeight, MonotoneInTime) {
  const auto up = collision_weights(3, 200, 1.5, false);
  const auto down = collision_weights(3, 200, 0.6, false);
  for (std::size_t t = 1; t < up.size(); ++t) {
    EXPECT_GE(up[t], up[t - 1] - 1e-15);
    EXPECT_LE(down[t], down[t - 1] + 1e-15);
  }
}

TEST(CollisionWeight, ConvergesToGeometricLimit) {
  const double alpha = 1.5;
  const Interval lim = collision_weight_limit(3, alpha);
  const double w = collision_weight(3, 4000, alpha, false);
  // the tail of sum_t p_2t(0,0) beyond t decays like t^{-1/2}
  EXPECT_LT(w, lim.upper);
  EXPECT_GT(w, lim.lower - 0.02);
  EXPECT_THROW(collision_weight_limit(2, alpha), PreconditionError);
  EXPECT_THROW(collision_weight_limit(3, 3.0), PreconditionError);
}
