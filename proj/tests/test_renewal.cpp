#include <gtest/gtest.h>

#include <cmath>

#include "brwre/lattice_walk.hpp"
#include "brwre/renewal.hpp"

using namespace brwre;

TEST(ReturnProbabilities, MatchLatticeDistribution) {
  for (int d = 1; d <= 3; ++d) {
    const auto u = return_probabilities(d, 6);
    for (int n = 0; n <= 6; ++n) {
      const auto p = t_step_distribution(d, 2 * n);
      const Site o(static_cast<std::size_t>(d), 0);
      EXPECT_NEAR(u[static_cast<std::size_t>(n)], p.at(o), 1e-15) << d << " " << n;
    }
  }
}

TEST(MeetingOverlap, MatchesDirectSum) {
  const double omega = 0.37;
  for (int d = 1; d <= 3; ++d) {
    const auto w = meeting_overlap(d, 5, omega);
    for (int n = 0; n <= 5; ++n) {
      const auto p = t_step_distribution(d, n);
      double s = 0.0;
      for_each_cell(p.box, n, [&](std::size_t i, std::span<const int> y) {
        s += p.values[i] * p.values[i] * std::cos(omega * y[0]);
      });
      EXPECT_NEAR(w[static_cast<std::size_t>(n)], s, 1e-15);
    }
  }
}

TEST(RenewalSeries, FirstVisitsAndAvoidanceAreConsistent) {
  const auto u = return_probabilities(2, 30);
  const std::vector<double> ones(u.size(), 1.0);
  const RenewalSeries r(u, ones);
  // at alpha = 1 the weights are plain probabilities
  const auto free1 = r.free_from_one(1.0);
  const auto pinned = r.pinned(1.0);
  for (std::size_t n = 0; n < u.size(); ++n) {
    EXPECT_NEAR(free1[n], 1.0, 1e-12);
    EXPECT_NEAR(pinned[n], u[n], 1e-15);
  }
  // avoid(n) = 1 - sum_{k<=n} first(k)
  double s = 0.0;
  for (std::size_t n = 1; n < u.size(); ++n) {
    s += r.first_visit()[n];
    EXPECT_NEAR(r.avoid()[n], 1.0 - s, 1e-13);
  }
}

TEST(RenewalSeries, FromZeroIsAlphaTimesShiftedFromOne) {
  const auto u = return_probabilities(3, 40);
  const std::vector<double> ones(u.size(), 1.0);
  const RenewalSeries r(u, ones);
  const double a = 1.8;
  const auto z = r.free_from_zero(a);
  // counting u = 0..n-1 vs 1..n differs by the origin visit and the last step
  const auto dp = collision_weight(3, 7, a, false, CollisionOrigin::from_zero, CollisionMethod::lattice_dp);
  EXPECT_NEAR(z[7], dp, 1e-13);
  EXPECT_NEAR(z[1], a, 1e-15);
}
