#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brwre/lattice.hpp"
#include "brwre/stats.hpp"

namespace brwre {

// Nearest-neighbour transition probability: 1/(2d) iff |x - y| = 1.
double step_prob(std::span<const int> x, std::span<const int> y, int d);

// p_t(0, .) on the box of radius t, by exact repeated convolution.
LatticeField t_step_distribution(int d, int t, const DpBudget& budget = {});

enum class ReturnProbMethod { series, monte_carlo };

struct ReturnProbEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  ReturnProbMethod method = ReturnProbMethod::series;
  // series: number of Green-function terms used; monte carlo: walks.
  std::uint64_t samples = 0;
  // monte carlo: one-sided allowance for returns after the horizon
  double horizon_bias_bound = 0.0;

  Interval interval() const { return {lower, upper}; }
};

struct MonteCarloWalkOptions {
  std::uint64_t walks = 1'000'000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
};

// pi_d = P(S_t = 0 for some t >= 1). The series method sums the diagonal
// Green function up to t_max and encloses the tail between local-CLT bounds;
// d <= 2 returns exactly [1, 1]. The Monte Carlo method runs walks up to
// horizon t_max.
ReturnProbEstimate return_probability(int d, std::int64_t t_max, ReturnProbMethod method,
                                      const MonteCarloWalkOptions& mc = {});

// Cached series estimate with a horizon that gives an interval narrower than
// 1e-4 for the dimensions used here.
const ReturnProbEstimate& return_probability_interval(int d);

// Backward Feynman-Kac recursion
//   phi_t(x) = E^x[a_t(S_1) phi_{t-1}(S_1)] + b_t(x),  t = 1..T,
// returning phi_T on the box of radius out_radius. The working box is sized
// so that no truncation happens. Values are renormalised into log_scale when
// they grow; b then enters through the same scale.
LatticeField fk_solve(const Kernel& kernel, const SiteFunction& phi0, const TimeSiteFunction& a,
                      const TimeSiteFunction& b, int T, int out_radius, const DpBudget& budget = {});

// Which pair-walk times count towards the collision exponent.
enum class CollisionOrigin {
  from_one,   // sum over u = 1..t
  from_zero,  // sum over u = 0..t-1 (the t=0 coincidence always counts)
};

enum class CollisionMethod { automatic, lattice_dp, renewal };

// Unconditioned: E^{0,0}[alpha^{#collisions}]. Conditioned:
// E^{0,0}[alpha^{#collisions} : S_t = S~_t]. Both through the difference
// walk Y = S - S~.
double collision_weight(int d, int t, double alpha, bool conditioned,
                        CollisionOrigin origin = CollisionOrigin::from_one,
                        CollisionMethod method = CollisionMethod::automatic, const DpBudget& budget = {});

// Limit of the unconditioned from_one weight, (1 - pi)/(1 - alpha pi), as an
// interval over the pi_d enclosure. Requires d >= 3 and alpha * pi_upper < 1.
Interval collision_weight_limit(int d, double alpha);

std::string to_string(ReturnProbMethod m);

}  // namespace brwre

namespace brwre {

// collision_weight for every t = 0..t_max in one renewal pass.
std::vector<double> collision_weights(int d, int t_max, double alpha, bool conditioned,
                                      CollisionOrigin origin = CollisionOrigin::from_one);

}  // namespace brwre
