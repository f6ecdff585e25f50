#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/population.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

// One generation: every particle at (t, x) steps to a uniform neighbour and is
// replaced there by a number of children drawn from q_{t,x}. Throws
// PopulationOverflowError (leaving `pop` untouched) when a count would exceed
// 2^63 - 1.
PopulationField evolve_step(const PopulationField& pop, const EnvironmentField& env, RandomStream& rng);

struct DensityStats {
  double rho_star = 0.0;
  double overlap = 0.0;
  Site argmax;  // lexicographically smallest maximizer
};

// rho* = max_x N_x / N and R = sum_x (N_x / N)^2. Throws PreconditionError on
// an empty population.
DensityStats density_stats(const PopulationField& pop);

using RealFunction = std::function<double(std::span<const double>)>;

// sum_x (N_{t,x} / m^t) f(x / sqrt(t)), evaluated without forming m^t.
double clt_statistic(const PopulationField& pop, const RealFunction& f, double m, int t);

struct TrajectoryRecord {
  int t = 0;
  std::uint64_t total = 0;
  double ln_nbar = 0.0;   // -inf once extinct
  double rho_star = 0.0;  // 0 once extinct
  double overlap = 0.0;
  bool alive = true;
};

enum class StopReason { horizon, extinct, overflow };
std::string to_string(StopReason r);

struct TrajectoryOptions {
  // Called with the field at t = 0 and after every step that leaves it alive.
  std::function<void(const PopulationField&)> observer;
};

struct TrajectoryStats {
  std::vector<TrajectoryRecord> records;  // t = 0 .. last simulated step
  StopReason stop = StopReason::horizon;
  std::string overflow_message;
};

// Runs from delta_0 for T steps with branching randomness from `seed`.
// Extinction and overflow end the run early and are recorded, not thrown.
TrajectoryStats run_trajectory(const EnvironmentField& env, int d, int T, std::uint64_t seed,
                               const TrajectoryOptions& options = {});

struct ExtinctionOptions {
  int horizon = 50;
  std::uint64_t replicas = 2000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
  std::uint64_t sw_samples = 100'000;
  int sw_horizon = 0;  // 0: same as horizon
  unsigned workers = 1;
};

struct ExtinctionReport {
  int horizon = 0;
  std::uint64_t replicas = 0;
  std::uint64_t extinct = 0;
  std::uint64_t overflowed = 0;  // counted as surviving
  double e_hat = 0.0;
  Interval e_hat_ci;
  double e_gw = 0.0;
  double gw_residual = 0.0;
  double e_sw = 0.0;
  Interval e_sw_ci;
  // True when the Smith-Wilkinson iterate still moved between horizon/2 and
  // horizon, so e_sw is only a lower estimate of the limit.
  bool sw_lower_bound_only = false;
};

// Smallest fixed point of s -> Q[pgf](s) on [0, 1], by bisection; the
// residual |f(s) - s| at the returned point is written to `residual`.
double galton_watson_extinction(const EnvironmentModel& model, double* residual = nullptr);

ExtinctionReport extinction_estimate(const EnvironmentModel& model, int d, const ExtinctionOptions& options);

}  // namespace brwre
