#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/lattice.hpp"
#include "brwre/stats.hpp"
#include "brwre/test_function.hpp"

namespace brwre {

struct ConvergenceRow {
  int T = 0;
  std::size_t replicas = 0;    // requested
  std::size_t used = 0;        // replicas entering the statistic
  std::size_t extinct = 0;     // died by T (statistic 0, still used)
  std::size_t overflowed = 0;  // count limit hit by T (excluded)
  double mean = 0.0;           // of D_T^2
  double variance = 0.0;
  double std_error = 0.0;
  double target = 0.0;  // exact E[D_T^2], NaN when out of budget
  double standardized_error = 0.0;
};

struct ConvergenceTable {
  std::string function;
  bool exploratory = false;  // model not in the L2 regime
  std::vector<ConvergenceRow> rows;
};

struct ExperimentOptions {
  unsigned workers = 1;
  DpBudget budget{};
};

// D_T = sum_x Nbar_{T,x} f(x/sqrt T) - Nbar_T int f g_1 per replica (fresh
// environment and branching), at every horizon of the ladder from one
// trajectory per replica.
ConvergenceTable clt_l2_experiment(const EnvironmentModel& model, int d, const TestFunction& f,
                                   const std::vector<int>& horizons, std::size_t replicas, std::uint64_t seed,
                                   const ExperimentOptions& options = {});

struct ExceedanceRow {
  double epsilon = 0.0;
  std::size_t exceed = 0;
  double rate = 0.0;
  Interval ci;
};

struct ConditionalCltResult {
  int T = 0;
  std::size_t replicas = 0;
  std::size_t survivors = 0;   // N_T > 0, standing in for Nbar_infinity > 0
  std::size_t overflowed = 0;  // excluded
  double survival = 0.0;
  Interval survival_ci;
  std::vector<ExceedanceRow> rows;
};

// P(|sum_x rho_{T,x} f(x/sqrt T) - int f g_1| >= eps | N_T > 0) for each eps.
ConditionalCltResult conditional_clt_experiment(const EnvironmentModel& model, int d, const TestFunction& f, int T,
                                                std::size_t replicas, const std::vector<double>& epsilons,
                                                std::uint64_t seed, double confidence = 0.99,
                                                const ExperimentOptions& options = {});

struct OverlapRow {
  int T = 0;
  std::size_t survivors = 0;
  std::size_t overflowed = 0;
  double q50 = 0.0;  // quantiles of T^{d/2} R_T among survivors
  double q90 = 0.0;
  double q99 = 0.0;
  double exact = 0.0;  // T^{d/2} sum_x E[Nbar_{T,x}^2]
};

std::vector<OverlapRow> overlap_quantile_rows(int d, const std::vector<int>& horizons,
                                              const std::vector<std::vector<double>>& overlaps);

std::vector<OverlapRow> overlap_scaling_experiment(const EnvironmentModel& model, int d,
                                                   const std::vector<int>& horizons, std::size_t replicas,
                                                   std::uint64_t seed, const ExperimentOptions& options = {});

}  // namespace brwre
