#pragma once

#include <cstdint>
#include <vector>

#include "brwre/environment.hpp"

namespace brwre {

// Exact annealed law of a tiny d = 1 instance, by exhaustive enumeration of
// configurations. Each environment cell is integrated out where it is used
// (cells are i.i.d. and each is used by one set of parents). Poisson laws
// are truncated where the tail drops below 1e-16.
struct ExactLawTable {
  int T = 0;
  double m = 0.0;
  std::uint64_t atoms = 0;          // configurations enumerated over all times
  double total_probability = 0.0;   // of the time T-1 configurations
  std::vector<double> mean;         // E[N_{T,x}], x = -T..T
  std::vector<double> pair;         // E[N_{T,x} N_{T,x~}], row-major
  std::vector<double> total_law;    // P(N_T = k)
  // max over time-t configurations of |E[Nbar_{t+1} | config] - Nbar_t|,
  // for t = 0..T-1.
  std::vector<double> martingale_residual;

  double mean_at(int x) const;
  double pair_at(int x, int xt) const;
  // E[Nbar_T^2] and sum_x E[Nbar_{T,x}^2].
  double normalized_second_moment() const;
  double normalized_overlap_sum() const;
};

ExactLawTable brute_force_oracle(const EnvironmentModel& model, int T, std::uint64_t atom_budget = 10'000'000);

}  // namespace brwre
