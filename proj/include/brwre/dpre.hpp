#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/eta.hpp"
#include "brwre/lattice.hpp"
#include "brwre/parallel.hpp"
#include "brwre/stats.hpp"

namespace brwre {

using EtaFunction = std::function<double(int, std::span<const int>)>;

struct PolymerResult {
  int T = 0;
  double beta = 0.0;
  double log_z = 0.0;
  double log_zbar = 0.0;  // log_z - T lambda(beta)
  LatticeField endpoint;  // mu_T(S_T = .), normalized
};

// Transfer DP for Z_T = E_S[exp(beta sum_{t<T} eta_{t,S_t})]: the site at
// time T carries no weight.
PolymerResult polymer_dp(const EtaFunction& eta, double lambda, double beta, int T, int d,
                         const DpBudget& budget = {});
PolymerResult polymer_dp(const EtaField& eta, double beta, int T, int d, const DpBudget& budget = {});

struct CouplingResiduals {
  double log_total = 0.0;  // |ln P^q[N_T] - ln Z_T|, worst of two routes for P^q[N_T]
  double endpoint = 0.0;   // max_x |ln mu_T(x) - ln(P^q[N_{T,x}] / P^q[N_T])|
};

// Compares the polymer DP with the quenched mean of the coupled BRWRE
// (Poisson(exp(beta eta)) offspring).
CouplingResiduals coupling_identity_check(const EtaField& eta, double beta, int T, int d,
                                          const DpBudget& budget = {});

struct ShiftResiduals {
  double endpoint = 0.0;  // max_x |mu_T(x) - mu'_T(x)|
  double log_z = 0.0;     // |ln Z'_T - ln Z_T - beta h T|
};

// eta -> eta + h leaves mu_T unchanged and shifts ln Z_T by beta h T.
ShiftResiduals eta_shift_check(const EtaField& eta, double beta, double h, int T, int d,
                               const DpBudget& budget = {});

enum class Decision { holds, fails, inconclusive };
std::string to_string(Decision d);

struct DpreCriterion {
  double gap = 0.0;  // lambda(2 beta) - 2 lambda(beta)
  Interval bound;    // ln(1 / pi_d)
  Decision decision = Decision::inconclusive;
};

// gap < ln(1/pi_d), decided against the pi_d enclosure.
DpreCriterion dpre_clt_criterion(const EtaLaw& law, double beta, int d);

enum class SlopeRoute { polymer, branching };
std::string to_string(SlopeRoute r);

struct SlopeOptions {
  SlopeRoute route = SlopeRoute::polymer;
  double confidence = 0.99;
  unsigned workers = 1;
  DpBudget budget{};
};

struct SlopeEstimate {
  SlopeRoute route = SlopeRoute::polymer;
  int T = 0;
  std::size_t replicas = 0;
  std::size_t used = 0;
  std::size_t extinct = 0;     // branching route: died before T
  std::size_t overflowed = 0;  // branching route: count limit reached
  double slope = 0.0;          // mean of the per-replica slopes
  Interval ci;                 // student-t interval for that mean
  bool exploratory = false;    // no strong-disorder condition applies
  std::vector<double> per_replica;
};

// Per replica (fresh environment) fits ln Nbar_t against t over [T/2, T].
// The polymer route uses the quenched mean ln P^q[Nbar_t] (= ln Zbar_t for
// coupled models); the branching route simulates N_t.
SlopeEstimate strong_disorder_slope(const EnvironmentModel& model, int d, int T, std::size_t replicas,
                                    std::uint64_t seed, const SlopeOptions& options = {});

struct ZbarEnumeration {
  std::uint64_t atoms = 0;
  // max over t < T and over eta on times < t of |Q[Zbar_{t+1} | .] - Zbar_t|
  double max_residual = 0.0;
  double mean = 0.0;           // Q[Zbar_T]
  double second_moment = 0.0;  // Q[Zbar_T^2]
};

// Exhaustive enumeration for a finite eta law, d = 1, T <= 3. Zbar is
// computed by summing over all walk paths.
ZbarEnumeration zbar_enumeration(const EtaLaw& law, double beta, int T, std::uint64_t atom_budget = 10'000'000);

// Q[Zbar_T^2] = E^{0,0}[exp((lambda(2 beta) - 2 lambda(beta)) #{u < T : S_u = S~_u})].
double zbar_second_moment(const EtaLaw& law, double beta, int d, int T);

struct ZbarMeanCheck {
  MeanEstimate estimate;
  double z_score = 0.0;  // (mean - 1) / std_error
};

ZbarMeanCheck zbar_mean_one(const EtaLaw& law, double beta, int d, int T, std::size_t replicas, std::uint64_t seed,
                            unsigned workers = 1);

}  // namespace brwre
