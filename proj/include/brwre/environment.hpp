#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brwre/eta.hpp"
#include "brwre/offspring.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

struct MixtureComponent {
  OffspringLaw law;
  double weight = 1.0;
};

// The law Q of one environment cell: a finite mixture of offspring laws, or
// Poisson(exp(beta eta)) coupled from a polymer environment law.
class EnvironmentModel {
 public:
  static EnvironmentModel mixture(std::vector<MixtureComponent> components);
  static EnvironmentModel single(OffspringLaw law);
  static EnvironmentModel coupled(EtaLaw eta, double beta);

  bool is_coupled() const { return coupling_.has_value(); }
  // Mixture components. A coupled model with a finite eta law lists its
  // Poisson components here too; a gaussian coupled model has none.
  const std::vector<MixtureComponent>& components() const { return components_; }
  bool enumerable() const { return !components_.empty(); }
  const EtaLaw& eta_law() const;
  double beta() const;

  // One cell law drawn from Q.
  OffspringLaw sample_law(RandomStream& rng) const;
  // pgf of the Q-averaged offspring law Q[q(.)].
  double averaged_pgf(double s) const;
  std::string describe() const;

 private:
  struct Coupling {
    EtaLaw eta;
    double beta;
  };
  std::vector<MixtureComponent> components_;
  std::optional<Coupling> coupling_;
};

struct EnvMoments {
  double m = 0.0;       // Q[m_{t,x}]
  double m2 = 0.0;      // m^{(2)} = Q[m^{(2)}_{t,x}]
  double q_m_sq = 0.0;  // Q[m_{t,x}^2]
  double alpha = 1.0;   // Q[m_{t,x}^2] / m^2
  double c = 0.0;       // m^{(2)} / m - 1
};

EnvMoments env_moments(const EnvironmentModel& model);

// Q[(m_{t,x}/m) ln(m_{t,x}/m)].
double mean_entropy(const EnvironmentModel& model);
// Q(m_{t,x} = m) != 1.
bool nondegenerate(const EnvironmentModel& model);

// One quenched environment: the law at (t, x) is a pure function of
// (seed, t, x). Immutable and safe to share between threads.
class EnvironmentField {
 public:
  EnvironmentField(EnvironmentModel model, std::uint64_t seed);

  const EnvironmentModel& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }

  // Mixture component index (models with components only).
  std::size_t component_at(std::int64_t t, std::span<const int> x) const;
  OffspringLaw law_at(std::int64_t t, std::span<const int> x) const;
  double mean_at(std::int64_t t, std::span<const int> x) const;
  // Total offspring of n parents departing from (t, x).
  std::uint64_t sample_children(std::int64_t t, std::span<const int> x, std::uint64_t n, RandomStream& rng) const;

 private:
  EnvironmentModel model_;
  std::uint64_t seed_;
  std::vector<double> cumulative_;
  std::optional<EtaField> eta_;
};

// Environment with law Poisson(exp(beta eta_{t,x})) at every cell, reading
// the same eta values as `eta`.
EnvironmentField couple_from_eta(const EtaField& eta, double beta);

enum class L2Status { holds, fails, inconclusive, not_applicable };

struct PhaseReport {
  int dimension = 0;
  EnvMoments moments;
  Interval pi;
  bool supercritical = false;  // m > 1
  L2Status l2 = L2Status::not_applicable;
  bool nondegenerate = false;
  double entropy = 0.0;
  bool strong_a1 = false;
  bool strong_a2 = false;
  bool strong_a3 = false;

  std::vector<std::string> labels() const;
};

PhaseReport classify_phase(const EnvironmentModel& model, int d);
std::string to_string(L2Status s);

}  // namespace brwre
