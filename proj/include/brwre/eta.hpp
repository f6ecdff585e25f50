#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace brwre {

// Law of the polymer environment eta: finitely many real atoms, or a centered
// gaussian with standard deviation sigma.
class EtaLaw {
 public:
  enum class Kind { finite, gaussian };

  static EtaLaw finite(std::vector<double> values, std::vector<double> weights);
  static EtaLaw gaussian(double sigma);

  Kind kind() const { return kind_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  double sigma() const { return sigma_; }

  // True when eta is almost surely constant.
  bool degenerate() const;
  // Map a pair of independent uniforms in (0,1) to a draw.
  double draw(double u1, double u2) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::finite;
  std::vector<double> values_;
  std::vector<double> weights_;
  double sigma_ = 0.0;
};

// lambda(beta) = ln Q[exp(beta eta)].
double lambda_of_beta(const EtaLaw& law, double beta);

// Q[exp(beta eta - lambda) (beta eta - lambda)], the relative entropy of the
// size-biased law of m = exp(beta eta).
double tilted_entropy(const EtaLaw& law, double beta);

// Deterministic realization of eta: the value at (t, x) depends only on
// (seed, t, x).
class EtaField {
 public:
  EtaField(EtaLaw law, std::uint64_t seed) : law_(std::move(law)), seed_(seed) {}

  double at(std::int64_t t, std::span<const int> x) const;
  const EtaLaw& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }

 private:
  EtaLaw law_;
  std::uint64_t seed_;
};

}  // namespace brwre
