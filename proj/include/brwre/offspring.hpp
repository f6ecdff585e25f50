#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brwre/rng.hpp"

namespace brwre {

// A probability law on {0, 1, 2, ...}: an explicit probability vector or a
// Poisson law.
class OffspringLaw {
 public:
  enum class Kind { finite, poisson };

  // probs[k] = q(k). Must be nonnegative and sum to 1 within 1e-12.
  static OffspringLaw finite(std::vector<double> probs);
  static OffspringLaw point_mass(int k);
  static OffspringLaw poisson(double mean);

  Kind kind() const { return kind_; }
  bool is_poisson() const { return kind_ == Kind::poisson; }
  // Poisson mean (poisson laws only).
  double poisson_mean() const { return mu_; }
  // q(0..K) for finite laws; empty for Poisson.
  std::span<const double> probs() const { return probs_; }

  double prob(std::uint64_t k) const;
  double mean() const { return mean_; }
  // E[s^K] for s in [0, 1].
  double pgf(double s) const;
  std::string describe() const;

  friend bool operator==(const OffspringLaw&, const OffspringLaw&) = default;

 private:
  Kind kind_ = Kind::finite;
  std::vector<double> probs_;
  double mu_ = 0.0;
  double mean_ = 0.0;
};

// m^{(p)} = sum_k k^p q(k). Poisson laws: closed forms for p = 1, 2, series
// otherwise; UnsupportedMomentError for non-integer p > 2.
double law_moment(const OffspringLaw& law, double p);

// Sum of n independent draws from `law`, exactly. Poisson laws use the
// superposition Poisson(n mu); finite laws draw the multinomial vector of how
// many parents got each offspring count. Throws PopulationOverflowError when
// the sum would exceed 2^63 - 1.
std::uint64_t sample_offspring_sum(const OffspringLaw& law, std::uint64_t n, RandomStream& rng);

inline constexpr std::uint64_t kCountLimit = 0x7fffffffffffffffULL;

}  // namespace brwre
