#include "brwre/offspring.hpp"

#include <cmath>
#include <sstream>

#include "brwre/errors.hpp"
#include "brwre/format.hpp"

namespace brwre {

OffspringLaw OffspringLaw::finite(std::vector<double> probs) {
  if (probs.empty()) throw PreconditionError("OffspringLaw: empty probability vector");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw PreconditionError("OffspringLaw: probabilities must be finite and >= 0");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) throw PreconditionError("OffspringLaw: probabilities must sum to 1");
  while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();
  OffspringLaw law;
  law.kind_ = Kind::finite;
  law.probs_ = std::move(probs);
  for (std::size_t k = 0; k < law.probs_.size(); ++k) law.mean_ += static_cast<double>(k) * law.probs_[k];
  return law;
}

OffspringLaw OffspringLaw::point_mass(int k) {
  if (k < 0) throw PreconditionError("OffspringLaw: point mass must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(k) + 1, 0.0);
  p.back() = 1.0;
  return finite(std::move(p));
}

OffspringLaw OffspringLaw::poisson(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw PreconditionError("OffspringLaw: Poisson mean must be finite and > 0");
  OffspringLaw law;
  law.kind_ = Kind::poisson;
  law.mu_ = mean;
  law.mean_ = mean;
  return law;
}

double OffspringLaw::prob(std::uint64_t k) const {
  if (is_poisson()) {
    const auto kd = static_cast<double>(k);
    return std::exp(kd * std::log(mu_) - mu_ - std::lgamma(kd + 1.0));
  }
  return k < probs_.size() ? probs_[k] : 0.0;
}

double OffspringLaw::pgf(double s) const {
  if (is_poisson()) return std::exp(mu_ * (s - 1.0));
  double v = 0.0;
  for (std::size_t k = probs_.size(); k-- > 0;) v = v * s + probs_[k];
  return v;
}

std::string OffspringLaw::describe() const {
  std::ostringstream os;
  if (is_poisson()) {
    os << "poisson(" << format_real(mu_) << ")";
    return os.str();
  }
  std::size_t nonzero = 0, last = 0;
  for (std::size_t k = 0; k < probs_.size(); ++k)
    if (probs_[k] > 0.0) ++nonzero, last = k;
  if (nonzero == 1 && probs_[last] == 1.0) {
    os << "delta(" << last << ")";
    return os.str();
  }
  os << "finite(";
  bool first = true;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    if (probs_[k] == 0.0) continue;
    if (!first) os << ",";
    os << k << ":" << format_real(probs_[k]);
    first = false;
  }
  os << ")";
  return os.str();
}

namespace {

double poisson_moment_series(double mu, double p) {
  // Sum k^p e^{-mu} mu^k / k! until past the mode and the terms are negligible.
  double sum = 0.0;
  for (std::uint64_t k = 1;; ++k) {
    const auto kd = static_cast<double>(k);
    const double term = std::exp(p * std::log(kd) + kd * std::log(mu) - mu - std::lgamma(kd + 1.0));
    sum += term;
    if (kd > mu + p && term < 1e-17 * sum) break;
    if (k > 100'000'000) throw UnsupportedMomentError("law_moment: series did not converge");
  }
  return sum;
}

}  // namespace

double law_moment(const OffspringLaw& law, double p) {
  if (!(p > 0.0)) throw PreconditionError("law_moment: p must be > 0");
  if (law.is_poisson()) {
    const double mu = law.poisson_mean();
    if (p == 1.0) return mu;
    if (p == 2.0) return mu + mu * mu;
    if (p > 2.0 && p != std::floor(p)) throw UnsupportedMomentError("law_moment: non-integer p > 2 for a Poisson law");
    return poisson_moment_series(mu, p);
  }
  double s = 0.0;
  const auto q = law.probs();
  for (std::size_t k = 1; k < q.size(); ++k) s += std::pow(static_cast<double>(k), p) * q[k];
  return s;
}

std::uint64_t sample_offspring_sum(const OffspringLaw& law, std::uint64_t n, RandomStream& rng) {
  if (n == 0) return 0;
  if (law.is_poisson()) {
    const double mean = static_cast<double>(n) * law.poisson_mean();
    if (mean > 0.9 * static_cast<double>(kCountLimit))
      throw PopulationOverflowError("offspring sum would exceed 2^63 - 1");
    return rng.poisson(mean);
  }
  // Multinomial split of the n parents over the support, by sequential
  // binomials with conditional probabilities.
  const auto q = law.probs();
  std::uint64_t left = n;
  double mass_left = 1.0;
  unsigned __int128 sum = 0;
  for (std::size_t k = 0; k < q.size() && left > 0; ++k) {
    if (q[k] == 0.0) continue;
    std::uint64_t nk;
    if (k + 1 == q.size() || q[k] >= mass_left) {
      nk = left;
    } else {
      nk = rng.binomial(left, q[k] / mass_left);
    }
    left -= nk;
    mass_left -= q[k];
    sum += static_cast<unsigned __int128>(nk) * k;
    if (sum > kCountLimit) throw PopulationOverflowError("offspring sum would exceed 2^63 - 1");
  }
  return static_cast<std::uint64_t>(sum);
}

}  // namespace brwre
