#include "brwre/eta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "brwre/errors.hpp"
#include "brwre/format.hpp"
#include "brwre/rng.hpp"

namespace brwre {

namespace {
constexpr std::uint64_t kEtaStreamA = 0x65746131;
constexpr std::uint64_t kEtaStreamB = 0x65746132;
}  // namespace

EtaLaw EtaLaw::finite(std::vector<double> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw PreconditionError("EtaLaw: values and weights must be non-empty and of equal length");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw PreconditionError("EtaLaw: values must be finite");
    if (!(weights[i] >= 0.0)) throw PreconditionError("EtaLaw: weights must be >= 0");
    s += weights[i];
  }
  if (std::abs(s - 1.0) > 1e-12) throw PreconditionError("EtaLaw: weights must sum to 1");
  EtaLaw law;
  law.kind_ = Kind::finite;
  law.values_ = std::move(values);
  law.weights_ = std::move(weights);
  return law;
}

EtaLaw EtaLaw::gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw PreconditionError("EtaLaw: sigma must be finite and >= 0");
  EtaLaw law;
  law.kind_ = Kind::gaussian;
  law.sigma_ = sigma;
  return law;
}

bool EtaLaw::degenerate() const {
  if (kind_ == Kind::gaussian) return sigma_ == 0.0;
  int support = 0;
  double first = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    if (support == 0) first = values_[i];
    else if (values_[i] != first) return false;
    ++support;
  }
  return true;
}

double EtaLaw::draw(double u1, double u2) const {
  if (kind_ == Kind::gaussian) {
    // Box-Muller, cosine branch.
    return sigma_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += weights_[i];
    if (u1 < acc && weights_[i] > 0.0) return values_[i];
  }
  for (std::size_t i = values_.size(); i-- > 0;)
    if (weights_[i] > 0.0) return values_[i];
  return values_.back();
}

std::string EtaLaw::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::gaussian) {
    os << "gaussian(" << format_real(sigma_) << ")";
    return os.str();
  }
  os << "finite(";
  for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? "," : "") << format_real(values_[i]) << ":" << format_real(weights_[i]);
  os << ")";
  return os.str();
}

double lambda_of_beta(const EtaLaw& law, double beta) {
  if (law.kind() == EtaLaw::Kind::gaussian) {
    const double b = beta * law.sigma();
    return 0.5 * b * b;
  }
  double hi = -std::numeric_limits<double>::infinity();
  const auto v = law.values();
  const auto w = law.weights();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (w[i] > 0.0) hi = std::max(hi, beta * v[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (w[i] > 0.0) s += w[i] * std::exp(beta * v[i] - hi);
  return hi + std::log(s);
}

double tilted_entropy(const EtaLaw& law, double beta) {
  if (law.kind() == EtaLaw::Kind::gaussian) {
    const double b = beta * law.sigma();
    return 0.5 * b * b;
  }
  const double lam = lambda_of_beta(law, beta);
  double s = 0.0;
  const auto v = law.values();
  const auto w = law.weights();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double z = beta * v[i] - lam;
    s += w[i] * std::exp(z) * z;
  }
  return s;
}

double EtaField::at(std::int64_t t, std::span<const int> x) const {
  const std::uint64_t h = hash_cell(seed_, kEtaStreamA, t, x);
  if (law_.kind() == EtaLaw::Kind::finite) return law_.draw(to_unit(h), 0.0);
  return law_.draw(to_open_unit(h), to_unit(hash_cell(seed_, kEtaStreamB, t, x)));
}

}  // namespace brwre
