#include "brwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "brwre/errors.hpp"
#include "brwre/format.hpp"
#include "brwre/lattice_walk.hpp"

namespace brwre {

namespace {
constexpr std::uint64_t kComponentStream = 0x636f6d70;

void check_weights(const std::vector<MixtureComponent>& comps) {
  if (comps.empty()) throw PreconditionError("EnvironmentModel: no components");
  double s = 0.0;
  for (const auto& c : comps) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw PreconditionError("EnvironmentModel: weights must be >= 0");
    s += c.weight;
  }
  if (std::abs(s - 1.0) > 1e-12) throw PreconditionError("EnvironmentModel: weights must sum to 1");
}

// Q[F(exp(beta sigma Z))] for a standard normal Z.
template <class F>
double gaussian_expectation(double scale, F&& f) {
  auto integrand = [&](double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * f(std::exp(scale * z));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -40.0, 40.0, 15, 1e-14);
}
}  // namespace

EnvironmentModel EnvironmentModel::mixture(std::vector<MixtureComponent> components) {
  check_weights(components);
  EnvironmentModel model;
  model.components_ = std::move(components);
  return model;
}

EnvironmentModel EnvironmentModel::single(OffspringLaw law) { return mixture({{std::move(law), 1.0}}); }

EnvironmentModel EnvironmentModel::coupled(EtaLaw eta, double beta) {
  if (!std::isfinite(beta)) throw PreconditionError("EnvironmentModel: beta must be finite");
  EnvironmentModel model;
  if (eta.kind() == EtaLaw::Kind::finite) {
    for (std::size_t i = 0; i < eta.values().size(); ++i)
      model.components_.push_back({OffspringLaw::poisson(std::exp(beta * eta.values()[i])), eta.weights()[i]});
  }
  model.coupling_ = Coupling{std::move(eta), beta};
  return model;
}

const EtaLaw& EnvironmentModel::eta_law() const {
  if (!coupling_) throw PreconditionError("EnvironmentModel: not coupled from eta");
  return coupling_->eta;
}

double EnvironmentModel::beta() const {
  if (!coupling_) throw PreconditionError("EnvironmentModel: not coupled from eta");
  return coupling_->beta;
}

OffspringLaw EnvironmentModel::sample_law(RandomStream& rng) const {
  if (coupling_ && coupling_->eta.kind() == EtaLaw::Kind::gaussian) {
    const double u1 = to_open_unit(rng.bits());
    const double u2 = rng.uniform();
    return OffspringLaw::poisson(std::exp(coupling_->beta * coupling_->eta.draw(u1, u2)));
  }
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& c : components_) {
    acc += c.weight;
    if (u < acc && c.weight > 0.0) return c.law;
  }
  for (auto it = components_.rbegin(); it != components_.rend(); ++it)
    if (it->weight > 0.0) return it->law;
  return components_.back().law;
}

double EnvironmentModel::averaged_pgf(double s) const {
  if (coupling_ && coupling_->eta.kind() == EtaLaw::Kind::gaussian) {
    const double scale = coupling_->beta * coupling_->eta.sigma();
    return gaussian_expectation(scale, [s](double mean) { return std::exp(mean * (s - 1.0)); });
  }
  double v = 0.0;
  for (const auto& c : components_) v += c.weight * c.law.pgf(s);
  return v;
}

std::string EnvironmentModel::describe() const {
  std::ostringstream os;
  if (coupling_) {
    os << "coupled(" << coupling_->eta.describe() << ",beta=" << format_real(coupling_->beta) << ")";
    return os.str();
  }
  for (std::size_t i = 0; i < components_.size(); ++i)
    os << (i ? ";" : "") << format_real(components_[i].weight) << "*" << components_[i].law.describe();
  return os.str();
}

EnvMoments env_moments(const EnvironmentModel& model) {
  EnvMoments e;
  if (model.is_coupled()) {
    const double lam1 = lambda_of_beta(model.eta_law(), model.beta());
    const double lam2 = lambda_of_beta(model.eta_law(), 2.0 * model.beta());
    e.m = std::exp(lam1);
    e.q_m_sq = std::exp(lam2);
    e.m2 = e.m + e.q_m_sq;
    e.alpha = std::exp(lam2 - 2.0 * lam1);
  } else {
    for (const auto& c : model.components()) {
      const double mi = c.law.mean();
      e.m += c.weight * mi;
      e.q_m_sq += c.weight * mi * mi;
      e.m2 += c.weight * law_moment(c.law, 2.0);
    }
    if (!(e.m > 0.0)) throw PreconditionError("env_moments: mean offspring must be > 0");
    e.alpha = e.q_m_sq / (e.m * e.m);
  }
  if (!std::isfinite(e.m2) || !std::isfinite(e.q_m_sq)) throw InfiniteMomentError("env_moments: infinite second moment");
  e.c = e.m2 / e.m - 1.0;
  return e;
}

double mean_entropy(const EnvironmentModel& model) {
  if (model.is_coupled()) return tilted_entropy(model.eta_law(), model.beta());
  const double m = env_moments(model).m;
  double s = 0.0;
  for (const auto& c : model.components()) {
    const double r = c.law.mean() / m;
    if (c.weight > 0.0 && r > 0.0) s += c.weight * r * std::log(r);
  }
  return s;
}

bool nondegenerate(const EnvironmentModel& model) {
  if (model.is_coupled()) return model.beta() != 0.0 && !model.eta_law().degenerate();
  const double m = env_moments(model).m;
  return std::any_of(model.components().begin(), model.components().end(), [&](const MixtureComponent& c) {
    return c.weight > 0.0 && std::abs(c.law.mean() - m) > 1e-12 * m;
  });
}

EnvironmentField::EnvironmentField(EnvironmentModel model, std::uint64_t seed) : model_(std::move(model)), seed_(seed) {
  if (model_.is_coupled()) {
    eta_.emplace(model_.eta_law(), seed_);
  } else {
    double acc = 0.0;
    for (const auto& c : model_.components()) cumulative_.push_back(acc += c.weight);
  }
}

std::size_t EnvironmentField::component_at(std::int64_t t, std::span<const int> x) const {
  const auto& comps = model_.components();
  if (comps.empty()) throw PreconditionError("component_at: model has no discrete components");
  if (eta_) {
    const double v = eta_->at(t, x);
    const auto vals = model_.eta_law().values();
    for (std::size_t i = 0; i < vals.size(); ++i)
      if (vals[i] == v && comps[i].weight > 0.0) return i;
    return 0;
  }
  const double u = to_unit(hash_cell(seed_, kComponentStream, t, x));
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto i = static_cast<std::size_t>(it - cumulative_.begin());
  if (i >= comps.size()) i = comps.size() - 1;
  // zero-weight components are never selected
  while (comps[i].weight == 0.0 && i > 0) --i;
  return i;
}

OffspringLaw EnvironmentField::law_at(std::int64_t t, std::span<const int> x) const {
  if (eta_) return OffspringLaw::poisson(std::exp(model_.beta() * eta_->at(t, x)));
  return model_.components()[component_at(t, x)].law;
}

double EnvironmentField::mean_at(std::int64_t t, std::span<const int> x) const {
  if (eta_) return std::exp(model_.beta() * eta_->at(t, x));
  return model_.components()[component_at(t, x)].law.mean();
}

std::uint64_t EnvironmentField::sample_children(std::int64_t t, std::span<const int> x, std::uint64_t n,
                                                RandomStream& rng) const {
  if (n == 0) return 0;
  if (eta_) return sample_offspring_sum(OffspringLaw::poisson(std::exp(model_.beta() * eta_->at(t, x))), n, rng);
  return sample_offspring_sum(model_.components()[component_at(t, x)].law, n, rng);
}

EnvironmentField couple_from_eta(const EtaField& eta, double beta) {
  return EnvironmentField(EnvironmentModel::coupled(eta.law(), beta), eta.seed());
}

std::vector<std::string> PhaseReport::labels() const {
  std::vector<std::string> out;
  if (!supercritical) out.emplace_back("subcritical-or-critical mean");
  if (l2 == L2Status::holds) out.emplace_back("L2-regime");
  if (l2 == L2Status::inconclusive) out.emplace_back("inconclusive");
  if (strong_a1) out.emplace_back("strong disorder (a1)");
  if (strong_a2) out.emplace_back("strong disorder (a2)");
  if (strong_a3) out.emplace_back("strong disorder (a3)");
  return out;
}

std::string to_string(L2Status s) {
  switch (s) {
    case L2Status::holds: return "holds";
    case L2Status::fails: return "fails";
    case L2Status::inconclusive: return "inconclusive";
    case L2Status::not_applicable: return "not-applicable";
  }
  return "unknown";
}

PhaseReport classify_phase(const EnvironmentModel& model, int d) {
  if (d < 1) throw PreconditionError("classify_phase: d must be >= 1");
  PhaseReport r;
  r.dimension = d;
  r.moments = env_moments(model);
  r.pi = d >= 3 ? return_probability_interval(d).interval() : Interval{1.0, 1.0};
  r.supercritical = r.moments.m > 1.0;
  r.nondegenerate = nondegenerate(model);
  r.entropy = mean_entropy(model);
  if (r.supercritical) {
    if (d <= 2) {
      r.l2 = L2Status::fails;  // alpha >= 1 = 1/pi_d
    } else if (r.moments.alpha < 1.0 / r.pi.upper) {
      r.l2 = L2Status::holds;
    } else if (r.moments.alpha >= 1.0 / r.pi.lower) {
      r.l2 = L2Status::fails;
    } else {
      r.l2 = L2Status::inconclusive;
    }
  }
  r.strong_a1 = d == 1 && r.nondegenerate;
  r.strong_a2 = d == 2 && r.nondegenerate;
  r.strong_a3 = d >= 3 && r.entropy > std::log(2.0 * d);
  return r;
}

}  // namespace brwre
