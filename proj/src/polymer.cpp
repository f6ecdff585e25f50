#include "brwre/dpre.hpp"

#include <cmath>
#include <limits>

#include "brwre/errors.hpp"
#include "brwre/lattice_walk.hpp"
#include "brwre/moments.hpp"
#include "brwre/rng.hpp"
#include "brwre/simulate.hpp"

namespace brwre {

namespace {

constexpr std::uint64_t kSlopeEnvTag = 0x736c6f70;
constexpr std::uint64_t kSlopeBranchTag = 0x62726e63;
constexpr std::uint64_t kZbarTag = 0x7a626172;

double normalize(std::span<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericOverflowError("polymer_dp: degenerate weight field");
  for (double& x : v) x /= total;
  return total;
}

}  // namespace

PolymerResult polymer_dp(const EtaFunction& eta, double lambda, double beta, int T, int d, const DpBudget& budget) {
  if (T < 1) throw PreconditionError("polymer_dp: T must be >= 1");
  const LatticeBox box = LatticeBox::checked(d, T, budget);
  const Kernel kernel = simple_random_walk_kernel(d);
  std::vector<double> w(box.size(), 0.0), next(box.size(), 0.0);
  const Site origin(static_cast<std::size_t>(d), 0);
  w[box.index(origin)] = 1.0;
  double log_z = beta * eta(0, origin);
  for (int t = 0; t < T; ++t) {
    push_forward(kernel, box, w, next, t);
    w.swap(next);
    if (t + 1 <= T - 1) {
      // Weights are kept relative; the exponent is shifted by its maximum.
      double top = -std::numeric_limits<double>::infinity();
      for_each_cell(box, t + 1, [&](std::size_t i, std::span<const int> y) {
        if (w[i] != 0.0) top = std::max(top, beta * eta(t + 1, y));
      });
      for_each_cell(box, t + 1, [&](std::size_t i, std::span<const int> y) {
        if (w[i] != 0.0) w[i] *= std::exp(beta * eta(t + 1, y) - top);
      });
      log_z += top;
    }
    log_z += std::log(normalize(w));
  }
  PolymerResult out;
  out.T = T;
  out.beta = beta;
  out.log_z = log_z;
  out.log_zbar = log_z - T * lambda;
  out.endpoint.box = box;
  out.endpoint.values = std::move(w);
  return out;
}

PolymerResult polymer_dp(const EtaField& eta, double beta, int T, int d, const DpBudget& budget) {
  return polymer_dp([&](int t, std::span<const int> x) { return eta.at(t, x); }, lambda_of_beta(eta.law(), beta),
                    beta, T, d, budget);
}

CouplingResiduals coupling_identity_check(const EtaField& eta, double beta, int T, int d, const DpBudget& budget) {
  const PolymerResult poly = polymer_dp(eta, beta, T, d, budget);
  const EnvironmentField env = couple_from_eta(eta, beta);
  const LatticeField qm = quenched_mean_field(env, T, d, budget);
  const double log_total = qm.log_total();
  const double log_total_b = log_quenched_total(env, T, d, budget);
  CouplingResiduals r;
  r.log_total = std::max(std::abs(log_total - poly.log_z), std::abs(log_total_b - poly.log_z));
  for_each_cell(poly.endpoint.box, T, [&](std::size_t i, std::span<const int> x) {
    const double mu = poly.endpoint.values[i];
    const double q = qm.at(x);
    if (mu == 0.0 && q == 0.0) return;
    if (mu == 0.0 || q == 0.0) {
      r.endpoint = std::numeric_limits<double>::infinity();
      return;
    }
    r.endpoint = std::max(r.endpoint, std::abs(std::log(mu) - (std::log(q) + qm.log_scale - log_total)));
  });
  return r;
}

ShiftResiduals eta_shift_check(const EtaField& eta, double beta, double h, int T, int d, const DpBudget& budget) {
  const double lambda = lambda_of_beta(eta.law(), beta);
  const auto base = polymer_dp(eta, beta, T, d, budget);
  const auto shifted =
      polymer_dp([&](int t, std::span<const int> x) { return eta.at(t, x) + h; }, lambda, beta, T, d, budget);
  ShiftResiduals r;
  r.log_z = std::abs(shifted.log_z - base.log_z - beta * h * T);
  for (std::size_t i = 0; i < base.endpoint.values.size(); ++i)
    r.endpoint = std::max(r.endpoint, std::abs(base.endpoint.values[i] - shifted.endpoint.values[i]));
  return r;
}

std::string to_string(Decision d) {
  switch (d) {
    case Decision::holds: return "holds";
    case Decision::fails: return "fails";
    case Decision::inconclusive: return "inconclusive";
  }
  return "?";
}

DpreCriterion dpre_clt_criterion(const EtaLaw& law, double beta, int d) {
  if (d < 1) throw PreconditionError("dpre_clt_criterion: d must be >= 1");
  DpreCriterion c;
  c.gap = std::max(0.0, lambda_of_beta(law, 2.0 * beta) - 2.0 * lambda_of_beta(law, beta));
  const Interval pi = return_probability_interval(d).interval();
  c.bound = {-std::log(pi.upper), -std::log(pi.lower)};
  if (c.gap < c.bound.lower)
    c.decision = Decision::holds;
  else if (c.gap >= c.bound.upper)
    c.decision = Decision::fails;
  else
    c.decision = Decision::inconclusive;
  return c;
}

std::string to_string(SlopeRoute r) { return r == SlopeRoute::polymer ? "polymer" : "branching"; }

SlopeEstimate strong_disorder_slope(const EnvironmentModel& model, int d, int T, std::size_t replicas,
                                    std::uint64_t seed, const SlopeOptions& options) {
  if (T < 4) throw PreconditionError("strong_disorder_slope: T must be >= 4");
  if (replicas < 2) throw PreconditionError("strong_disorder_slope: need at least 2 replicas");
  const double log_m = std::log(env_moments(model).m);
  const PhaseReport phase = classify_phase(model, d);
  const int t0 = T / 2;

  enum class Outcome { ok, extinct, overflow };
  std::vector<double> slopes(replicas, 0.0);
  std::vector<Outcome> outcome(replicas, Outcome::ok);
  parallel_for(replicas, options.workers, [&](std::size_t r) {
    const EnvironmentField env(model, derive_seed(seed, {r, kSlopeEnvTag}));
    std::vector<double> ts, ys;
    if (options.route == SlopeRoute::polymer) {
      const auto lt = log_quenched_totals(env, T, d, options.budget);
      for (int t = t0; t <= T; ++t) {
        ts.push_back(t);
        ys.push_back(lt[static_cast<std::size_t>(t)] - t * log_m);
      }
    } else {
      const auto traj = run_trajectory(env, d, T, derive_seed(seed, {r, kSlopeBranchTag}));
      if (traj.stop != StopReason::horizon) {
        outcome[r] = traj.stop == StopReason::extinct ? Outcome::extinct : Outcome::overflow;
        return;
      }
      for (int t = t0; t <= T; ++t) {
        ts.push_back(t);
        ys.push_back(traj.records[static_cast<std::size_t>(t)].ln_nbar);
      }
    }
    slopes[r] = least_squares(ts, ys).slope;
  });

  SlopeEstimate out;
  out.route = options.route;
  out.T = T;
  out.replicas = replicas;
  out.exploratory = !(phase.strong_a1 || phase.strong_a3);
  for (std::size_t r = 0; r < replicas; ++r) {
    if (outcome[r] == Outcome::extinct) ++out.extinct;
    if (outcome[r] == Outcome::overflow) ++out.overflowed;
    if (outcome[r] == Outcome::ok) out.per_replica.push_back(slopes[r]);
  }
  out.used = out.per_replica.size();
  if (out.used < 2) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.slope = nan;
    out.ci = {nan, nan};
    return out;
  }
  const MeanEstimate est = mean_estimate(out.per_replica);
  const double q = student_quantile(0.5 + 0.5 * options.confidence, static_cast<double>(est.n - 1));
  out.slope = est.mean;
  out.ci = {est.mean - q * est.std_error, est.mean + q * est.std_error};
  return out;
}

namespace {

// eta values indexed by time u and slot (x + u) / 2.
using EtaConfig = std::vector<std::vector<double>>;

double zbar_by_paths(const EtaConfig& eta, double beta, double lambda, int t) {
  long double s = 0.0L;
  const std::uint64_t paths = std::uint64_t{1} << t;
  for (std::uint64_t p = 0; p < paths; ++p) {
    int x = 0;
    double h = 0.0;
    for (int u = 0; u < t; ++u) {
      h += eta[static_cast<std::size_t>(u)][static_cast<std::size_t>((x + u) / 2)];
      x += ((p >> u) & 1) ? 1 : -1;
    }
    s += std::exp(beta * h - t * lambda);
  }
  return static_cast<double>(s / static_cast<long double>(paths));
}

// Calls fn(prob) for every assignment of eta on times [from, to), writing the
// values into `eta`.
template <class Fn>
void for_each_eta(const EtaLaw& law, EtaConfig& eta, int from, int to, double prob, std::uint64_t& atoms,
                  std::uint64_t budget, Fn&& fn) {
  // flatten the cells of the given times
  std::vector<std::pair<int, int>> cells;
  for (int u = from; u < to; ++u)
    for (int k = 0; k <= u; ++k) cells.emplace_back(u, k);
  const auto vals = law.values();
  const auto wts = law.weights();
  auto rec = [&](auto&& self, std::size_t i, double p) -> void {
    if (i == cells.size()) {
      if (++atoms > budget) throw ResourceLimitError("zbar_enumeration: atom budget exceeded");
      fn(p);
      return;
    }
    const auto [u, k] = cells[i];
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (wts[j] == 0.0) continue;
      eta[static_cast<std::size_t>(u)][static_cast<std::size_t>(k)] = vals[j];
      self(self, i + 1, p * wts[j]);
    }
  };
  rec(rec, 0, prob);
}

}  // namespace

ZbarEnumeration zbar_enumeration(const EtaLaw& law, double beta, int T, std::uint64_t atom_budget) {
  if (law.kind() != EtaLaw::Kind::finite) throw PreconditionError("zbar_enumeration: needs a finite eta law");
  if (T < 1 || T > 3) throw PreconditionError("zbar_enumeration: T must be in 1..3");
  const double lambda = lambda_of_beta(law, beta);
  EtaConfig eta(static_cast<std::size_t>(T));
  for (int u = 0; u < T; ++u) eta[static_cast<std::size_t>(u)].assign(static_cast<std::size_t>(u) + 1, 0.0);

  ZbarEnumeration out;
  for (int t = 0; t < T; ++t) {
    for_each_eta(law, eta, 0, t, 1.0, out.atoms, atom_budget, [&](double) {
      const double now = zbar_by_paths(eta, beta, lambda, t);
      long double cond = 0.0L;
      for_each_eta(law, eta, t, t + 1, 1.0, out.atoms, atom_budget,
                   [&](double p) { cond += p * zbar_by_paths(eta, beta, lambda, t + 1); });
      out.max_residual = std::max(out.max_residual, std::abs(static_cast<double>(cond) - now));
    });
  }
  long double mean = 0.0L, sq = 0.0L;
  for_each_eta(law, eta, 0, T, 1.0, out.atoms, atom_budget, [&](double p) {
    const long double z = zbar_by_paths(eta, beta, lambda, T);
    mean += p * z;
    sq += p * z * z;
  });
  out.mean = static_cast<double>(mean);
  out.second_moment = static_cast<double>(sq);
  return out;
}

double zbar_second_moment(const EtaLaw& law, double beta, int d, int T) {
  const double alpha = std::exp(lambda_of_beta(law, 2.0 * beta) - 2.0 * lambda_of_beta(law, beta));
  return collision_weight(d, T, alpha, false, CollisionOrigin::from_zero);
}

ZbarMeanCheck zbar_mean_one(const EtaLaw& law, double beta, int d, int T, std::size_t replicas, std::uint64_t seed,
                            unsigned workers) {
  if (replicas < 2) throw PreconditionError("zbar_mean_one: need at least 2 replicas");
  std::vector<double> z(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    const EtaField eta(law, derive_seed(seed, {r, kZbarTag}));
    z[r] = std::exp(polymer_dp(eta, beta, T, d).log_zbar);
  });
  ZbarMeanCheck out;
  out.estimate = mean_estimate(z);
  out.z_score = (out.estimate.mean - 1.0) / out.estimate.std_error;
  return out;
}

}  // namespace brwre
