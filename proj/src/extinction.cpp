#include <algorithm>
#include <cmath>

#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"
#include "brwre/simulate.hpp"

namespace brwre {

double galton_watson_extinction(const EnvironmentModel& model, double* residual) {
  auto g = [&](double s) { return model.averaged_pgf(s) - s; };
  auto finish = [&](double s) {
    if (residual) *residual = std::abs(g(s));
    return s;
  };
  if (model.averaged_pgf(0.0) == 0.0) return finish(0.0);
  if (env_moments(model).m <= 1.0) return finish(1.0);
  // g(0) > 0 and g < 0 just below 1 since f'(1) = m > 1.
  double hi = 0.5;
  for (int k = 1; k <= 60 && g(hi) >= 0.0; ++k) hi = 1.0 - std::ldexp(1.0, -k - 1);
  if (g(hi) >= 0.0) return finish(1.0);
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  // Both ends bracket the root to machine precision; report the one with
  // the smaller residual.
  return finish(std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi);
}

ExtinctionReport extinction_estimate(const EnvironmentModel& model, int d, const ExtinctionOptions& opt) {
  if (opt.replicas < 1) throw PreconditionError("extinction_estimate: replicas must be >= 1");
  if (opt.horizon < 1) throw PreconditionError("extinction_estimate: horizon must be >= 1");
  ExtinctionReport rep;
  rep.horizon = opt.horizon;
  rep.replicas = opt.replicas;

  std::vector<StopReason> outcome(opt.replicas);
  parallel_for(opt.replicas, opt.workers, [&](std::size_t r) {
    const EnvironmentField env(model, derive_seed(opt.seed, {r, 1}));
    outcome[r] = run_trajectory(env, d, opt.horizon, derive_seed(opt.seed, {r, 2})).stop;
  });
  for (auto s : outcome) {
    rep.extinct += s == StopReason::extinct;
    rep.overflowed += s == StopReason::overflow;
  }
  rep.e_hat = static_cast<double>(rep.extinct) / static_cast<double>(opt.replicas);
  rep.e_hat_ci = clopper_pearson(rep.extinct, opt.replicas, opt.confidence);

  rep.e_gw = galton_watson_extinction(model, &rep.gw_residual);

  // Smith-Wilkinson: one law per generation shared by all particles.
  // P(extinct by n | laws) = f_0(f_1(...f_{n-1}(0))).
  const int n = opt.sw_horizon > 0 ? opt.sw_horizon : opt.horizon;
  const int half = std::max(1, n / 2);
  std::vector<double> full(opt.sw_samples), partial(opt.sw_samples);
  parallel_for(opt.sw_samples, opt.workers, [&](std::size_t i) {
    RandomStream rng(derive_seed(opt.seed, {i, 3}));
    std::vector<OffspringLaw> laws;
    laws.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) laws.push_back(model.sample_law(rng));
    double s = 0.0;
    for (int k = n; k-- > 0;) s = laws[static_cast<std::size_t>(k)].pgf(s);
    full[i] = s;
    s = 0.0;
    for (int k = half; k-- > 0;) s = laws[static_cast<std::size_t>(k)].pgf(s);
    partial[i] = s;
  });
  const auto est = mean_estimate(full);
  const auto est_half = mean_estimate(partial);
  rep.e_sw = est.mean;
  const double z = normal_quantile(0.5 + opt.confidence / 2.0);
  rep.e_sw_ci = {std::max(0.0, est.mean - z * est.std_error), std::min(1.0, est.mean + z * est.std_error)};
  rep.sw_lower_bound_only = est.mean - est_half.mean > std::max(1e-4, est.std_error);
  return rep;
}

}  // namespace brwre
