#include "brwre/simulate.hpp"

#include <cmath>
#include <limits>

#include "brwre/errors.hpp"

namespace brwre {

PopulationField evolve_step(const PopulationField& pop, const EnvironmentField& env, RandomStream& rng) {
  const int d = pop.dimension();
  const int t = pop.time();
  const int directions = 2 * d;
  std::vector<std::uint64_t> steps;
  for (int i = 0; i < d; ++i) steps.push_back(axis_key_step(d, i));

  std::vector<PopulationCell> out;
  out.reserve(pop.cells().size() * static_cast<std::size_t>(directions));
  for (const auto& cell : pop.cells()) {
    const Site x = decode_site(cell.key, d);
    std::uint64_t left = cell.count;
    for (int j = 0; j < directions && left > 0; ++j) {
      const std::uint64_t nj = j + 1 == directions ? left : rng.binomial(left, 1.0 / (directions - j));
      left -= nj;
      if (nj == 0) continue;
      const std::uint64_t children = env.sample_children(t, x, nj, rng);
      if (children == 0) continue;
      const std::uint64_t step = steps[static_cast<std::size_t>(j / 2)];
      out.push_back({(j % 2 == 0) ? cell.key - step : cell.key + step, children});
    }
  }
  return PopulationField(d, t + 1, std::move(out));
}

DensityStats density_stats(const PopulationField& pop) {
  if (pop.extinct()) throw PreconditionError("density_stats: empty population");
  const auto n = static_cast<long double>(pop.total());
  DensityStats s;
  std::uint64_t best = 0, best_key = 0;
  long double sq = 0.0L;
  for (const auto& c : pop.cells()) {
    if (c.count > best) {
      best = c.count;
      best_key = c.key;
    }
    const long double r = static_cast<long double>(c.count) / n;
    sq += r * r;
  }
  s.rho_star = static_cast<double>(static_cast<long double>(best) / n);
  s.overlap = static_cast<double>(sq);
  s.argmax = decode_site(best_key, pop.dimension());
  return s;
}

double clt_statistic(const PopulationField& pop, const RealFunction& f, double m, int t) {
  if (t < 1) throw PreconditionError("clt_statistic: t must be >= 1");
  if (!(m > 0.0)) throw PreconditionError("clt_statistic: m must be > 0");
  const int d = pop.dimension();
  const double scale = 1.0 / std::sqrt(static_cast<double>(t));
  std::vector<double> u(static_cast<std::size_t>(d));
  long double sum = 0.0L;
  for (const auto& c : pop.cells()) {
    const Site x = decode_site(c.key, d);
    for (int i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] * scale;
    sum += static_cast<long double>(c.count) * static_cast<long double>(f(u));
  }
  if (sum == 0.0L) return 0.0;
  const double mag = std::exp(static_cast<double>(std::log(std::fabs(sum))) - t * std::log(m));
  return sum < 0 ? -mag : mag;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::horizon: return "horizon";
    case StopReason::extinct: return "extinct";
    case StopReason::overflow: return "overflow";
  }
  return "unknown";
}

namespace {
TrajectoryRecord record_of(const PopulationField& pop, double log_m) {
  TrajectoryRecord r;
  r.t = pop.time();
  r.total = pop.total();
  r.alive = !pop.extinct();
  if (r.alive) {
    r.ln_nbar = std::log(static_cast<double>(r.total)) - r.t * log_m;
    const auto s = density_stats(pop);
    r.rho_star = s.rho_star;
    r.overlap = s.overlap;
  } else {
    r.ln_nbar = -std::numeric_limits<double>::infinity();
  }
  return r;
}
}  // namespace

TrajectoryStats run_trajectory(const EnvironmentField& env, int d, int T, std::uint64_t seed,
                               const TrajectoryOptions& options) {
  if (T < 1) throw PreconditionError("run_trajectory: T must be >= 1");
  const double log_m = std::log(env_moments(env.model()).m);
  RandomStream rng(derive_seed(seed, {0x62726e63}));
  TrajectoryStats stats;
  PopulationField pop(d);
  stats.records.push_back(record_of(pop, log_m));
  if (options.observer) options.observer(pop);
  for (int t = 1; t <= T; ++t) {
    try {
      pop = evolve_step(pop, env, rng);
    } catch (const PopulationOverflowError& e) {
      stats.stop = StopReason::overflow;
      stats.overflow_message = e.what();
      return stats;
    }
    stats.records.push_back(record_of(pop, log_m));
    if (pop.extinct()) {
      stats.stop = StopReason::extinct;
      return stats;
    }
    if (options.observer) options.observer(pop);
  }
  return stats;
}

}  // namespace brwre
