#include "brwre/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "brwre/errors.hpp"
#include "brwre/moments.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/simulate.hpp"

namespace brwre {

namespace {

constexpr std::uint64_t kEnvTag = 1;
constexpr std::uint64_t kBranchTag = 2;

std::vector<int> checked_ladder(std::vector<int> horizons) {
  if (horizons.empty()) throw PreconditionError("experiment: empty horizon ladder");
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  if (horizons.front() < 1) throw PreconditionError("experiment: horizons must be >= 1");
  return horizons;
}

// Observation at one ladder time: value, or nothing once the run overflowed.
struct Observed {
  std::optional<double> value;
  bool extinct = false;
};

// Runs replica r once up to the last horizon, calling observe(pop, k) at each
// ladder time k the population reaches alive. Later ladder times after
// extinction keep `extinct_value`.
template <class Fn>
std::vector<Observed> observe_replica(const EnvironmentModel& model, int d, const std::vector<int>& ladder,
                                      std::uint64_t seed, std::size_t r, double extinct_value, Fn&& observe) {
  const EnvironmentField env(model, derive_seed(seed, {r, kEnvTag}));
  std::vector<Observed> out(ladder.size());
  std::size_t next = 0;
  TrajectoryOptions opt;
  opt.observer = [&](const PopulationField& pop) {
    while (next < ladder.size() && ladder[next] < static_cast<int>(pop.time())) ++next;
    if (next < ladder.size() && ladder[next] == static_cast<int>(pop.time())) {
      out[next].value = observe(pop, next);
      ++next;
    }
  };
  const auto traj = run_trajectory(env, d, ladder.back(), derive_seed(seed, {r, kBranchTag}), opt);
  if (traj.stop == StopReason::extinct) {
    const int died = traj.records.back().t;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      if (ladder[k] >= died) {
        out[k].value = extinct_value;
        out[k].extinct = true;
      }
    }
  }
  return out;
}

}  // namespace

ConvergenceTable clt_l2_experiment(const EnvironmentModel& model, int d, const TestFunction& f,
                                   const std::vector<int>& horizons, std::size_t replicas, std::uint64_t seed,
                                   const ExperimentOptions& options) {
  if (replicas < 2) throw PreconditionError("clt_l2_experiment: need at least 2 replicas");
  const auto ladder = checked_ladder(horizons);
  const EnvMoments mom = env_moments(model);
  const double k = integral_fg1(f, d);
  const RealFunction fr = [&](std::span<const double> u) { return f(u); };
  const RealFunction one = [](std::span<const double>) { return 1.0; };

  std::vector<std::vector<Observed>> obs(replicas);
  parallel_for(replicas, options.workers, [&](std::size_t r) {
    obs[r] = observe_replica(model, d, ladder, seed, r, 0.0, [&](const PopulationField& pop, std::size_t i) {
      const int T = ladder[i];
      const double dt = clt_statistic(pop, fr, mom.m, T) - clt_statistic(pop, one, mom.m, T) * k;
      return dt * dt;
    });
  });

  ConvergenceTable table;
  table.function = f.describe();
  table.exploratory = classify_phase(model, d).l2 != L2Status::holds;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    ConvergenceRow row;
    row.T = ladder[i];
    row.replicas = replicas;
    std::vector<double> xs;
    for (std::size_t r = 0; r < replicas; ++r) {
      if (obs[r][i].value) {
        xs.push_back(*obs[r][i].value);
        if (obs[r][i].extinct) ++row.extinct;
      } else {
        ++row.overflowed;
      }
    }
    row.used = xs.size();
    if (xs.size() >= 2) {
      const auto est = mean_estimate(xs);
      row.mean = est.mean;
      row.variance = est.variance;
      row.std_error = est.std_error;
    } else {
      row.mean = row.variance = row.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      row.target = exact_clt_error(mom, d, row.T, f, options.budget);
    } catch (const ResourceLimitError&) {
      row.target = std::numeric_limits<double>::quiet_NaN();
    }
    row.standardized_error =
        row.std_error > 0.0 ? (row.mean - row.target) / row.std_error : (row.mean == row.target ? 0.0 : INFINITY);
    table.rows.push_back(row);
  }
  return table;
}

ConditionalCltResult conditional_clt_experiment(const EnvironmentModel& model, int d, const TestFunction& f, int T,
                                                std::size_t replicas, const std::vector<double>& epsilons,
                                                std::uint64_t seed, double confidence,
                                                const ExperimentOptions& options) {
  if (replicas < 1) throw PreconditionError("conditional_clt_experiment: need at least 1 replica");
  const std::vector<int> ladder{T};
  const double k = integral_fg1(f, d);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<Observed> obs(replicas);
  parallel_for(replicas, options.workers, [&](std::size_t r) {
    obs[r] = observe_replica(model, d, ladder, seed, r, nan, [&](const PopulationField& pop, std::size_t) {
      const double n = static_cast<double>(pop.total());
      const double scale = 1.0 / std::sqrt(static_cast<double>(T));
      std::vector<double> u(static_cast<std::size_t>(d));
      long double s = 0.0L;
      for (const auto& cell : pop.cells()) {
        const Site x = decode_site(cell.key, d);
        for (int j = 0; j < d; ++j) u[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] * scale;
        s += static_cast<long double>(cell.count) / n * f(u);
      }
      return std::abs(static_cast<double>(s) - k);
    })[0];
  });

  ConditionalCltResult out;
  out.T = T;
  out.replicas = replicas;
  std::vector<double> dev;
  for (const auto& o : obs) {
    if (!o.value)
      ++out.overflowed;
    else if (!o.extinct)
      dev.push_back(*o.value);
  }
  out.survivors = dev.size();
  const std::size_t counted = replicas - out.overflowed;
  if (counted > 0) {
    out.survival = static_cast<double>(out.survivors) / static_cast<double>(counted);
    out.survival_ci = clopper_pearson(out.survivors, counted, confidence);
  }
  for (double eps : epsilons) {
    ExceedanceRow row;
    row.epsilon = eps;
    row.exceed = static_cast<std::size_t>(std::count_if(dev.begin(), dev.end(), [&](double v) { return v >= eps; }));
    if (!dev.empty()) {
      row.rate = static_cast<double>(row.exceed) / static_cast<double>(dev.size());
      row.ci = clopper_pearson(row.exceed, dev.size(), confidence);
    } else {
      row.rate = nan;
      row.ci = {nan, nan};
    }
    out.rows.push_back(row);
  }
  return out;
}

std::vector<OverlapRow> overlap_quantile_rows(int d, const std::vector<int>& horizons,
                                              const std::vector<std::vector<double>>& overlaps) {
  if (horizons.size() != overlaps.size()) throw PreconditionError("overlap_quantile_rows: size mismatch");
  std::vector<OverlapRow> rows;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    OverlapRow row;
    row.T = horizons[i];
    row.survivors = overlaps[i].size();
    const double scale = std::pow(static_cast<double>(row.T), d / 2.0);
    std::vector<double> v;
    v.reserve(overlaps[i].size());
    for (double r : overlaps[i]) v.push_back(scale * r);
    if (v.empty()) {
      row.q50 = row.q90 = row.q99 = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.q50 = empirical_quantile(v, 0.5);
      row.q90 = empirical_quantile(v, 0.9);
      row.q99 = empirical_quantile(v, 0.99);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<OverlapRow> overlap_scaling_experiment(const EnvironmentModel& model, int d,
                                                   const std::vector<int>& horizons, std::size_t replicas,
                                                   std::uint64_t seed, const ExperimentOptions& options) {
  const auto ladder = checked_ladder(horizons);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<Observed>> obs(replicas);
  parallel_for(replicas, options.workers, [&](std::size_t r) {
    obs[r] = observe_replica(model, d, ladder, seed, r, nan,
                             [](const PopulationField& pop, std::size_t) { return density_stats(pop).overlap; });
  });
  std::vector<std::vector<double>> survivors(ladder.size());
  std::vector<std::size_t> overflowed(ladder.size(), 0);
  for (const auto& o : obs) {
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      if (!o[i].value)
        ++overflowed[i];
      else if (!o[i].extinct)
        survivors[i].push_back(*o[i].value);
    }
  }
  auto rows = overlap_quantile_rows(d, ladder, survivors);
  const auto exact = overlap_bound_series_all(env_moments(model), d, ladder.back());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].overflowed = overflowed[i];
    rows[i].exact = std::pow(static_cast<double>(rows[i].T), d / 2.0) * exact[static_cast<std::size_t>(rows[i].T)];
  }
  return rows;
}

}  // namespace brwre
