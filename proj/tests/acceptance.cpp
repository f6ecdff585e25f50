// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "brwre/cli/commands.hpp"
#include "brwre/dpre.hpp"
#include "brwre/errors.hpp"
#include "brwre/experiments.hpp"
#include "brwre/lattice_walk.hpp"
#include "brwre/moments.hpp"
#include "brwre/oracle.hpp"
#include "brwre/simulate.hpp"

using namespace brwre;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

EnvironmentModel mix(std::vector<MixtureComponent> c) { return EnvironmentModel::mixture(std::move(c)); }
OffspringLaw fin(std::vector<double> p) { return OffspringLaw::finite(std::move(p)); }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1 -----------------------------------------------------------------------
Outcome oracle_equivalence() {
  const std::vector<EnvironmentModel> models{
      mix({{OffspringLaw::poisson(2.0), 0.5}, {OffspringLaw::poisson(4.0), 0.5}}),
      mix({{fin({0.0, 0.3, 0.7}), 0.4}, {fin({0.5, 0.0, 0.0, 0.5}), 0.6}}),
      EnvironmentModel::single(OffspringLaw::point_mass(2)),
      mix({{fin({0.5, 0.0, 0.5}), 0.5}, {fin({0.1, 0.0, 0.9}), 0.5}}),
  };
  double worst = 0.0;
  for (const auto& model : models) {
    const auto mom = env_moments(model);
    for (int T = 1; T <= 2; ++T) {
      const auto table = brute_force_oracle(model, T);
      const auto pt = t_step_distribution(1, T);
      const auto pf = annealed_pair_field(mom, 1, T);
      const double m2T = std::pow(mom.m, 2 * T);
      for (int x = -T; x <= T; ++x) {
        worst = std::max(worst, rel_err(table.mean_at(x), std::pow(mom.m, T) * pt.at({x})));
        for (int y = -T; y <= T; ++y) {
          const int a[1]{x}, b[1]{y};
          worst = std::max(worst, rel_err(table.pair_at(x, y), m2T * pf.normalized(a, b)));
        }
      }
      worst = std::max(worst, rel_err(table.normalized_second_moment(), normalized_second_moment(mom, 1, T)));
      worst = std::max(worst, rel_err(table.normalized_overlap_sum(), overlap_bound_series(mom, 1, T)));
    }
  }
  return {worst <= 1e-10, fmt("%zu models, T in {1,2}, max relative error %.2e", models.size(), worst)};
}

// 2 -----------------------------------------------------------------------
Outcome martingale_checks() {
  double branching = 0.0;
  for (const auto& model : {mix({{fin({0.5, 0.0, 0.5}), 0.5}, {fin({0.1, 0.0, 0.9}), 0.5}}),
                            mix({{fin({0.0, 0.3, 0.7}), 0.4}, {fin({0.5, 0.0, 0.0, 0.5}), 0.6}})}) {
    const auto table = brute_force_oracle(model, 3);
    for (double r : table.martingale_residual) branching = std::max(branching, r);
  }
  double zbar = 0.0;
  for (int T = 1; T <= 3; ++T) {
    const auto e = zbar_enumeration(EtaLaw::finite({-1.0, 1.0}, {0.5, 0.5}), 0.7, T);
    zbar = std::max({zbar, e.max_residual, std::abs(e.mean - 1.0)});
  }
  const auto mc = zbar_mean_one(EtaLaw::gaussian(1.0), 0.5, 1, 10, 10'000, 2024, workers());
  const bool ok = branching <= 1e-12 && zbar <= 1e-12 && std::abs(mc.z_score) <= 4.0;
  return {ok, fmt("branching residual %.2e, Zbar residual %.2e, MC mean %.5f (z = %.2f)", branching, zbar,
                  mc.estimate.mean, mc.z_score)};
}

// 3 -----------------------------------------------------------------------
Outcome coupling_identity() {
  double worst = 0.0;
  for (const auto& law : {EtaLaw::gaussian(1.0), EtaLaw::finite({-1.0, 1.0}, {0.5, 0.5})})
    for (int d = 1; d <= 3; ++d)
      for (int T = 1; T <= 8; ++T) {
        const auto r = coupling_identity_check(EtaField(law, 31 * static_cast<std::uint64_t>(d) + 7), 0.8, T, d);
        worst = std::max({worst, r.log_total, r.endpoint});
      }
  return {worst <= 1e-10, fmt("d in 1..3, T <= 8, gaussian and +-1 eta: max log residual %.2e", worst)};
}

// 4 -----------------------------------------------------------------------
Outcome return_probability_check() {
  const auto series = return_probability(3, 10'000, ReturnProbMethod::series);
  MonteCarloWalkOptions o;
  o.walks = 1'000'000;
  o.seed = 99;
  const auto mc = return_probability(3, 10'000, ReturnProbMethod::monte_carlo, o);
  const bool exact12 = return_probability(1, 100, ReturnProbMethod::series).interval().lower == 1.0 &&
                       return_probability(2, 100, ReturnProbMethod::series).interval().upper == 1.0 &&
                       return_probability(1, 100, ReturnProbMethod::series).point == 1.0 &&
                       return_probability(2, 100, ReturnProbMethod::series).point == 1.0;
  const bool overlap = mc.lower <= series.upper && series.lower <= mc.upper;
  const bool ok = series.upper - series.lower <= 2e-3 && overlap && exact12;
  return {ok, fmt("series [%.6f, %.6f] width %.1e; MC %.6f, interval with horizon allowance [%.6f, %.6f]; pi_1 = pi_2 = 1: %s",
                  series.lower, series.upper, series.upper - series.lower, mc.point, mc.lower, mc.upper,
                  exact12 ? "yes" : "no")};
}

// 5 -----------------------------------------------------------------------
Outcome second_moment_criterion() {
  const auto l2 = env_moments(mix({{OffspringLaw::poisson(2.0), 0.5}, {OffspringLaw::poisson(4.0), 0.5}}));
  const auto v = normalized_second_moments(l2, 3, 200);
  bool monotone = true, enveloped = true;
  for (int T = 1; T <= 200; ++T) {
    monotone = monotone && v[static_cast<std::size_t>(T)] >= v[static_cast<std::size_t>(T - 1)] - 1e-14;
    enveloped = enveloped && v[static_cast<std::size_t>(T)] <= normalized_second_moment_envelope(l2, 3, T) * (1 + 1e-12);
  }
  const auto wild = env_moments(mix({{OffspringLaw::poisson(10.0), 0.2}, {OffspringLaw::point_mass(0), 0.8}}));
  const double inv_pi = 1.0 / return_probability_interval(3).lower;
  const auto w = normalized_second_moments(wild, 3, 200);
  bool wild_monotone = true;
  for (std::size_t T = 1; T < w.size(); ++T) wild_monotone = wild_monotone && w[T] >= w[T - 1];
  const double bound = 1e6;
  int crossing = -1;
  for (std::size_t T = 0; T < w.size() && crossing < 0; ++T)
    if (w[T] > bound) crossing = static_cast<int>(T);
  const bool ok = monotone && enveloped && wild_monotone && wild.alpha > inv_pi && crossing > 0;
  return {ok, fmt("L2 model: monotone %s, under envelope %s (T=200: %.4f <= %.4f); alpha = %.2f > 1/pi_3 = %.3f model "
                  "passes %.0e at T = %d (T=200: %.3e)",
                  monotone ? "yes" : "no", enveloped ? "yes" : "no", v[200],
                  normalized_second_moment_envelope(l2, 3, 200), wild.alpha, inv_pi, bound, crossing, w[200])};
}

// 6 -----------------------------------------------------------------------
Outcome clt_convergence() {
  const auto model = mix({{fin({0.0, 0.96, 0.04}), 0.5}, {OffspringLaw::point_mass(1), 0.5}});
  const auto f = TestFunction::cosine({1.0, 0.0, 0.0});
  ExperimentOptions opt;
  opt.workers = workers();
  const auto table = clt_l2_experiment(model, 3, f, {25, 100, 400}, 200, 606, opt);
  bool ok = !table.exploratory;
  std::ostringstream os;
  double prev = INFINITY;
  for (const auto& r : table.rows) {
    ok = ok && std::isfinite(r.target) && r.target < prev && std::abs(r.standardized_error) <= 4.0 && r.used == 200;
    prev = r.target;
    os << fmt("T=%d exact %.5f MC %.5f +- %.5f (z %.2f); ", r.T, r.target, r.mean, r.std_error, r.standardized_error);
  }
  return {ok, os.str() + "model " + model.describe()};
}

// 7 -----------------------------------------------------------------------
Outcome overlap_scaling() {
  const auto model = EnvironmentModel::single(OffspringLaw::point_mass(2));
  ExperimentOptions opt;
  opt.workers = workers();
  const auto rows = overlap_scaling_experiment(model, 3, {16, 64, 256}, 100, 707, opt);
  double emin = INFINITY, emax = 0.0, qmin = INFINITY, qmax = 0.0;
  bool quantiles = true;
  std::ostringstream os;
  for (const auto& r : rows) {
    emin = std::min(emin, r.exact);
    emax = std::max(emax, r.exact);
    if (r.survivors == 0 || !std::isfinite(r.q90)) {
      quantiles = false;
    } else {
      qmin = std::min(qmin, r.q90);
      qmax = std::max(qmax, r.q90);
    }
    os << fmt("T=%d exact %.4f survivors %zu overflowed %zu q90 %.4f; ", r.T, r.exact, r.survivors, r.overflowed, r.q90);
  }
  const bool exact_ok = emax / emin < 2.0;
  const bool mc_ok = quantiles && qmax / qmin < 3.0;
  return {exact_ok && mc_ok, os.str() + fmt("exact ratio %.3f (%s), quantile ratio %s", emax / emin,
                                            exact_ok ? "ok" : "too large",
                                            mc_ok ? fmt("%.3f", qmax / qmin).c_str() : "unavailable")};
}

// 8 -----------------------------------------------------------------------
Outcome strong_disorder() {
  SlopeOptions o;
  o.workers = workers();
  const auto a = strong_disorder_slope(EnvironmentModel::coupled(EtaLaw::gaussian(1.0), 1.0), 1, 400, 200, 808, o);
  const auto b = strong_disorder_slope(mix({{OffspringLaw::point_mass(1), 0.5}, {OffspringLaw::point_mass(3), 0.5}}),
                                       1, 400, 200, 809, o);
  const bool ok = a.ci.upper < 0.0 && b.ci.upper < 0.0 && a.used == 200 && b.used == 200;
  return {ok, fmt("gaussian beta=1: slope %.5f, 99%% CI [%.5f, %.5f]; 1/2 delta(1) + 1/2 delta(3): slope %.5f, 99%% CI "
                  "[%.5f, %.5f]",
                  a.slope, a.ci.lower, a.ci.upper, b.slope, b.ci.lower, b.ci.upper)};
}

// 9 -----------------------------------------------------------------------
Outcome extinction_bounds() {
  const std::vector<EnvironmentModel> models{
      mix({{fin({0.3, 0.0, 0.0, 0.7}), 0.5}, {fin({0.5, 0.0, 0.5}), 0.5}}),
      mix({{OffspringLaw::poisson(0.5), 0.5}, {OffspringLaw::poisson(3.0), 0.5}}),
  };
  ExtinctionOptions o;
  o.horizon = 50;
  o.replicas = 2000;
  o.seed = 909;
  o.workers = workers();
  bool ok = true;
  std::ostringstream os;
  for (const auto& model : models) {
    const auto r = extinction_estimate(model, 1, o);
    const bool lower = r.e_gw <= r.e_hat_ci.upper;
    const bool upper = r.e_hat_ci.lower <= r.e_sw_ci.upper;
    ok = ok && lower && upper && r.gw_residual <= 1e-12;
    os << fmt("[%s] e_GW %.6f (residual %.1e) <= e_hat %.4f CI [%.4f, %.4f] <= e_SW %.4f CI [%.4f, %.4f]%s; ",
              model.describe().c_str(), r.e_gw, r.gw_residual, r.e_hat, r.e_hat_ci.lower, r.e_hat_ci.upper, r.e_sw,
              r.e_sw_ci.lower, r.e_sw_ci.upper, r.sw_lower_bound_only ? " (SW still moving)" : "");
  }
  return {ok, os.str()};
}

// 10 ----------------------------------------------------------------------
std::map<std::string, std::string> run_once(const fs::path& root, const std::string& command,
                                            const std::string& config, unsigned w, int& code) {
  fs::remove_all(root);
  fs::create_directories(root / "out");
  const auto cfg = root / "config.ini";
  std::ofstream(cfg) << config;
  cli::Invocation inv;
  inv.command = command;
  inv.config_path = cfg.string();
  inv.out_dir = (root / "out").string();
  inv.workers = w;
  code = cli::run(inv);
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(root / "out")) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  fs::remove_all(root);
  return files;
}

Outcome determinism() {
  const std::string branching =
      "[model]\ndimension = 2\noffspring = 0.5*poisson(1.5);0.5*finite(0:0.2,2:0.3,3:0.5)\n"
      "[run]\nseed = 1234\nhorizons = 6, 12\nreplicas = 8\n"
      "[clt]\nfunction = cosine(1,0.5)\nepsilons = 0.05, 0.2\n[extinction]\nhorizon = 20\nsw_samples = 2000\n";
  const std::string polymer =
      "[model]\ndimension = 1\neta = finite(-1:0.5,1:0.5)\nbeta = 0.6\n"
      "[run]\nseed = 77\nhorizons = 10, 40\nreplicas = 6\n[clt]\nfunction = gaussian_bump(1)\n"
      "[extinction]\nhorizon = 20\nsw_samples = 2000\n";
  const fs::path base = fs::temp_directory_path() / "brwre_acceptance_determinism";
  std::size_t files = 0;
  std::vector<std::string> broken;
  for (const auto* config : {&branching, &polymer})
    for (const char* command : {"simulate", "moments", "phase", "clt", "overlap", "dpre", "extinction"}) {
      int c1 = -1, c2 = -1, c3 = -1;
      const auto a = run_once(base / "a", command, *config, 1, c1);
      const auto b = run_once(base / "b", command, *config, 1, c2);
      const auto c = run_once(base / "c", command, *config, 3, c3);
      files += a.size();
      if (c1 != 0 || c2 != 0 || c3 != 0 || a.empty() || a != b || a != c)
        broken.push_back(std::string(command) + fmt("(exit %d)", c1));
    }
  std::string detail = fmt("7 commands x 2 configs, %zu files compared across 2 reruns and a 3-worker run", files);
  for (const auto& s : broken) detail += "; mismatch " + s;
  return {broken.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, oracle_equivalence}, {2, martingale_checks},      {3, coupling_identity}, {4, return_probability_check},
      {5, second_moment_criterion}, {6, clt_convergence}, {7, overlap_scaling},   {8, strong_disorder},
      {9, extinction_bounds},  {10, determinism},
  };
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
