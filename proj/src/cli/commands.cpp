#include "brwre/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "brwre/dpre.hpp"
#include "brwre/errors.hpp"
#include "brwre/experiments.hpp"
#include "brwre/format.hpp"
#include "brwre/lattice_walk.hpp"
#include "brwre/moments.hpp"
#include "brwre/oracle.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/simulate.hpp"

namespace brwre::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kEnvTag = 1;
constexpr std::uint64_t kBranchTag = 2;
constexpr std::uint64_t kEtaTag = 0x657461;

// Files are collected in memory and written at the end, each through a
// temporary name and a rename.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  void commit() const {
    fs::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      const fs::path target = fs::path(dir_) / name;
      const fs::path tmp = fs::path(dir_) / ("." + name + ".partial");
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
      }
      fs::rename(tmp, target);
    }
  }

 private:
  std::string dir_;
  std::map<std::string, std::string> files_;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_real(v);
}

// NaN and infinities become null.
ordered_json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json interval_json(const Interval& i) { return {{"lower", jnum(i.lower)}, {"upper", jnum(i.upper)}}; }

ordered_json header(const CommandContext& ctx, const std::string& command) {
  ordered_json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["seed"] = ctx.config.seed;
  // Worker count does not affect results, so it is not echoed.
  ExperimentConfig echo = ctx.config;
  echo.workers = 0;
  j["config"] = serialize_config(echo);
  j["model"] = ctx.config.model().describe();
  j["dimension"] = ctx.config.dimension;
  return j;
}

DpBudget budget_of(const ExperimentConfig& c) { return DpBudget{c.max_cells}; }

ordered_json moments_json(const EnvMoments& m) {
  return {{"m", m.m}, {"m2", m.m2}, {"q_m_sq", m.q_m_sq}, {"alpha", m.alpha}, {"c", m.c}};
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

void cmd_simulate(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const EnvironmentModel model = c.model();
  const int T = c.max_horizon();
  std::vector<TrajectoryStats> runs(c.replicas);
  parallel_for(c.replicas, c.resolved_workers(), [&](std::size_t r) {
    const EnvironmentField env(model, derive_seed(c.seed, {r, kEnvTag}));
    runs[r] = run_trajectory(env, c.dimension, T, derive_seed(c.seed, {r, kBranchTag}));
  });

  Outputs out(ctx.out_dir);
  ordered_json summary = header(ctx, "simulate");
  summary["horizon"] = T;
  summary["survival_proxy"] = "N_T > 0";
  summary["replicas"] = ordered_json::array();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::ostringstream csv;
    csv << "t,N_t,ln_Nbar,rho_star,overlap,alive\n";
    for (const auto& rec : runs[r].records)
      csv << rec.t << "," << rec.total << "," << num(rec.ln_nbar) << "," << num(rec.rho_star) << ","
          << num(rec.overlap) << "," << (rec.alive ? 1 : 0) << "\n";
    char name[64];
    std::snprintf(name, sizeof name, "trajectory_%04zu.csv", r);
    out.add(name, csv.str());
    const auto& last = runs[r].records.back();
    summary["replicas"].push_back({{"replica", r},
                                   {"file", name},
                                   {"stop", to_string(runs[r].stop)},
                                   {"last_t", last.t},
                                   {"last_total", last.total},
                                   {"alive_at_horizon", runs[r].stop == StopReason::horizon && last.alive}});
  }
  out.add("summary.json", summary.dump(2) + "\n");
  out.commit();
}

void cmd_moments(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const int d = c.dimension;
  const EnvironmentModel model = c.model();
  const EnvMoments mom = env_moments(model);
  const int Tmax = c.max_horizon();
  const auto second = normalized_second_moments(mom, d, Tmax);
  const auto overlap = overlap_bound_series_all(mom, d, Tmax, true);
  const auto overlap_no_c = overlap_bound_series_all(mom, d, Tmax, false);

  ordered_json j = header(ctx, "moments");
  j["moments"] = moments_json(mom);
  j["series"] = ordered_json::array();
  for (int T : c.horizons) {
    ordered_json row{{"T", T},
                     {"normalized_second_moment", jnum(second[static_cast<std::size_t>(T)])},
                     {"overlap_sum", jnum(overlap[static_cast<std::size_t>(T)])},
                     {"overlap_sum_scaled", jnum(std::pow(T, d / 2.0) * overlap[static_cast<std::size_t>(T)])}};
    ordered_json diag{{"second_moment_collisions_from_one", jnum(normalized_second_moment_shifted(mom, d, T))},
                      {"overlap_sum_without_c", jnum(overlap_no_c[static_cast<std::size_t>(T)])}};
    try {
      diag["envelope"] = jnum(normalized_second_moment_envelope(mom, d, T));
      const auto& pi = return_probability_interval(d);
      diag["envelope_limit_form"] =
          jnum(1.0 + mom.c * (1.0 - pi.upper) / ((mom.m - 1.0) * (1.0 - mom.alpha * pi.upper)));
    } catch (const PreconditionError&) {
      diag["envelope"] = nullptr;
    }
    row["diagnostics"] = diag;
    j["series"].push_back(row);
  }

  // Pair-lattice recursion against the renewal series.
  ordered_json pair = ordered_json::array();
  for (int T : c.horizons) {
    if (T > c.pair_dp_max_T) continue;
    const auto pf = annealed_pair_field(mom, d, T, budget_of(c));
    const LatticeBox single(d, T);
    const std::size_t S = single.size();
    long double total = 0.0L, diag = 0.0L;
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t k = 0; k < S; ++k) total += pf.field.values[i * S + k];
      diag += pf.field.values[i * S + i];
    }
    pair.push_back({{"T", T},
                    {"second_moment_residual", rel_err(static_cast<double>(total), second[static_cast<std::size_t>(T)])},
                    {"overlap_residual", rel_err(static_cast<double>(diag), overlap[static_cast<std::size_t>(T)])}});
  }
  j["pair_dp_check"] = pair;

  // Exhaustive enumeration on tiny instances.
  ordered_json oracle = ordered_json::array();
  if (d == 1 && model.enumerable()) {
    for (int T : {1, 2}) {
      try {
        const ExactLawTable table = brute_force_oracle(model, T, c.max_atoms);
        const auto pf = annealed_pair_field(mom, 1, T, budget_of(c));
        const LatticeField pt = t_step_distribution(1, T);
        double mean_res = 0.0, pair_res = 0.0;
        for (int x = -T; x <= T; ++x) {
          mean_res = std::max(mean_res, rel_err(table.mean_at(x), std::pow(mom.m, T) * pt.at({x})));
          for (int y = -T; y <= T; ++y) {
            const int a[1]{x}, b[1]{y};
            pair_res = std::max(pair_res, rel_err(table.pair_at(x, y) / std::pow(mom.m, 2 * T), pf.normalized(a, b)));
          }
        }
        double mart = 0.0;
        for (double r : table.martingale_residual) mart = std::max(mart, r);
        oracle.push_back(
            {{"T", T},
             {"atoms", table.atoms},
             {"mean_residual", mean_res},
             {"pair_residual", pair_res},
             {"second_moment_residual", rel_err(table.normalized_second_moment(), second[static_cast<std::size_t>(T)])},
             {"overlap_residual", rel_err(table.normalized_overlap_sum(), overlap[static_cast<std::size_t>(T)])},
             {"martingale_residual", mart}});
      } catch (const ResourceLimitError& e) {
        oracle.push_back({{"T", T}, {"skipped", e.what()}});
      }
    }
  }
  j["oracle_check"] = oracle;
  Outputs out(ctx.out_dir);
  out.add("moments.json", j.dump(2) + "\n");
  out.commit();
}

void cmd_phase(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const EnvironmentModel model = c.model();
  const PhaseReport p = classify_phase(model, c.dimension);
  ordered_json j = header(ctx, "phase");
  j["moments"] = moments_json(p.moments);
  j["pi"] = interval_json(p.pi);
  j["labels"] = p.labels();
  j["l2"] = to_string(p.l2);
  j["supercritical"] = p.supercritical;
  j["nondegenerate"] = p.nondegenerate;
  j["entropy"] = p.entropy;
  j["log_2d"] = std::log(2.0 * c.dimension);
  j["strong_a1"] = p.strong_a1;
  j["strong_a2"] = p.strong_a2;
  j["strong_a3"] = p.strong_a3;
  if (const auto eta = c.eta_law()) {
    const DpreCriterion k = dpre_clt_criterion(*eta, c.beta, c.dimension);
    j["polymer_clt"] = {{"gap", k.gap}, {"bound", interval_json(k.bound)}, {"decision", to_string(k.decision)}};
  }
  Outputs out(ctx.out_dir);
  out.add("phase.json", j.dump(2) + "\n");
  out.commit();
}

void cmd_clt(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const EnvironmentModel model = c.model();
  const TestFunction f = c.test_function();
  ExperimentOptions opt{c.resolved_workers(), budget_of(c)};
  const ConvergenceTable table = clt_l2_experiment(model, c.dimension, f, c.horizons, c.replicas, c.seed, opt);

  Outputs out(ctx.out_dir);
  std::ostringstream csv;
  csv << "T,replicas,used,extinct,overflowed,mean,variance,std_error,target,standardized_error\n";
  ordered_json j = header(ctx, "clt");
  j["function"] = table.function;
  j["integral_fg1"] = integral_fg1(f, c.dimension);
  j["exploratory"] = table.exploratory;
  j["rows"] = ordered_json::array();
  for (const auto& r : table.rows) {
    csv << r.T << "," << r.replicas << "," << r.used << "," << r.extinct << "," << r.overflowed << "," << num(r.mean)
        << "," << num(r.variance) << "," << num(r.std_error) << "," << num(r.target) << ","
        << num(r.standardized_error) << "\n";
    j["rows"].push_back({{"T", r.T},
                         {"used", r.used},
                         {"extinct", r.extinct},
                         {"overflowed", r.overflowed},
                         {"mean", jnum(r.mean)},
                         {"std_error", jnum(r.std_error)},
                         {"target", jnum(r.target)},
                         {"standardized_error", jnum(r.standardized_error)}});
  }
  out.add("clt_table.csv", csv.str());

  if (!c.epsilons.empty()) {
    const auto cond = conditional_clt_experiment(model, c.dimension, f, c.max_horizon(), c.replicas, c.epsilons,
                                                 c.seed, c.confidence, opt);
    std::ostringstream ccsv;
    ccsv << "T,epsilon,survivors,exceed,rate,ci_lower,ci_upper\n";
    for (const auto& r : cond.rows)
      ccsv << cond.T << "," << num(r.epsilon) << "," << cond.survivors << "," << r.exceed << "," << num(r.rate)
           << "," << num(r.ci.lower) << "," << num(r.ci.upper) << "\n";
    out.add("conditional_clt.csv", ccsv.str());
    j["conditional"] = {{"T", cond.T},
                        {"survival_proxy", "N_T > 0"},
                        {"survivors", cond.survivors},
                        {"overflowed", cond.overflowed},
                        {"survival", jnum(cond.survival)},
                        {"survival_ci", interval_json(cond.survival_ci)}};
  }
  out.add("clt.json", j.dump(2) + "\n");
  out.commit();
}

void cmd_overlap(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const EnvironmentModel model = c.model();
  ExperimentOptions opt{c.resolved_workers(), budget_of(c)};
  const auto rows = overlap_scaling_experiment(model, c.dimension, c.horizons, c.replicas, c.seed, opt);
  std::ostringstream csv;
  csv << "T,survivors,overflowed,q50,q90,q99,exact\n";
  ordered_json j = header(ctx, "overlap");
  j["survival_proxy"] = "N_T > 0";
  j["rows"] = ordered_json::array();
  for (const auto& r : rows) {
    csv << r.T << "," << r.survivors << "," << r.overflowed << "," << num(r.q50) << "," << num(r.q90) << ","
        << num(r.q99) << "," << num(r.exact) << "\n";
    j["rows"].push_back({{"T", r.T},
                         {"survivors", r.survivors},
                         {"overflowed", r.overflowed},
                         {"q50", jnum(r.q50)},
                         {"q90", jnum(r.q90)},
                         {"q99", jnum(r.q99)},
                         {"exact", jnum(r.exact)}});
  }
  Outputs out(ctx.out_dir);
  out.add("overlap_table.csv", csv.str());
  out.add("overlap.json", j.dump(2) + "\n");
  out.commit();
}

void cmd_dpre(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const int d = c.dimension;
  const EnvironmentModel model = c.model();
  const EnvMoments mom = env_moments(model);
  const int T = c.max_horizon();
  const auto eta_law = c.eta_law();
  Outputs out(ctx.out_dir);
  ordered_json j = header(ctx, "dpre");

  // ln Z_t (coupled) or ln P^q[N_t] along one environment.
  const EnvironmentField env = eta_law ? couple_from_eta(EtaField(*eta_law, derive_seed(c.seed, {kEtaTag})), c.beta)
                                       : EnvironmentField(model, derive_seed(c.seed, {kEtaTag}));
  const auto logs = log_quenched_totals(env, T, d, budget_of(c));
  std::ostringstream series;
  series << "T,logZ,logZbar\n";
  for (int t = 0; t <= T; ++t)
    series << t << "," << num(logs[static_cast<std::size_t>(t)]) << ","
           << num(logs[static_cast<std::size_t>(t)] - t * std::log(mom.m)) << "\n";
  out.add("polymer_series.csv", series.str());

  if (eta_law) {
    const EtaField eta(*eta_law, derive_seed(c.seed, {kEtaTag}));
    const DpreCriterion k = dpre_clt_criterion(*eta_law, c.beta, d);
    j["polymer_clt"] = {{"gap", k.gap}, {"bound", interval_json(k.bound)}, {"decision", to_string(k.decision)}};

    ordered_json coupling = ordered_json::array();
    double worst = 0.0;
    for (int t = 1; t <= std::min(T, c.coupling_max_T); ++t) {
      const auto r = coupling_identity_check(eta, c.beta, t, d, budget_of(c));
      const auto s = eta_shift_check(eta, c.beta, 1.0, t, d, budget_of(c));
      worst = std::max({worst, r.log_total, r.endpoint});
      coupling.push_back({{"T", t},
                          {"log_total_residual", jnum(r.log_total)},
                          {"endpoint_residual", jnum(r.endpoint)},
                          {"shift_endpoint_residual", s.endpoint},
                          {"shift_log_z_residual", s.log_z}});
    }
    j["coupling"] = coupling;
    j["coupling_max_residual"] = jnum(worst);

    const PolymerResult poly = polymer_dp(eta, c.beta, T, d, budget_of(c));
    j["endpoint_T"] = T;
    j["log_z"] = poly.log_z;
    j["log_zbar"] = poly.log_zbar;
    std::ostringstream ep;
    for (int i = 0; i < d; ++i) ep << "x" << (i + 1) << ",";
    ep << "prob\n";
    for_each_cell(poly.endpoint.box, T, [&](std::size_t i, std::span<const int> x) {
      const double p = poly.endpoint.values[i];
      if (p == 0.0) return;
      for (int v : x) ep << v << ",";
      ep << num(p) << "\n";
    });
    out.add("endpoint.csv", ep.str());

    j["descriptive"] = {{"note", "finite-T variances; both means are 1"},
                        {"var_nbar", jnum(normalized_second_moment(mom, d, T) - 1.0)},
                        {"var_zbar", jnum(zbar_second_moment(*eta_law, c.beta, d, T) - 1.0)}};
  }

  SlopeOptions so;
  so.route = c.slope_route == "branching" ? SlopeRoute::branching : SlopeRoute::polymer;
  so.confidence = c.confidence;
  so.workers = c.resolved_workers();
  so.budget = budget_of(c);
  const SlopeEstimate s = strong_disorder_slope(model, d, T, std::max<std::size_t>(c.replicas, 2), c.seed, so);
  j["slope"] = {{"route", to_string(s.route)},
                {"T", s.T},
                {"window", {T / 2, T}},
                {"replicas", s.replicas},
                {"used", s.used},
                {"extinct", s.extinct},
                {"overflowed", s.overflowed},
                {"slope", jnum(s.slope)},
                {"ci", interval_json(s.ci)},
                {"confidence", c.confidence},
                {"exploratory", s.exploratory}};
  out.add("dpre.json", j.dump(2) + "\n");
  out.commit();
}

void cmd_extinction(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const EnvironmentModel model = c.model();
  ExtinctionOptions o;
  o.horizon = c.extinction_horizon;
  o.replicas = c.replicas;
  o.seed = c.seed;
  o.confidence = c.confidence;
  o.sw_samples = c.sw_samples;
  o.workers = c.resolved_workers();
  const ExtinctionReport r = extinction_estimate(model, c.dimension, o);
  ordered_json j = header(ctx, "extinction");
  j["horizon"] = r.horizon;
  j["replicas"] = r.replicas;
  j["extinct"] = r.extinct;
  j["overflowed_counted_as_surviving"] = r.overflowed;
  j["e_hat"] = r.e_hat;
  j["e_hat_ci"] = interval_json(r.e_hat_ci);
  j["e_gw"] = r.e_gw;
  j["gw_residual"] = r.gw_residual;
  j["e_sw"] = r.e_sw;
  j["e_sw_ci"] = interval_json(r.e_sw_ci);
  j["sw_lower_bound_only"] = r.sw_lower_bound_only;
  j["ordering_holds"] = r.e_gw <= r.e_hat_ci.upper && r.e_hat_ci.lower <= r.e_sw_ci.upper;
  Outputs out(ctx.out_dir);
  out.add("extinction.json", j.dump(2) + "\n");
  out.commit();
}

int run(const Invocation& inv) {
  try {
    CommandContext ctx{load_config(inv.config_path), inv.out_dir};
    if (inv.seed) ctx.config.seed = *inv.seed;
    if (inv.workers) ctx.config.workers = *inv.workers;
    static const std::map<std::string, void (*)(const CommandContext&)> table{
        {"simulate", cmd_simulate}, {"moments", cmd_moments}, {"phase", cmd_phase},
        {"clt", cmd_clt},           {"overlap", cmd_overlap}, {"dpre", cmd_dpre},
        {"extinction", cmd_extinction}};
    const auto it = table.find(inv.command);
    if (it == table.end()) throw ConfigError("unknown command '" + inv.command + "'");
    it->second(ctx);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResourceError;
  } catch (const PopulationOverflowError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResourceError;
  } catch (const NumericOverflowError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResourceError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace brwre::cli
