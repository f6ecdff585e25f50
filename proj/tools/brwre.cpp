#include <CLI11.hpp>

#include "brwre/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Branching random walks in random environment: simulation and exact moments"};
  app.require_subcommand(1);
  brwre::cli::Invocation inv;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Simulate trajectories and write one CSV per replica"},
      {"moments", "Exact second moments, overlap series and oracle cross-checks"},
      {"phase", "Moment-based phase classification"},
      {"clt", "L2 CLT error and survival-conditioned exceedance experiments"},
      {"overlap", "Quantiles of T^{d/2} R_T with the exact overlay"},
      {"dpre", "Directed polymer coupling, criterion and disorder slope"},
      {"extinction", "Extinction frequency against the GW and SW references"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", inv.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--workers", workers, "Worker threads (0: all cores)");
    sub->final_callback([&, name = name, sub] {
      inv.command = name;
      if (sub->count("--seed")) inv.seed = seed;
      if (sub->count("--workers")) inv.workers = workers;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : brwre::cli::kConfigError;
  }
  return brwre::cli::run(inv);
}
