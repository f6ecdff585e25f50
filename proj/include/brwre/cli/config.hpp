#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/eta.hpp"
#include "brwre/test_function.hpp"

namespace brwre::cli {

// Sectioned INI file; see docs/config.md for the keys.
struct ExperimentConfig {
  // [model]
  int dimension = 1;
  std::string offspring;  // mixture text, used when eta is empty
  std::string eta;        // eta law text; with beta gives the coupled model
  double beta = 0.0;
  // [run]
  std::uint64_t seed = 1;
  std::vector<int> horizons{10};
  std::size_t replicas = 1;
  unsigned workers = 0;  // 0: all available
  double confidence = 0.99;
  // [budget]
  std::size_t max_cells = std::size_t{1} << 26;
  std::uint64_t max_atoms = 10'000'000;
  // [moments]
  int pair_dp_max_T = 8;
  // [clt]
  std::string function = "constant(1)";
  std::vector<double> epsilons;
  // [extinction]
  int extinction_horizon = 50;
  std::uint64_t sw_samples = 100'000;
  // [dpre]
  std::string slope_route = "polymer";
  int coupling_max_T = 8;

  EnvironmentModel model() const;
  std::optional<EtaLaw> eta_law() const;
  TestFunction test_function() const;
  unsigned resolved_workers() const;
  int max_horizon() const;
};

OffspringLaw parse_offspring_law(const std::string& text);
EnvironmentModel parse_mixture(const std::string& text);
EtaLaw parse_eta_law(const std::string& text);
TestFunction parse_test_function(const std::string& text);

// Throws ConfigError on syntax errors, unknown keys or invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Canonical INI text; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace brwre::cli
