#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "brwre/cli/commands.hpp"
#include "brwre/cli/config.hpp"
#include "brwre/errors.hpp"

using namespace brwre;
using namespace brwre::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("brwre_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) out[e.path().filename().string()] = read_file(e.path());
  return out;
}

int run_in(const fs::path& dir, const std::string& command, const std::string& config,
           std::optional<unsigned> workers = std::nullopt) {
  Invocation inv;
  inv.command = command;
  inv.config_path = write_file(dir / "config.ini", config);
  inv.out_dir = (dir / "out").string();
  inv.workers = workers;
  fs::create_directories(inv.out_dir);
  return run(inv);
}

const char* kDelta2 = "[model]\ndimension = 3\noffspring = 1*delta(2)\n[run]\nhorizons = 4, 8\nreplicas = 2\n";

}  // namespace

TEST(Config, ParsesAndCanonicalizes) {
  const auto c = parse_config(
      "[model]\ndimension = 2\noffspring = 0.5*poisson(2) ; 0.5*finite(0:0.25, 3:0.75)\n"
      "[run]\nseed = 42\nhorizons = 8,16\nreplicas = 10\n[clt]\nfunction = cosine(1, 0)\nepsilons = 0.1,0.2\n");
  EXPECT_EQ(c.dimension, 2);
  EXPECT_EQ(c.offspring, "0.5*poisson(2);0.5*finite(0:0.25,3:0.75)");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.horizons, (std::vector<int>{8, 16}));
  EXPECT_EQ(c.function, "cosine(1,0)");
  EXPECT_EQ(c.epsilons.size(), 2u);
  EXPECT_EQ(c.max_horizon(), 16);
  EXPECT_NEAR(env_moments(c.model()).m, 0.5 * 2 + 0.5 * 2.25, 1e-15);
}

TEST(Config, SerializeRoundTrips) {
  const auto c = parse_config(
      "[model]\ndimension = 1\neta = finite(-1:0.5, 1:0.5)\nbeta = 0.3\n[run]\nhorizons = 5\n[dpre]\nslope_route = branching\n");
  const auto text = serialize_config(c);
  EXPECT_EQ(serialize_config(parse_config(text)), text);
  ASSERT_TRUE(c.eta_law().has_value());
  EXPECT_TRUE(c.model().is_coupled());
}

TEST(Config, RejectsBadInput) {
  const char* bad[] = {
      "[model]\ndimension = 1\n",                                               // no model
      "[model]\ndimension = 5\noffspring = 1*delta(2)\n",                       // dimension
      "[model]\ndimension = 1\noffspring = 1*delta(2)\ncolour = red\n",         // unknown key
      "[modle]\ndimension = 1\n",                                               // unknown section
      "[model]\ndimension = 1\noffspring = 0.5*delta(2)\n",                     // weights
      "[model]\ndimension = 1\noffspring = 1*delta(2)\neta = gaussian(1)\n",    // both
      "[model]\ndimension = 1\noffspring = 1*poisson(-1)\n",                    // law
      "[model]\ndimension = x\noffspring = 1*delta(2)\n",                       // number
      "[model]\ndimension = 2\noffspring = 1*delta(2)\n[clt]\nfunction = cosine(1)\n",  // theta length
      "[model]\ndimension = 1\noffspring = 1*delta(2)\n[run]\nhorizons = 0\n",
      "[model]\ndimension = 1\noffspring = 1*delta(0)\n",                       // zero mean
      "[model\n",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
}

TEST(Cli, MalformedConfigExitsTwoWithoutOutputs) {
  TempDir dir;
  EXPECT_EQ(run_in(dir.path(), "moments", "[model]\ndimension = 9\n"), kConfigError);
  EXPECT_TRUE(fs::is_empty(dir.path() / "out"));
  EXPECT_EQ(run_in(dir.path(), "bogus", kDelta2), kConfigError);
  EXPECT_TRUE(fs::is_empty(dir.path() / "out"));
}

TEST(Cli, OverBudgetExitsThreeWithoutOutputs) {
  TempDir dir;
  const std::string cfg = std::string(kDelta2) + "[budget]\nmax_cells = 100\n[moments]\npair_dp_max_T = 8\n";
  EXPECT_EQ(run_in(dir.path(), "moments", cfg), kResourceError);
  EXPECT_TRUE(fs::is_empty(dir.path() / "out"));
}

TEST(Cli, SimulateDeterministicBranching) {
  TempDir dir;
  ASSERT_EQ(run_in(dir.path(), "simulate", kDelta2), kOk);
  const auto files = snapshot(dir.path() / "out");
  ASSERT_TRUE(files.count("trajectory_0000.csv"));
  ASSERT_TRUE(files.count("trajectory_0001.csv"));
  std::istringstream csv(files.at("trajectory_0000.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,N_t,ln_Nbar,rho_star,overlap,alive");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_EQ(std::stoull(f[1]), 1ull << rows);
    EXPECT_EQ(std::stod(f[2]), 0.0);
    ++rows;
  }
  EXPECT_EQ(rows, 9);
  const auto summary = nlohmann::json::parse(files.at("summary.json"));
  EXPECT_EQ(summary["command"], "simulate");
  EXPECT_EQ(summary["replicas"][0]["stop"], "horizon");
  for (const auto& [name, _] : files) EXPECT_EQ(name.find(".partial"), std::string::npos);
}

TEST(Cli, MomentsOfDeterministicBranchingAreOne) {
  TempDir dir;
  ASSERT_EQ(run_in(dir.path(), "moments", kDelta2), kOk);
  const auto j = nlohmann::json::parse(read_file(dir.path() / "out" / "moments.json"));
  for (const auto& row : j["series"]) EXPECT_NEAR(row["normalized_second_moment"].get<double>(), 1.0, 1e-13);
  ASSERT_EQ(j["pair_dp_check"].size(), 2u);
  for (const auto& row : j["pair_dp_check"]) EXPECT_LE(row["second_moment_residual"].get<double>(), 1e-12);
}

TEST(Cli, MomentsOracleCheckInOneDimension) {
  TempDir dir;
  ASSERT_EQ(run_in(dir.path(), "moments",
                   "[model]\ndimension = 1\noffspring = 0.5*finite(0:0.5,2:0.5);0.5*finite(0:0.1,2:0.9)\n"
                   "[run]\nhorizons = 2,4\n"),
            kOk);
  const auto j = nlohmann::json::parse(read_file(dir.path() / "out" / "moments.json"));
  ASSERT_EQ(j["oracle_check"].size(), 2u);
  for (const auto& row : j["oracle_check"]) {
    EXPECT_LE(row["second_moment_residual"].get<double>(), 1e-10);
    EXPECT_LE(row["pair_residual"].get<double>(), 1e-10);
    EXPECT_LE(row["martingale_residual"].get<double>(), 1e-13);
  }
}

TEST(Cli, PhaseLabelsOneDimension) {
  TempDir dir;
  ASSERT_EQ(run_in(dir.path(), "phase", "[model]\ndimension = 1\noffspring = 0.5*poisson(2);0.5*poisson(4)\n"), kOk);
  const auto j = nlohmann::json::parse(read_file(dir.path() / "out" / "phase.json"));
  const auto labels = j["labels"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(labels.begin(), labels.end(), "strong disorder (a1)"), labels.end());
  EXPECT_EQ(j["l2"], "fails");
}

TEST(Cli, DpreCouplingResidualIsTiny) {
  TempDir dir;
  ASSERT_EQ(run_in(dir.path(), "dpre",
                   "[model]\ndimension = 2\neta = gaussian(1)\nbeta = 0.5\n[run]\nhorizons = 8, 16\nreplicas = 4\n"),
            kOk);
  const auto files = snapshot(dir.path() / "out");
  ASSERT_TRUE(files.count("dpre.json"));
  ASSERT_TRUE(files.count("polymer_series.csv"));
  ASSERT_TRUE(files.count("endpoint.csv"));
  const auto j = nlohmann::json::parse(files.at("dpre.json"));
  for (const auto& row : j["coupling"]) EXPECT_LE(row["log_total_residual"].get<double>(), 1e-11);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRunsAndWorkers) {
  const std::string cfg =
      "[model]\ndimension = 2\noffspring = 0.5*poisson(1.5);0.5*poisson(2.5)\n"
      "[run]\nseed = 9\nhorizons = 4, 8\nreplicas = 6\n[clt]\nfunction = gaussian_bump(1)\nepsilons = 0.1\n"
      "[extinction]\nhorizon = 10\nsw_samples = 500\n";
  for (const char* command : {"simulate", "clt", "overlap", "extinction", "moments", "phase", "dpre"}) {
    TempDir a, b, c;
    ASSERT_EQ(run_in(a.path(), command, cfg, 1u), kOk) << command;
    ASSERT_EQ(run_in(b.path(), command, cfg, 1u), kOk) << command;
    ASSERT_EQ(run_in(c.path(), command, cfg, 3u), kOk) << command;
    const auto sa = snapshot(a.path() / "out");
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, snapshot(b.path() / "out")) << command;
    EXPECT_EQ(sa, snapshot(c.path() / "out")) << command;
  }
}
