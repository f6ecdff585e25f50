#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "brwre/cli/config.hpp"

namespace brwre::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kResourceError = 3, kInternalError = 4 };

struct CommandContext {
  ExperimentConfig config;
  std::string out_dir;
};

// Each command computes everything first and then writes its files
// atomically into out_dir.
void cmd_simulate(const CommandContext& ctx);
void cmd_moments(const CommandContext& ctx);
void cmd_phase(const CommandContext& ctx);
void cmd_clt(const CommandContext& ctx);
void cmd_overlap(const CommandContext& ctx);
void cmd_dpre(const CommandContext& ctx);
void cmd_extinction(const CommandContext& ctx);

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out_dir = ".";
};

// Loads the config, applies flag overrides, runs the command and maps
// exceptions to exit codes (messages go to stderr).
int run(const Invocation& inv);

}  // namespace brwre::cli
