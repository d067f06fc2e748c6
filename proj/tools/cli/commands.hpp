#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace todalab::cli {

enum ExitCode : int { kSuccess = 0, kConfigInvalid = 2, kPrecondition = 3, kNonConvergence = 4 };

const std::vector<std::string>& subcommands();

/// Runs one subcommand, writing data files into out. Returns kSuccess or
/// kNonConvergence; precondition failures propagate as exceptions.
int run_command(const ExperimentConfig& cfg, OutputDir& out, std::string& message);

}  // namespace todalab::cli
