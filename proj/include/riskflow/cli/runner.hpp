#pragma once

#include <json.hpp>

#include "riskflow/cli/config.hpp"

namespace riskflow::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kVerdictFailed = 2 };

struct RunOutcome {
    nlohmann::json result;
    int exit_code = kSuccess;
};

/// Runs the configured experiment, writes outputs when an output directory is set.
RunOutcome run(const ExperimentConfig& config);

}  // namespace riskflow::cli
