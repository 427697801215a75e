#pragma once

// Subcommand pipelines behind the command-line front end.

#include <string>
#include <vector>

#include "qles/config.hpp"
#include "qles/io.hpp"

namespace qles {

enum ExitCode : int { exit_certified = 0, exit_input_error = 1, exit_not_converged = 2 };

inline constexpr const char* kReportSchemaVersion = "1.0.0";
inline constexpr const char* kSubcommands[] = {"solve", "eigen", "fibering", "moser", "check", "validate", "sweep-tau"};

struct RunOutcome {
    int exit_code = exit_certified;
    Json report;
    std::vector<std::string> artifacts;
};

/// Executes `cfg.subcommand`, writing artifacts, `report.json` and
/// `metadata.json` (timestamps) under `run.out`. Input errors propagate as
/// InputError; every other outcome is encoded in the exit code.
RunOutcome run(const RunConfig& cfg);

}  // namespace qles
