#pragma once

#include "nsa/config.hpp"

namespace nsa::cli {

/// Executes the configured experiment, writing report.json plus one CSV
/// per table into config.output_dir. Returns 0 when every check passed
/// and 1 when the run completed but a check failed; configuration or
/// IO trouble (including numerically impossible requests) throws
/// ConfigError. Deterministic given config and seed: reruns reproduce
/// every CSV byte for byte.
int run_experiment(const RunConfig& config);

}  // namespace nsa::cli
