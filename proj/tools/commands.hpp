#pragma once

#include "run_config.hpp"

namespace stabopt::cli {

// Each command returns the process exit code: 0 all-pass, 2 a check failed,
// and throws for config (3) or solver (4) problems, mapped in main.
int cmd_solve(const RunConfig& cfg);
int cmd_rollout(const RunConfig& cfg);
int cmd_optimize(const RunConfig& cfg);
int cmd_measure(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);
int cmd_scan(const RunConfig& cfg);
int cmd_pipeline(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);

}  // namespace stabopt::cli
