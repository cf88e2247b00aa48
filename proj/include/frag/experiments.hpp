#pragma once

#include "frag/config.hpp"

namespace frag {

// Executes the configured experiment and writes its artifacts (summary.csv,
// kind-specific CSVs, manifest.json) into cfg.output_dir. config_echo is the
// parsed config, stored verbatim in the manifest for reproduction.
// Returns the process exit code: 0 on success, 1 when verification fails.
int run_experiment(const ExperimentConfig& cfg, const nlohmann::json& config_echo);

}  // namespace frag
