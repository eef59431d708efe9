#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "leo_madrl/config.hpp"
#include "leo_madrl/report.hpp"

namespace leo {

struct ExperimentResult {
    SimReport report;
    std::vector<TrainingLogRow> training_log;  // empty for dijkstra
    std::optional<MlpParams> global_weights;   // offline madrl
    std::vector<MlpParams> agent_weights;      // online madrl, indexed by satellite
    std::vector<std::filesystem::path> artifacts;
};

// Weight file name for satellite `sat` in the online phase: dnn_p<plane>_s<slot>.bin
std::string agent_weights_filename(const OrbitalShell& shell, int sat);
inline constexpr const char* kGlobalWeightsFilename = "dnn_global.bin";

// Runs the configured router and phase. When `write_artifacts` is set, the
// output directory receives config.json, packets.csv, summary.csv,
// latency.svg, training.csv for learning routers, and weight files for madrl.
ExperimentResult run_experiment(const RunConfig& cfg, bool write_artifacts = true);

// Sets the spdlog level from MADRL_LOG (trace, debug, info, warn, error, off);
// warn when unset. Unknown values fall back to warn.
void configure_logging();

}  // namespace leo
