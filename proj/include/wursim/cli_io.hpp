// Config ingestion, sweep invocation and byte-stable result emission.
//
// The JSON config mirrors the experiment defaults; unknown keys are rejected
// so typos fail loudly. Result tables are plain CSV with floats at 17
// significant digits, rows fully sorted, so identical (config, seed) runs
// produce identical bytes no matter how many worker threads ran.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wursim/sim_harness.hpp"

namespace wursim {

struct ResolvedConfig {
    std::string system = "system1";
    int n_sensors = 50;
    std::string protocol = "both"; // "id" | "content" | "both"
    int episodes = 100;
    int steps = 1000;
    std::vector<int> polls_per_step = {1, 2, 5, 10, 20, 50};
    std::vector<double> theta_multipliers = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    EnergyParams energy;
    QuadratureConfig quad;
    std::uint64_t base_seed = 1;

    bool operator==(const ResolvedConfig& other) const;
};

/// Fills missing keys with defaults, rejects unknown keys, validates ranges.
ResolvedConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ResolvedConfig& cfg);

/// Expands the config into the sweep grid: ID-based points per M (theta 0),
/// then content-based points per (M, theta); config_index follows grid order.
std::vector<ExperimentConfig> build_grid(const ResolvedConfig& cfg);

struct RunManifest {
    std::string config_path;
    std::string out_dir;
    std::string version;
    std::uint64_t base_seed = 0;
    ResolvedConfig config;
    std::vector<ExperimentConfig> grid;
};

/// Loads and resolves a JSON config file.
RunManifest parse_config(const std::string& path);

/// Writes pareto.csv, mse_cdf.csv, polling_freq.csv and summary.json into
/// manifest.out_dir. Episode and sensor columns are 1-based.
void emit_results(const RunManifest& manifest, const std::vector<ParetoPoint>& points,
                  double wall_clock_seconds);

/// Prints implementation-vs-oracle comparisons (Monte Carlo and fixed-point
/// references); returns 0 when everything agrees within coarse bounds.
int run_oracle_suite();

/// Entry point behind the wursim binary; returns the process exit code
/// (0 success, 1 usage/validation failure, 2 runtime failure).
int cli_main(int argc, const char* const* argv);

} // namespace wursim
