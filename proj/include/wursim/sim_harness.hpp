// Monte Carlo episode runner and (protocol, M, theta) sweep driver.
//
// Episodes are independent jobs: each owns its own process state, belief and
// random stream, derived only from (base_seed, config_index, episode_index),
// so sweep output is bit-identical regardless of the number of worker
// threads.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wursim/estimator.hpp"
#include "wursim/network_energy.hpp"
#include "wursim/quadrature.hpp"
#include "wursim/system_model.hpp"
#include "wursim/voi_scheduler.hpp"

namespace wursim {

struct ExperimentConfig {
    std::string system = "system1"; // benchmark name; ignored if inline_system set
    int n_sensors = 50;             // benchmark size; ignored if inline_system set
    std::optional<SystemSpec> inline_system;
    Protocol protocol = Protocol::IdBased;
    int episodes = 100;      // L
    int steps = 1000;        // K
    int polls_per_step = 1;  // M
    double theta_multiplier = 0.0; // c_theta
    EnergyParams energy;
    QuadratureConfig quad;
    std::uint64_t base_seed = 1;
    int config_index = 0; // position within the sweep grid
};

SystemSpec resolve_system(const ExperimentConfig& cfg);

/// The random stream run_episode will consume, exposed so tests can replay
/// an episode's draws.
RandomStream episode_stream(const ExperimentConfig& cfg, int episode_index);

struct EpisodeMetrics {
    double sum_squared_error = 0.0; // sum over steps of |x - x_hat|^2
    EnergyLedger ledger;
    std::vector<double> step_squared_error;

    bool operator==(const EpisodeMetrics& other) const;
};

/// One episode: x(0) = x_hat(0) = 0, P(0) = I; per step advance the truth,
/// draw measurements once, predict once, then M sequential select/poll/update
/// cycles. Lost and Silent are indistinguishable at the gateway: both go
/// through update_no_packet; the realized outcome only feeds the ledger.
EpisodeMetrics run_episode(const ExperimentConfig& cfg, int episode_index);
EpisodeMetrics run_episode(const ExperimentConfig& cfg, const SystemSpec& spec,
                           int episode_index);

struct ParetoPoint {
    Protocol protocol = Protocol::IdBased;
    int polls_per_step = 0;
    double theta_multiplier = 0.0;
    double mean_mse = 0.0;           // (1 / LKN) sum of squared errors
    double mean_lifetime_years = 0.0;
    std::vector<double> poll_freq; // per sensor, fraction of timesteps polled
    std::vector<double> tx_freq;   // per sensor, fraction of timesteps transmitted
    std::vector<double> episode_mse; // per-episode MSE samples for CDF plots
};

ParetoPoint aggregate(const ExperimentConfig& cfg, const std::vector<EpisodeMetrics>& episodes);

/// Runs every config in the grid (episodes spread over `jobs` threads) and
/// returns the points sorted by lifetime ascending.
std::vector<ParetoPoint> sweep(const std::vector<ExperimentConfig>& grid, int jobs = 1);

} // namespace wursim
