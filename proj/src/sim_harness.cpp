#include "wursim/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace wursim {

namespace {

void validate_config(const ExperimentConfig& cfg, const SystemSpec& spec) {
    if (cfg.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (cfg.polls_per_step < 1 || cfg.polls_per_step > spec.n_sensors)
        throw std::invalid_argument("polls_per_step must lie in [1, N]");
    if (cfg.theta_multiplier < 0.0)
        throw std::invalid_argument("theta_multiplier must be nonnegative");
}

} // namespace

SystemSpec resolve_system(const ExperimentConfig& cfg) {
    if (cfg.inline_system) return *cfg.inline_system;
    if (cfg.system == "system1") return build_benchmark(Benchmark::System1, cfg.n_sensors);
    if (cfg.system == "system2") return build_benchmark(Benchmark::System2, cfg.n_sensors);
    throw std::invalid_argument("unknown system name: " + cfg.system);
}

RandomStream episode_stream(const ExperimentConfig& cfg, int episode_index) {
    return RandomStream(derive_stream_seed(cfg.base_seed,
                                           static_cast<std::uint64_t>(cfg.config_index),
                                           static_cast<std::uint64_t>(episode_index)));
}

bool EpisodeMetrics::operator==(const EpisodeMetrics& other) const {
    return sum_squared_error == other.sum_squared_error &&
           ledger.polls == other.ledger.polls &&
           ledger.transmissions == other.ledger.transmissions &&
           ledger.total_steps == other.ledger.total_steps &&
           step_squared_error == other.step_squared_error;
}

EpisodeMetrics run_episode(const ExperimentConfig& cfg, int episode_index) {
    return run_episode(cfg, resolve_system(cfg), episode_index);
}

EpisodeMetrics run_episode(const ExperimentConfig& cfg, const SystemSpec& spec,
                           int episode_index) {
    validate_config(cfg, spec);
    RandomStream rng = episode_stream(cfg, episode_index);

    ProcessState state{Eigen::VectorXd::Zero(spec.state_dim), 0};
    FilterBelief belief = make_initial_belief(spec.state_dim);

    EpisodeMetrics metrics;
    metrics.ledger = EnergyLedger(spec.n_sensors);
    metrics.step_squared_error.reserve(cfg.steps);

    std::vector<int> polled;
    std::vector<PollOutcome> outcomes;
    for (int k = 0; k < cfg.steps; ++k) {
        state = step_process(state, spec, rng);
        const Measurement meas = measure(state, spec, rng);
        belief = predict(belief, spec);

        polled.clear();
        outcomes.clear();
        ScheduleContext ctx{belief, {}, cfg.theta_multiplier};
        for (int m = 0; m < cfg.polls_per_step; ++m) {
            const int n = select_next(ctx, spec, cfg.protocol, cfg.quad);
            double theta = 0.0;
            if (cfg.protocol == Protocol::ContentBased)
                theta = cfg.theta_multiplier *
                        std::sqrt(std::max(belief.P_cov(n, n), 0.0));

            const PollOutcome outcome = simulate_poll(cfg.protocol, spec, n, meas.y(n),
                                                      belief.x_hat(n), theta, rng);
            if (outcome.kind == PollResult::Delivered) {
                // A zero innovation variance means the component is already
                // known exactly; the update would be 0/0 and carries nothing.
                if (innovation_variance(belief, spec, n) > 0.0)
                    belief = update_received(belief, spec, n, outcome.value);
            } else {
                belief = update_no_packet(belief, spec, CensorSpec{n, theta},
                                          spec.epsilon(n), cfg.quad);
            }

            polled.push_back(n);
            outcomes.push_back(outcome);
            ctx.belief = belief;
            ctx.already_polled.insert(n);
        }
        metrics.ledger = charge_step(std::move(metrics.ledger), polled, outcomes);

        const double sq = (state.x - belief.x_hat).squaredNorm();
        metrics.sum_squared_error += sq;
        metrics.step_squared_error.push_back(sq);
    }
    return metrics;
}

ParetoPoint aggregate(const ExperimentConfig& cfg, const std::vector<EpisodeMetrics>& episodes) {
    if (episodes.empty()) throw std::invalid_argument("aggregate: no episodes");
    const SystemSpec spec = resolve_system(cfg);
    const int n = spec.n_sensors;

    EnergyLedger pooled(n);
    double sum_sq = 0.0;
    ParetoPoint point;
    point.episode_mse.reserve(episodes.size());
    long pooled_steps = 0;
    for (const auto& ep : episodes) {
        if (static_cast<int>(ep.ledger.polls.size()) != n)
            throw std::invalid_argument("aggregate: episode ledger size mismatch");
        for (int s = 0; s < n; ++s) {
            pooled.polls[s] += ep.ledger.polls[s];
            pooled.transmissions[s] += ep.ledger.transmissions[s];
        }
        pooled_steps += ep.ledger.total_steps;
        sum_sq += ep.sum_squared_error;
        point.episode_mse.push_back(ep.sum_squared_error /
                                    (static_cast<double>(ep.ledger.total_steps) * n));
    }
    pooled.total_steps = pooled_steps;

    point.protocol = cfg.protocol;
    point.polls_per_step = cfg.polls_per_step;
    point.theta_multiplier = cfg.theta_multiplier;
    point.mean_mse = sum_sq / (static_cast<double>(pooled_steps) * n);
    point.mean_lifetime_years = lifetime(pooled, cfg.energy, cfg.protocol).network_years;
    point.poll_freq.resize(n);
    point.tx_freq.resize(n);
    for (int s = 0; s < n; ++s) {
        point.poll_freq[s] = static_cast<double>(pooled.polls[s]) / pooled_steps;
        point.tx_freq[s] = static_cast<double>(pooled.transmissions[s]) / pooled_steps;
    }
    return point;
}

std::vector<ParetoPoint> sweep(const std::vector<ExperimentConfig>& grid, int jobs) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    jobs = std::max(1, jobs);

    // Resolve each config's system once; SystemSpec is immutable and shared.
    std::vector<SystemSpec> specs;
    specs.reserve(grid.size());
    for (const auto& cfg : grid) specs.push_back(resolve_system(cfg));

    struct Task {
        int config;
        int episode;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<EpisodeMetrics>> metrics(grid.size());
    for (size_t c = 0; c < grid.size(); ++c) {
        metrics[c].resize(grid[c].episodes);
        for (int e = 0; e < grid[c].episodes; ++e)
            tasks.push_back({static_cast<int>(c), e});
    }

    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const Task t = tasks[i];
                metrics[t.config][t.episode] =
                    run_episode(grid[t.config], specs[t.config], t.episode);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ParetoPoint> points;
    points.reserve(grid.size());
    for (size_t c = 0; c < grid.size(); ++c) points.push_back(aggregate(grid[c], metrics[c]));

    std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        return std::make_tuple(a.mean_lifetime_years, std::string(protocol_name(a.protocol)),
                               a.polls_per_step, a.theta_multiplier) <
               std::make_tuple(b.mean_lifetime_years, std::string(protocol_name(b.protocol)),
                               b.polls_per_step, b.theta_multiplier);
    });
    return points;
}

} // namespace wursim
