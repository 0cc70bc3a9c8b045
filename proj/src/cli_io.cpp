#include "wursim/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <CLI11.hpp>

#include "wursim/oracles.hpp"
#include "wursim/version.hpp"

namespace wursim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& scope) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("unknown config key '" + scope + item.key() + "'");
    }
}

template <class T>
T field_as(const json& j, const std::string& name, const T& fallback) {
    if (!j.contains(name)) return fallback;
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("field '" + name + "' has the wrong type");
    }
}

void validate_resolved(const ResolvedConfig& cfg) {
    if (cfg.system != "system1" && cfg.system != "system2")
        throw std::invalid_argument("field 'system': must be \"system1\" or \"system2\"");
    if (cfg.n_sensors < 1) throw std::invalid_argument("field 'n_sensors': must be >= 1");
    if (cfg.protocol != "id" && cfg.protocol != "content" && cfg.protocol != "both")
        throw std::invalid_argument("field 'protocol': must be \"id\", \"content\" or \"both\"");
    if (cfg.episodes < 1) throw std::invalid_argument("field 'episodes': must be >= 1");
    if (cfg.steps < 1) throw std::invalid_argument("field 'steps': must be >= 1");
    if (cfg.polls_per_step.empty())
        throw std::invalid_argument("field 'polls_per_step': must be nonempty");
    for (int m : cfg.polls_per_step) {
        if (m < 1) throw std::invalid_argument("field 'polls_per_step': M must be >= 1");
        if (m > cfg.n_sensors)
            throw std::invalid_argument("field 'polls_per_step': M exceeds N");
    }
    if (cfg.theta_multipliers.empty())
        throw std::invalid_argument("field 'theta_multipliers': must be nonempty");
    for (double t : cfg.theta_multipliers)
        if (!(t >= 0.0) || !std::isfinite(t))
            throw std::invalid_argument("field 'theta_multipliers': values must be >= 0");
    if (cfg.energy.e_tx < 0 || cfg.energy.e_sense < 0 || cfg.energy.e_wake < 0 ||
        cfg.energy.e_sleep < 0)
        throw std::invalid_argument("field 'energy': energies must be >= 0");
    if (!(cfg.energy.e_max > 0)) throw std::invalid_argument("field 'energy.e_max': must be > 0");
    if (cfg.energy.per_poll_overhead_joules && !(*cfg.energy.per_poll_overhead_joules >= 0))
        throw std::invalid_argument("field 'energy.per_poll_overhead_joules': must be >= 0");
    if (!(cfg.quad.half_width_sigmas > 0))
        throw std::invalid_argument("field 'quadrature.half_width_sigmas': must be > 0");
    if (!(cfg.quad.abs_tol > 0) || !(cfg.quad.rel_tol > 0))
        throw std::invalid_argument("field 'quadrature': tolerances must be > 0");
    if (cfg.quad.max_subdivisions < 1)
        throw std::invalid_argument("field 'quadrature.max_subdivisions': must be >= 1");
}

} // namespace

bool ResolvedConfig::operator==(const ResolvedConfig& other) const {
    return system == other.system && n_sensors == other.n_sensors &&
           protocol == other.protocol && episodes == other.episodes && steps == other.steps &&
           polls_per_step == other.polls_per_step &&
           theta_multipliers == other.theta_multipliers &&
           energy.e_tx == other.energy.e_tx && energy.e_sense == other.energy.e_sense &&
           energy.e_wake == other.energy.e_wake && energy.e_sleep == other.energy.e_sleep &&
           energy.e_max == other.energy.e_max &&
           energy.per_poll_overhead_joules == other.energy.per_poll_overhead_joules &&
           quad.half_width_sigmas == other.quad.half_width_sigmas &&
           quad.abs_tol == other.quad.abs_tol && quad.rel_tol == other.quad.rel_tol &&
           quad.max_subdivisions == other.quad.max_subdivisions &&
           base_seed == other.base_seed;
}

ResolvedConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
    reject_unknown_keys(j,
                        {"system", "n_sensors", "protocol", "episodes", "steps",
                         "polls_per_step", "theta_multipliers", "energy", "quadrature",
                         "base_seed"},
                        "");

    ResolvedConfig cfg;
    cfg.system = field_as<std::string>(j, "system", cfg.system);
    cfg.n_sensors = field_as<int>(j, "n_sensors", cfg.n_sensors);
    cfg.protocol = field_as<std::string>(j, "protocol", cfg.protocol);
    cfg.episodes = field_as<int>(j, "episodes", cfg.episodes);
    cfg.steps = field_as<int>(j, "steps", cfg.steps);
    cfg.polls_per_step = field_as<std::vector<int>>(j, "polls_per_step", cfg.polls_per_step);
    cfg.theta_multipliers =
        field_as<std::vector<double>>(j, "theta_multipliers", cfg.theta_multipliers);
    cfg.base_seed = field_as<std::uint64_t>(j, "base_seed", cfg.base_seed);

    if (j.contains("energy")) {
        const json& e = j.at("energy");
        if (!e.is_object()) throw std::invalid_argument("field 'energy': must be an object");
        reject_unknown_keys(
            e, {"e_tx", "e_sense", "e_wake", "e_sleep", "e_max", "per_poll_overhead_joules"},
            "energy.");
        cfg.energy.e_tx = field_as<double>(e, "e_tx", cfg.energy.e_tx);
        cfg.energy.e_sense = field_as<double>(e, "e_sense", cfg.energy.e_sense);
        cfg.energy.e_wake = field_as<double>(e, "e_wake", cfg.energy.e_wake);
        cfg.energy.e_sleep = field_as<double>(e, "e_sleep", cfg.energy.e_sleep);
        cfg.energy.e_max = field_as<double>(e, "e_max", cfg.energy.e_max);
        if (e.contains("per_poll_overhead_joules"))
            cfg.energy.per_poll_overhead_joules =
                field_as<double>(e, "per_poll_overhead_joules", 0.0);
    }
    if (j.contains("quadrature")) {
        const json& q = j.at("quadrature");
        if (!q.is_object()) throw std::invalid_argument("field 'quadrature': must be an object");
        reject_unknown_keys(q, {"half_width_sigmas", "abs_tol", "rel_tol", "max_subdivisions"},
                            "quadrature.");
        cfg.quad.half_width_sigmas =
            field_as<double>(q, "half_width_sigmas", cfg.quad.half_width_sigmas);
        cfg.quad.abs_tol = field_as<double>(q, "abs_tol", cfg.quad.abs_tol);
        cfg.quad.rel_tol = field_as<double>(q, "rel_tol", cfg.quad.rel_tol);
        cfg.quad.max_subdivisions =
            field_as<int>(q, "max_subdivisions", cfg.quad.max_subdivisions);
    }

    validate_resolved(cfg);
    return cfg;
}

json config_to_json(const ResolvedConfig& cfg) {
    nlohmann::ordered_json j;
    j["system"] = cfg.system;
    j["n_sensors"] = cfg.n_sensors;
    j["protocol"] = cfg.protocol;
    j["episodes"] = cfg.episodes;
    j["steps"] = cfg.steps;
    j["polls_per_step"] = cfg.polls_per_step;
    j["theta_multipliers"] = cfg.theta_multipliers;
    nlohmann::ordered_json e;
    e["e_tx"] = cfg.energy.e_tx;
    e["e_sense"] = cfg.energy.e_sense;
    e["e_wake"] = cfg.energy.e_wake;
    e["e_sleep"] = cfg.energy.e_sleep;
    e["e_max"] = cfg.energy.e_max;
    if (cfg.energy.per_poll_overhead_joules)
        e["per_poll_overhead_joules"] = *cfg.energy.per_poll_overhead_joules;
    j["energy"] = e;
    nlohmann::ordered_json q;
    q["half_width_sigmas"] = cfg.quad.half_width_sigmas;
    q["abs_tol"] = cfg.quad.abs_tol;
    q["rel_tol"] = cfg.quad.rel_tol;
    q["max_subdivisions"] = cfg.quad.max_subdivisions;
    j["quadrature"] = q;
    j["base_seed"] = cfg.base_seed;
    return j;
}

std::vector<ExperimentConfig> build_grid(const ResolvedConfig& cfg) {
    std::vector<ExperimentConfig> grid;
    const auto add = [&](Protocol p, int m, double theta) {
        ExperimentConfig c;
        c.system = cfg.system;
        c.n_sensors = cfg.n_sensors;
        c.protocol = p;
        c.episodes = cfg.episodes;
        c.steps = cfg.steps;
        c.polls_per_step = m;
        c.theta_multiplier = theta;
        c.energy = cfg.energy;
        c.quad = cfg.quad;
        c.base_seed = cfg.base_seed;
        c.config_index = static_cast<int>(grid.size());
        grid.push_back(std::move(c));
    };
    if (cfg.protocol == "id" || cfg.protocol == "both")
        for (int m : cfg.polls_per_step) add(Protocol::IdBased, m, 0.0);
    if (cfg.protocol == "content" || cfg.protocol == "both")
        for (int m : cfg.polls_per_step)
            for (double theta : cfg.theta_multipliers) add(Protocol::ContentBased, m, theta);
    return grid;
}

RunManifest parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not found: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    RunManifest manifest;
    manifest.config_path = path;
    manifest.version = kVersion;
    manifest.config = config_from_json(j);
    manifest.base_seed = manifest.config.base_seed;
    manifest.grid = build_grid(manifest.config);
    return manifest;
}

void emit_results(const RunManifest& manifest, const std::vector<ParetoPoint>& points,
                  double wall_clock_seconds) {
    if (points.empty()) throw std::invalid_argument("emit_results: no points");
    fs::create_directories(manifest.out_dir);

    std::vector<ParetoPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        return std::make_tuple(std::string(protocol_name(a.protocol)), a.polls_per_step,
                               a.theta_multiplier) <
               std::make_tuple(std::string(protocol_name(b.protocol)), b.polls_per_step,
                               b.theta_multiplier);
    });

    const auto open = [&](const char* name) {
        std::ofstream out(fs::path(manifest.out_dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error(std::string("cannot open output file ") + name);
        return out;
    };

    {
        std::ofstream out = open("pareto.csv");
        out << "protocol,M,theta_mult,mse,lifetime_years\n";
        for (const auto& p : sorted)
            out << protocol_name(p.protocol) << ',' << p.polls_per_step << ','
                << fmt_double(p.theta_multiplier) << ',' << fmt_double(p.mean_mse) << ','
                << fmt_double(p.mean_lifetime_years) << '\n';
    }
    {
        std::ofstream out = open("mse_cdf.csv");
        out << "protocol,M,theta_mult,episode,episode_mse\n";
        for (const auto& p : sorted)
            for (size_t e = 0; e < p.episode_mse.size(); ++e)
                out << protocol_name(p.protocol) << ',' << p.polls_per_step << ','
                    << fmt_double(p.theta_multiplier) << ',' << e + 1 << ','
                    << fmt_double(p.episode_mse[e]) << '\n';
    }
    {
        std::ofstream out = open("polling_freq.csv");
        out << "protocol,M,theta_mult,sensor,poll_freq,tx_freq\n";
        for (const auto& p : sorted)
            for (size_t s = 0; s < p.poll_freq.size(); ++s)
                out << protocol_name(p.protocol) << ',' << p.polls_per_step << ','
                    << fmt_double(p.theta_multiplier) << ',' << s + 1 << ','
                    << fmt_double(p.poll_freq[s]) << ',' << fmt_double(p.tx_freq[s]) << '\n';
    }
    {
        nlohmann::ordered_json j;
        j["tool"] = kToolName;
        j["version"] = manifest.version;
        j["config_path"] = manifest.config_path;
        j["base_seed"] = manifest.base_seed;
        j["wall_clock_seconds"] = wall_clock_seconds;
        j["config"] = config_to_json(manifest.config);
        nlohmann::ordered_json pts = nlohmann::ordered_json::array();
        for (const auto& p : sorted) {
            nlohmann::ordered_json pj;
            pj["protocol"] = protocol_name(p.protocol);
            pj["M"] = p.polls_per_step;
            pj["theta_mult"] = p.theta_multiplier;
            pj["mse"] = p.mean_mse;
            pj["lifetime_years"] = p.mean_lifetime_years;
            pts.push_back(pj);
        }
        j["points"] = pts;
        std::ofstream out = open("summary.json");
        out << j.dump(2) << '\n';
    }
}

int run_oracle_suite() {
    int failures = 0;
    const auto report = [&](const std::string& name, double implemented, double reference,
                            double tolerance) {
        const double diff = std::abs(implemented - reference);
        const bool ok = diff <= tolerance;
        if (!ok) ++failures;
        std::printf("[%s] %-46s impl=%.8g  oracle=%.8g  |diff|=%.3g  tol=%.3g\n",
                    ok ? " ok " : "FAIL", name.c_str(), implemented, reference, diff, tolerance);
    };

    // Silent probability: closed form vs frequency Monte Carlo.
    {
        RandomStream rng(814204);
        const auto spec = build_benchmark(Benchmark::System1, 2);
        FilterBelief b = make_initial_belief(2);
        const double closed = silent_probability(b, spec, CensorSpec{0, 1.0});
        const auto mc = oracle::silent_probability_mc(1.0, 1.0, 1.0, 2000000, rng);
        report("silent probability (P=1, R=1, theta=1)", closed, mc.value, 4.0 * mc.std_error);
    }

    // Censored variance: quadrature vs rejection Monte Carlo.
    QuadratureConfig quad;
    for (const auto& [p, r, theta] : {std::tuple{1.0, 1.0, 1.0}, std::tuple{2.0, 0.5, 1.5},
                                      std::tuple{0.5, 3.0, 0.8}}) {
        RandomStream rng(550 + static_cast<std::uint64_t>(100 * theta));
        const auto m = censored_moments(p, r, theta, quad);
        const double v = m.second_moment / m.normalizer;
        const auto mc = oracle::censored_variance_mc(p, r, theta, 2000000, rng);
        std::ostringstream name;
        name << "censored variance (P=" << p << ", R=" << r << ", theta=" << theta << ")";
        report(name.str(), v, mc.value, 4.0 * mc.std_error);
    }

    // Near-exact sensing limit vs the closed-form truncated normal.
    {
        const auto m = censored_moments(1.0, 1e-12, 1.0, quad);
        report("censored variance, R -> 0 limit", m.second_moment / m.normalizer,
               oracle::truncated_normal_variance(1.0), 1e-4);
    }

    // No-packet mixture vs the joint silence/loss Monte Carlo. The mixture
    // keeps the prior on the loss branch, while a realized loss implies the
    // reading was outside the band, so the exact conditional variance sits
    // eps * p(xi) * (P - V) / p(chi) above it; compare after that shift.
    {
        RandomStream rng(99173);
        const double eps = 0.04;
        const auto spec = build_benchmark(Benchmark::System1, 2);
        FilterBelief b = make_initial_belief(2);
        const CensorSpec censor{0, 1.0};
        const auto post = update_no_packet(b, spec, censor, eps, quad);
        const double p_xi = silent_probability(b, spec, censor);
        const double p_chi = eps + (1.0 - eps) * p_xi;
        const auto m = censored_moments(1.0, 1.0, 1.0, quad);
        const double v = m.second_moment / m.normalizer;
        const double exact = post.P_cov(0, 0) + eps * p_xi * (1.0 - v) / p_chi;
        const auto mc = oracle::no_packet_variance_mc(1.0, 1.0, 1.0, eps, 2000000, rng);
        report("no-packet variance + loss-branch shift", exact, mc.value, 4.0 * mc.std_error);
    }

    // Long-run state covariance vs the Lyapunov fixed point.
    {
        const auto spec = build_benchmark(Benchmark::System1, 50);
        const Eigen::MatrixXd target = oracle::lyapunov_fixed_point(spec.A, spec.Q);
        RandomStream rng(41);
        ProcessState state{Eigen::VectorXd::Zero(50), 0};
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(50, 50);
        const int kSteps = 100000;
        for (int k = 0; k < kSteps; ++k) {
            state = step_process(state, spec, rng);
            acc.noalias() += state.x * state.x.transpose();
        }
        acc /= kSteps;
        const double rel = (acc - target).norm() / target.norm();
        report("process covariance, Frobenius rel. error", rel, 0.0, 0.10);
    }

    // Full-polling steady state vs the Riccati fixed point.
    {
        auto spec = build_benchmark(Benchmark::System1, 50);
        spec = make_system_spec(spec.A, spec.H, spec.Q, spec.R, Eigen::VectorXd::Zero(50));
        const Eigen::MatrixXd pss =
            oracle::riccati_all_sensors_fixed_point(spec.A, spec.Q, spec.R);
        ExperimentConfig cfg;
        cfg.inline_system = spec;
        cfg.protocol = Protocol::IdBased;
        cfg.episodes = 2;
        cfg.steps = 500;
        cfg.polls_per_step = 50;
        cfg.base_seed = 7;
        double sum = 0.0;
        for (int e = 0; e < cfg.episodes; ++e)
            sum += run_episode(cfg, spec, e).sum_squared_error;
        const double mse = sum / (cfg.episodes * static_cast<double>(cfg.steps) * 50);
        report("full-polling MSE vs Riccati trace/N", mse, pss.trace() / 50, 0.10 * pss.trace() / 50);
    }

    std::printf("%s\n", failures == 0 ? "oracle suite: all comparisons within bounds"
                                      : "oracle suite: some comparisons out of bounds");
    return failures == 0 ? 0 : 2;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"content-based wake-up radio monitoring simulator"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

    std::string config_path;
    std::string out_dir = "out";
    std::string protocol;
    std::uint64_t seed = 0;
    int episodes = 0;
    int steps = 0;
    int jobs = 1;
    bool oracle_mode = false;

    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "override base_seed");
    app.add_option("--protocol", protocol, "id|content|both (overrides config)")
        ->check(CLI::IsMember({"id", "content", "both"}));
    app.add_option("--episodes", episodes, "override episode count")->check(CLI::PositiveNumber);
    app.add_option("--steps", steps, "override steps per episode")->check(CLI::PositiveNumber);
    app.add_option("--jobs", jobs, "parallel episode workers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--oracle", oracle_mode, "run the Monte Carlo / fixed-point oracle suite");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (oracle_mode) {
        try {
            return run_oracle_suite();
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }

    if (config_path.empty()) {
        std::cerr << "error: --config is required\n\n" << app.help();
        return 1;
    }

    RunManifest manifest;
    try {
        manifest = parse_config(config_path);
        if (*seed_opt) manifest.config.base_seed = seed;
        if (!protocol.empty()) manifest.config.protocol = protocol;
        if (episodes > 0) manifest.config.episodes = episodes;
        if (steps > 0) manifest.config.steps = steps;
        validate_resolved(manifest.config);
        manifest.out_dir = out_dir;
        manifest.base_seed = manifest.config.base_seed;
        manifest.grid = build_grid(manifest.config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const auto t0 = std::chrono::steady_clock::now();
        const auto points = sweep(manifest.grid, jobs);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit_results(manifest, points, wall);
        std::cout << "wrote " << manifest.out_dir << "/{pareto.csv, mse_cdf.csv, "
                  << "polling_freq.csv, summary.json} (" << points.size() << " points)\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace wursim
