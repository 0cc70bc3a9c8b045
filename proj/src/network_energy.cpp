#include "wursim/network_energy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wursim {

namespace {

constexpr double kSecondsPerYear = 31536000.0; // 365 days

void check_sensor(const SystemSpec& spec, int sensor) {
    if (sensor < 0 || sensor >= spec.n_sensors)
        throw std::out_of_range("sensor index out of range");
}

} // namespace

const char* protocol_name(Protocol p) {
    return p == Protocol::IdBased ? "id" : "content";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "id") return Protocol::IdBased;
    if (name == "content") return Protocol::ContentBased;
    throw std::invalid_argument("unknown protocol name: " + name);
}

PollOutcome simulate_poll(Protocol protocol, const SystemSpec& spec, int sensor, double y_n,
                          double x_hat_n, double theta, RandomStream& rng) {
    check_sensor(spec, sensor);
    if (theta < 0.0) throw std::invalid_argument("theta must be nonnegative");

    PollOutcome outcome;
    outcome.sensor = sensor;

    if (protocol == Protocol::ContentBased && std::abs(y_n - x_hat_n) <= theta) {
        outcome.kind = PollResult::Silent;
        outcome.transmitted = false;
        return outcome;
    }

    outcome.transmitted = true;
    if (rng.bernoulli(spec.epsilon(sensor))) {
        outcome.kind = PollResult::Lost;
    } else {
        outcome.kind = PollResult::Delivered;
        outcome.value = y_n;
    }
    return outcome;
}

EnergyLedger charge_step(EnergyLedger ledger, const std::vector<int>& polled,
                         const std::vector<PollOutcome>& outcomes) {
    const int n = static_cast<int>(ledger.polls.size());
    if (outcomes.size() != polled.size())
        throw std::invalid_argument("charge_step: outcomes do not match polled set");

    std::vector<char> seen(n, 0);
    for (size_t i = 0; i < polled.size(); ++i) {
        const int s = polled[i];
        if (s < 0 || s >= n) throw std::out_of_range("charge_step: sensor out of range");
        if (seen[s]) throw std::invalid_argument("charge_step: duplicate sensor in polled set");
        if (outcomes[i].sensor != s)
            throw std::invalid_argument("charge_step: outcome sensor mismatch");
        seen[s] = 1;
        ledger.polls[s] += 1;
        if (outcomes[i].transmitted) ledger.transmissions[s] += 1;
    }
    ledger.total_steps += 1;
    return ledger;
}

LifetimeReport lifetime(const EnergyLedger& ledger, const EnergyParams& params,
                        Protocol protocol) {
    if (ledger.total_steps <= 0)
        throw std::invalid_argument("lifetime: ledger has no elapsed timesteps");
    const double wake_count = protocol == Protocol::ContentBased ? 3.0 : 1.0;
    const double steps = static_cast<double>(ledger.total_steps);

    LifetimeReport report;
    report.per_sensor_years.resize(ledger.polls.size());
    double sum = 0.0;
    for (size_t s = 0; s < ledger.polls.size(); ++s) {
        const double f_w = ledger.polls[s] / steps;
        const double f_t = ledger.transmissions[s] / steps;
        double power;
        if (params.per_poll_overhead_joules) {
            power = f_w * *params.per_poll_overhead_joules + (1.0 - f_w) * params.e_sleep;
        } else {
            power = f_t * params.e_tx + f_w * (params.e_sense + wake_count * params.e_wake) +
                    (1.0 - f_w) * params.e_sleep;
        }
        if (!(power > 0.0)) throw std::domain_error("lifetime: mean power is zero");
        report.per_sensor_years[s] = params.e_max / power / kSecondsPerYear;
        sum += report.per_sensor_years[s];
    }
    report.network_years = sum / static_cast<double>(ledger.polls.size());
    return report;
}

} // namespace wursim
