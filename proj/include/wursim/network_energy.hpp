// Poll/response exchange over a packet-erasure channel plus per-sensor
// energy accounting for the two wake-up protocols.
//
// Loss strikes the uplink: a polled sensor always hears the wake-up, pays
// the wake/sense cost and, if it decides to transmit, the transmit cost,
// whether or not the gateway decodes the packet.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wursim/rng.hpp"
#include "wursim/system_model.hpp"

namespace wursim {

enum class Protocol { IdBased, ContentBased };

const char* protocol_name(Protocol p); // "id" | "content"
Protocol protocol_from_name(const std::string& name);

struct EnergyParams {
    double e_tx = 0.05;     // J per uplink transmission
    double e_sense = 0.01;  // J per measurement
    double e_wake = 0.01;   // J per wake-up message reception
    double e_sleep = 0.001; // J per idle timestep
    double e_max = 162000.0; // battery capacity, J
    // When set, each polled timestep costs this flat amount instead of the
    // transmit/sense/wake terms (the 60 mJ per-polled-step convention).
    std::optional<double> per_poll_overhead_joules;
};

enum class PollResult { Delivered, Lost, Silent };

struct PollOutcome {
    PollResult kind = PollResult::Lost;
    int sensor = 0;
    double value = 0.0; // meaningful only when Delivered
    bool transmitted = false;
};

/// Per-sensor poll / transmission counters over a run.
struct EnergyLedger {
    std::vector<long> polls;
    std::vector<long> transmissions;
    long total_steps = 0;

    explicit EnergyLedger(int n_sensors = 0)
        : polls(n_sensors, 0), transmissions(n_sensors, 0) {}
};

/// One poll of sensor n holding measurement y_n against thresholds
/// x_hat_n +/- theta. ContentBased: silent inside the closed band (no
/// erasure draw); otherwise the sensor transmits and the uplink erases with
/// probability epsilon_n. IdBased always transmits. Consumes one uniform
/// draw iff a transmission happens.
PollOutcome simulate_poll(Protocol protocol, const SystemSpec& spec, int sensor, double y_n,
                          double x_hat_n, double theta, RandomStream& rng);

/// Advances the ledger one timestep: every sensor ages, polled sensors gain
/// a poll, outcomes with transmitted = true gain a transmission (Delivered
/// and Lost both cost energy at the sensor).
EnergyLedger charge_step(EnergyLedger ledger, const std::vector<int>& polled,
                         const std::vector<PollOutcome>& outcomes);

struct LifetimeReport {
    std::vector<double> per_sensor_years;
    double network_years = 0.0;
};

/// Battery lifetime from the ledger's duty fractions. Mean power per
/// 1-second timestep is f_t*E_t + f_w*(E_s + c*E_w) + (1 - f_w)*E_0 with
/// c = 3 for ContentBased and c = 1 for IdBased; a year is 365 days.
LifetimeReport lifetime(const EnergyLedger& ledger, const EnergyParams& params,
                        Protocol protocol);

} // namespace wursim
