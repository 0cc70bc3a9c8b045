// Greedy value-of-information poll scheduling: pick the sensor whose poll
// gives the largest expected drop in the estimation-error trace, accounting
// for the chance that the update is censored or lost.
#pragma once

#include <set>

#include "wursim/estimator.hpp"
#include "wursim/network_energy.hpp"
#include "wursim/quadrature.hpp"

namespace wursim {

struct ScheduleContext {
    FilterBelief belief; // current, after any earlier polls this step
    std::set<int> already_polled;
    double theta_multiplier = 0.0; // c_theta; theta = c_theta * sqrt(P_nn)
};

struct SensorScore {
    int sensor = 0;
    double expected_trace_reduction = 0.0;
};

/// Expected trace reduction of polling sensor n:
///   trace(P) - p(chi) trace(P | no packet) - (1 - p(chi)) trace(P | update).
/// ContentBased evaluates the censoring band theta = c_theta * sqrt(P_nn);
/// IdBased uses theta = 0, so p(chi) = epsilon_n.
SensorScore score_sensor(const ScheduleContext& ctx, const SystemSpec& spec, int sensor,
                         Protocol protocol, const QuadratureConfig& quad);

/// Argmax of score_sensor over sensors not yet polled this step; ties go to
/// the lowest index.
int select_next(const ScheduleContext& ctx, const SystemSpec& spec, Protocol protocol,
                const QuadratureConfig& quad);

} // namespace wursim
