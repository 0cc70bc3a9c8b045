#include "wursim/voi_scheduler.hpp"

#include <cmath>
#include <stdexcept>

namespace wursim {

SensorScore score_sensor(const ScheduleContext& ctx, const SystemSpec& spec, int sensor,
                         Protocol protocol, const QuadratureConfig& quad) {
    if (sensor < 0 || sensor >= spec.n_sensors)
        throw std::out_of_range("score_sensor: sensor index out of range");
    if (ctx.already_polled.count(sensor))
        throw std::invalid_argument("score_sensor: sensor was already polled this step");
    if (protocol == Protocol::ContentBased && !spec.h_is_identity())
        throw std::invalid_argument("score_sensor: content-based scoring requires H = I");

    const Eigen::MatrixXd& P = ctx.belief.P_cov;

    // Expected trace drop if the update arrives (Kalman update, any H).
    const Eigen::VectorXd p_col = spec.h_is_identity()
                                      ? Eigen::VectorXd(P.col(sensor))
                                      : Eigen::VectorXd(P * spec.H.row(sensor).transpose());
    const double s_nn = (spec.h_is_identity() ? p_col(sensor)
                                              : spec.H.row(sensor).dot(p_col)) +
                        spec.R(sensor, sensor);
    const double delivered_reduction = s_nn > 0.0 ? p_col.squaredNorm() / s_nn : 0.0;

    double theta = 0.0;
    if (protocol == Protocol::ContentBased) {
        const double p_nn = P(sensor, sensor);
        theta = ctx.theta_multiplier * std::sqrt(std::max(p_nn, 0.0));
    }

    double p_silent = 0.0;
    double silent_reduction = 0.0;
    if (theta > 0.0) {
        p_silent = silent_probability(ctx.belief, spec, CensorSpec{sensor, theta});
        if (p_silent >= 1e-14) {
            const double p_nn = P(sensor, sensor);
            const auto moments = censored_moments(p_nn, spec.R(sensor, sensor), theta, quad);
            const double v = std::min(moments.second_moment / moments.normalizer, p_nn);
            // Trace drop of the censored posterior: rank-1 downdate along col n.
            silent_reduction = (1.0 - v / p_nn) / p_nn * P.col(sensor).squaredNorm();
        } else {
            p_silent = 0.0;
        }
    }

    const auto probs = no_update_probabilities(p_silent, spec.epsilon(sensor));

    SensorScore score;
    score.sensor = sensor;
    score.expected_trace_reduction =
        probs.p_no_update * probs.p_silent_given_no_update * silent_reduction +
        (1.0 - probs.p_no_update) * delivered_reduction;
    return score;
}

int select_next(const ScheduleContext& ctx, const SystemSpec& spec, Protocol protocol,
                const QuadratureConfig& quad) {
    int best = -1;
    double best_score = 0.0;
    for (int n = 0; n < spec.n_sensors; ++n) {
        if (ctx.already_polled.count(n)) continue;
        const double s = score_sensor(ctx, spec, n, protocol, quad).expected_trace_reduction;
        if (best < 0 || s > best_score) {
            best = n;
            best_score = s;
        }
    }
    if (best < 0) throw std::invalid_argument("select_next: no candidate sensors remain");
    return best;
}

} // namespace wursim
