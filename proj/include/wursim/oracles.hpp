// Independent reference computations used to cross-check the estimator and
// harness: brute-force Monte Carlo and fixed-point iterations that share no
// code with the implementation paths they validate.
#pragma once

#include <Eigen/Dense>

#include "wursim/rng.hpp"

namespace wursim::oracle {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long samples = 0; // accepted / used samples
};

/// Rejection Monte Carlo for the censored error variance: draw
/// z ~ N(0, p_nn), w ~ N(0, r_nn) total_draws times, keep z where
/// |z + w| <= theta, report the sample variance of the kept z.
McEstimate censored_variance_mc(double p_nn, double r_nn, double theta, long total_draws,
                                RandomStream& rng);

/// Joint-event oracle for the no-packet covariance: a draw counts when the
/// sensor is silent or when it transmits and the uplink erases (probability
/// epsilon); reports E[z^2 | no packet].
McEstimate no_packet_variance_mc(double p_nn, double r_nn, double theta, double epsilon,
                                 long total_draws, RandomStream& rng);

/// Frequency estimate of Pr(|z + w| <= theta).
McEstimate silent_probability_mc(double p_nn, double r_nn, double theta, long draws,
                                 RandomStream& rng);

/// Variance of the standard normal truncated to [-c, c].
double truncated_normal_variance(double c);

/// Fixed point of C <- A C A^T + Q.
Eigen::MatrixXd lyapunov_fixed_point(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                     double tol = 1e-12, int max_iter = 200000);

/// Steady-state covariance of the per-step recursion that predicts once and
/// then applies the scalar measurement update of every sensor in turn
/// (H = I). Written out directly so it stays independent of the estimator.
Eigen::MatrixXd riccati_all_sensors_fixed_point(const Eigen::MatrixXd& A,
                                                const Eigen::MatrixXd& Q,
                                                const Eigen::MatrixXd& R,
                                                double tol = 1e-12, int max_iter = 200000);

} // namespace wursim::oracle
