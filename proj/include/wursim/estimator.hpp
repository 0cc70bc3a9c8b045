// Gateway-side Kalman tracker with censored (silence-aware) updates.
//
// The content-based wake-up protocol makes a polled sensor stay silent when
// its reading lies within theta of the gateway's estimate. Silence is
// therefore informative: conditioned on it, the error covariance of the
// polled sensor shrinks by a factor that has no closed form and is computed
// by adaptive quadrature. All operations are pure: belief in, new belief out.
#pragma once

#include <Eigen/Dense>

#include "wursim/quadrature.hpp"
#include "wursim/system_model.hpp"

namespace wursim {

struct FilterBelief {
    Eigen::VectorXd x_hat;
    Eigen::MatrixXd P_cov;
    long step_index = 0;
};

/// x_hat = 0, P = I.
FilterBelief make_initial_belief(int state_dim);

/// Silence band for one polled sensor: the sensor transmits iff
/// |y_n - x_hat_n| > theta, i.e. the thresholds are x_hat_n -/+ theta.
struct CensorSpec {
    int sensor = 0; // 0-based
    double theta = 0.0;
};

struct NoUpdateProbabilities {
    double p_silent = 0.0;               // p(xi)
    double p_silent_given_no_update = 0.0; // p(xi | chi)
    double p_no_update = 0.0;            // p(chi)
};

/// x_hat <- A x_hat, P <- A P A^T + Q (symmetrized), step_index + 1.
FilterBelief predict(const FilterBelief& belief, const SystemSpec& spec);

/// S_{n,n} = (H P H^T + R)_{n,n} for 0-based sensor n.
double innovation_variance(const FilterBelief& belief, const SystemSpec& spec, int sensor);

/// Scalar Kalman update with measurement y_n from sensor n.
FilterBelief update_received(const FilterBelief& belief, const SystemSpec& spec, int sensor,
                             double y_n);

/// Probability that the polled sensor stays silent: the mass of
/// [x_hat_n - theta, x_hat_n + theta] under the predictive distribution of
/// y_n, i.e. 2*Phi(theta / sqrt(P_nn + R_nn)) - 1. Requires H = I.
double silent_probability(const FilterBelief& belief, const SystemSpec& spec,
                          const CensorSpec& censor);

/// p(xi|chi) = p(xi) / (p(xi) + (1-p(xi)) eps) and p(chi) = eps + (1-eps) p(xi).
/// When both p(xi) and eps are zero (no update impossible), p(xi|chi) := 0.
NoUpdateProbabilities no_update_probabilities(double p_silent, double epsilon_n);

/// Normalizer and second moment of the unnormalized silent-conditional error
/// density  pdf(z; 0, p_nn) * P(|z + w| <= theta), w ~ N(0, r_nn), both from
/// one adaptive-quadrature pass over [-h*sqrt(p_nn), h*sqrt(p_nn)].
struct CensoredMoments {
    double normalizer = 0.0;    // integral of the density numerator; equals p(xi)
    double second_moment = 0.0; // integral of z^2 times the numerator
};
CensoredMoments censored_moments(double p_nn, double r_nn, double theta,
                                 const QuadratureConfig& quad);

/// Full posterior covariance given that sensor n was silent. Row/column n
/// scales by V / P_nn with V the censored variance; all other entries get
/// the law-of-total-covariance correction, which together amount to the
/// rank-1 downdate  P - (1 - V/P_nn)/P_nn * (P e_n)(P e_n)^T.
Eigen::MatrixXd censored_covariance(const FilterBelief& belief, const SystemSpec& spec,
                                    const CensorSpec& censor, const QuadratureConfig& quad);

/// Closed-form-plus-Taylor upper bound on V / P_nn (the censored shrink
/// ratio): tail of |z| > 1 bounded through the monotone Gaussian-cdf bound,
/// central part on [-1, 1] through the order-9 erf Taylor polynomial.
/// The derivation is valid when (theta + 1)/sqrt(R_nn) stays within the
/// polynomial's alternating regime (about 3.4); requires R_nn > 0.
double censored_variance_upper_bound(const FilterBelief& belief, const SystemSpec& spec,
                                     const CensorSpec& censor);

/// Covariance update when no packet arrives: mixture of the censored
/// posterior (sensor was silent) and the prior (packet was lost), weighted
/// by p(xi|chi). The estimate itself is unchanged. theta = 0 degenerates to
/// the identity update (pure loss carries no information).
FilterBelief update_no_packet(const FilterBelief& belief, const SystemSpec& spec,
                              const CensorSpec& censor, double epsilon_n,
                              const QuadratureConfig& quad);

} // namespace wursim
