#include "wursim/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "wursim/gaussian.hpp"

namespace wursim {

namespace {

constexpr double kMinSilentProbability = 1e-14;

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

void check_sensor(const SystemSpec& spec, int sensor) {
    if (sensor < 0 || sensor >= spec.n_sensors)
        throw std::out_of_range("sensor index out of range");
}

void require_identity_observation(const SystemSpec& spec, const char* op) {
    if (!spec.h_is_identity())
        throw std::invalid_argument(std::string(op) +
                                    " requires an identity observation matrix");
}

/// P(|z + w| <= theta | z), w ~ N(0, r); the censoring kernel of the
/// conditional density. r = 0 degenerates to the indicator of |z| <= theta.
double silence_kernel(double z, double theta, double sqrt_r) {
    if (sqrt_r <= 0.0) return std::abs(z) <= theta ? 1.0 : 0.0;
    return normal_cdf((theta - z) / sqrt_r) - normal_cdf((-theta - z) / sqrt_r);
}

} // namespace

FilterBelief make_initial_belief(int state_dim) {
    if (state_dim <= 0) throw std::invalid_argument("state dimension must be positive");
    FilterBelief b;
    b.x_hat = Eigen::VectorXd::Zero(state_dim);
    b.P_cov = Eigen::MatrixXd::Identity(state_dim, state_dim);
    b.step_index = 0;
    return b;
}

FilterBelief predict(const FilterBelief& belief, const SystemSpec& spec) {
    if (belief.x_hat.size() != spec.state_dim)
        throw std::invalid_argument("predict: belief dimension mismatch");
    FilterBelief next;
    next.x_hat = spec.A * belief.x_hat;
    next.P_cov = spec.A * belief.P_cov * spec.A.transpose() + spec.Q;
    symmetrize(next.P_cov);
    next.step_index = belief.step_index + 1;
    return next;
}

double innovation_variance(const FilterBelief& belief, const SystemSpec& spec, int sensor) {
    check_sensor(spec, sensor);
    const Eigen::RowVectorXd h = spec.H.row(sensor);
    return h * belief.P_cov * h.transpose() + spec.R(sensor, sensor);
}

FilterBelief update_received(const FilterBelief& belief, const SystemSpec& spec, int sensor,
                             double y_n) {
    const double s_nn = innovation_variance(belief, spec, sensor);
    if (!(s_nn > 0.0))
        throw std::domain_error("update_received: innovation variance is not positive");

    const Eigen::VectorXd gain = belief.P_cov * spec.H.row(sensor).transpose() / s_nn;
    const double innovation = y_n - spec.H.row(sensor).dot(belief.x_hat);

    FilterBelief next;
    next.x_hat = belief.x_hat + gain * innovation;
    next.P_cov = belief.P_cov - gain * (spec.H.row(sensor) * belief.P_cov);
    symmetrize(next.P_cov);
    next.step_index = belief.step_index;
    return next;
}

double silent_probability(const FilterBelief& belief, const SystemSpec& spec,
                          const CensorSpec& censor) {
    require_identity_observation(spec, "silent_probability");
    check_sensor(spec, censor.sensor);
    if (censor.theta < 0.0) throw std::invalid_argument("theta must be nonnegative");
    if (censor.theta == 0.0) return 0.0;
    const double variance =
        belief.P_cov(censor.sensor, censor.sensor) + spec.R(censor.sensor, censor.sensor);
    if (!(variance > 0.0))
        throw std::domain_error("silent_probability: predictive variance is not positive");
    return centered_interval_mass(censor.theta, std::sqrt(variance));
}

NoUpdateProbabilities no_update_probabilities(double p_silent, double epsilon_n) {
    if (!(p_silent >= 0.0 && p_silent <= 1.0))
        throw std::invalid_argument("p_silent outside [0,1]");
    if (!(epsilon_n >= 0.0 && epsilon_n <= 1.0))
        throw std::invalid_argument("epsilon outside [0,1]");
    NoUpdateProbabilities probs;
    probs.p_silent = p_silent;
    probs.p_no_update = epsilon_n + (1.0 - epsilon_n) * p_silent;
    const double denom = p_silent + (1.0 - p_silent) * epsilon_n;
    probs.p_silent_given_no_update = denom > 0.0 ? p_silent / denom : 0.0;
    return probs;
}

CensoredMoments censored_moments(double p_nn, double r_nn, double theta,
                                 const QuadratureConfig& quad) {
    if (!(p_nn > 0.0)) throw std::domain_error("censored_moments: P_nn must be positive");
    if (!(theta > 0.0)) throw std::domain_error("censored_moments: theta must be positive");
    const double sigma = std::sqrt(p_nn);
    const double sqrt_r = std::sqrt(std::max(r_nn, 0.0));
    if (sqrt_r == 0.0) {
        // Noiseless sensing censors exactly on |z| <= theta; the truncated
        // Gaussian moments are closed-form and the kernel jump would defeat
        // the quadrature.
        const double a = theta / sigma;
        const double mass = std::erf(a / kSqrt2);
        const double m2 = p_nn * (mass - 2.0 * a * normal_pdf(a));
        return CensoredMoments{mass, m2};
    }
    const double inv_sigma = 1.0 / sigma;
    const auto integrand = [&](double z) -> std::array<double, 2> {
        const double g =
            inv_sigma * normal_pdf(z * inv_sigma) * silence_kernel(z, theta, sqrt_r);
        return {g, z * z * g};
    };
    // The integrand is even in z, so integrate the right half and double.
    const auto half =
        adaptive_simpson_pair(integrand, 0.0, quad.half_width_sigmas * sigma,
                              0.5 * quad.abs_tol, quad.rel_tol, quad.max_subdivisions);
    return CensoredMoments{2.0 * half[0], 2.0 * half[1]};
}

Eigen::MatrixXd censored_covariance(const FilterBelief& belief, const SystemSpec& spec,
                                    const CensorSpec& censor, const QuadratureConfig& quad) {
    require_identity_observation(spec, "censored_covariance");
    check_sensor(spec, censor.sensor);
    if (!(censor.theta > 0.0))
        throw std::invalid_argument("censored_covariance: theta must be positive");
    const int n = censor.sensor;
    const double p_nn = belief.P_cov(n, n);
    if (!(p_nn > 0.0))
        throw std::domain_error("censored_covariance: prior variance is not positive");
    if (silent_probability(belief, spec, censor) < kMinSilentProbability)
        throw std::domain_error("censored_covariance: silent probability below 1e-14");

    const auto moments = censored_moments(p_nn, spec.R(n, n), censor.theta, quad);
    if (!(moments.normalizer > 0.0))
        throw QuadratureError("censored_covariance: quadrature normalizer vanished");
    const double v = std::min(moments.second_moment / moments.normalizer, p_nn);

    const Eigen::VectorXd col = belief.P_cov.col(n);
    Eigen::MatrixXd post =
        belief.P_cov - ((1.0 - v / p_nn) / p_nn) * (col * col.transpose());
    symmetrize(post);
    return post;
}

double censored_variance_upper_bound(const FilterBelief& belief, const SystemSpec& spec,
                                     const CensorSpec& censor) {
    require_identity_observation(spec, "censored_variance_upper_bound");
    check_sensor(spec, censor.sensor);
    if (!(censor.theta > 0.0))
        throw std::invalid_argument("censored_variance_upper_bound: theta must be positive");
    const int n = censor.sensor;
    const double p_nn = belief.P_cov(n, n);
    const double r_nn = spec.R(n, n);
    if (!(p_nn > 0.0))
        throw std::domain_error("censored_variance_upper_bound: prior variance not positive");
    if (!(r_nn > 0.0))
        throw std::domain_error(
            "censored_variance_upper_bound: requires positive measurement noise");
    const double p_xi = silent_probability(belief, spec, censor);
    if (p_xi < kMinSilentProbability)
        throw std::domain_error("censored_variance_upper_bound: silent probability below 1e-14");

    const double sqrt_r = std::sqrt(r_nn);
    const double theta = censor.theta;

    // Order-9 Taylor polynomial of erf(u / sqrt(2)); overestimates for u > 0
    // within the alternating regime, which is what makes the bound one-sided.
    const auto erf_taylor = [](double u) {
        const double u2 = u * u;
        return 0.79788456080286535588 // sqrt(2/pi)
               * u * (1.0 + u2 * (-1.0 / 6.0 + u2 * (1.0 / 40.0 + u2 * (-1.0 / 336.0 + u2 / 3456.0))));
    };
    const auto kernel_taylor = [&](double z) {
        return 0.5 * (erf_taylor((theta - z) / sqrt_r) - erf_taylor((-theta - z) / sqrt_r));
    };

    // Tail |z| > 1: kernel bounded by its value at the split point, times the
    // exact tail z^2 mass of N(0, P_nn).
    const double kernel_bound =
        normal_cdf((-1.0 - theta) / sqrt_r) + normal_cdf((theta - 1.0) / sqrt_r);
    const double a = 1.0 / std::sqrt(p_nn);
    const double tail_mass_ratio = a * normal_pdf(a) + normal_cdf(-a); // of z^2/P_nn
    const double tail_term = 2.0 * kernel_bound * tail_mass_ratio / p_xi;

    // Central |z| <= 1 with the Taylor kernel; fixed composite Simpson on the
    // even integrand.
    const double sigma = std::sqrt(p_nn);
    const auto central_integrand = [&](double z) {
        return z * z * normal_pdf(z / sigma) / sigma * kernel_taylor(z);
    };
    const int steps = 1000;
    const double h = 1.0 / steps;
    double central = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double z0 = i * h;
        central += h / 6.0 *
                   (central_integrand(z0) + 4.0 * central_integrand(z0 + 0.5 * h) +
                    central_integrand(z0 + h));
    }
    central *= 2.0; // even symmetry
    const double central_term = central / (p_nn * p_xi);

    return tail_term + central_term;
}

FilterBelief update_no_packet(const FilterBelief& belief, const SystemSpec& spec,
                              const CensorSpec& censor, double epsilon_n,
                              const QuadratureConfig& quad) {
    check_sensor(spec, censor.sensor);
    if (censor.theta < 0.0) throw std::invalid_argument("theta must be nonnegative");
    const double p_xi =
        censor.theta > 0.0 ? silent_probability(belief, spec, censor) : 0.0;
    const auto probs = no_update_probabilities(p_xi, epsilon_n);

    FilterBelief next = belief;
    if (probs.p_silent_given_no_update > 0.0) {
        const Eigen::MatrixXd censored = censored_covariance(belief, spec, censor, quad);
        next.P_cov = probs.p_silent_given_no_update * censored +
                     (1.0 - probs.p_silent_given_no_update) * belief.P_cov;
    }
    symmetrize(next.P_cov);
    return next;
}

} // namespace wursim
