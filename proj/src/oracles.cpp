#include "wursim/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "wursim/gaussian.hpp"

namespace wursim::oracle {

McEstimate censored_variance_mc(double p_nn, double r_nn, double theta, long total_draws,
                                RandomStream& rng) {
    const double sp = std::sqrt(p_nn);
    const double sr = std::sqrt(r_nn);
    double m2 = 0.0, m4 = 0.0;
    long kept = 0;
    for (long i = 0; i < total_draws; ++i) {
        const double z = sp * rng.gaussian();
        const double w = sr * rng.gaussian();
        if (std::abs(z + w) <= theta) {
            const double z2 = z * z;
            m2 += z2;
            m4 += z2 * z2;
            ++kept;
        }
    }
    if (kept < 100)
        throw std::runtime_error("censored_variance_mc: too few accepted samples");
    m2 /= kept;
    m4 /= kept;
    McEstimate est;
    est.value = m2;
    est.std_error = std::sqrt(std::max(m4 - m2 * m2, 0.0) / kept);
    est.samples = kept;
    return est;
}

McEstimate no_packet_variance_mc(double p_nn, double r_nn, double theta, double epsilon,
                                 long total_draws, RandomStream& rng) {
    const double sp = std::sqrt(p_nn);
    const double sr = std::sqrt(r_nn);
    double m2 = 0.0, m4 = 0.0;
    long kept = 0;
    for (long i = 0; i < total_draws; ++i) {
        const double z = sp * rng.gaussian();
        const double w = sr * rng.gaussian();
        const bool silent = std::abs(z + w) <= theta;
        const bool no_packet = silent || rng.bernoulli(epsilon);
        if (no_packet) {
            const double z2 = z * z;
            m2 += z2;
            m4 += z2 * z2;
            ++kept;
        }
    }
    if (kept < 100)
        throw std::runtime_error("no_packet_variance_mc: too few accepted samples");
    m2 /= kept;
    m4 /= kept;
    McEstimate est;
    est.value = m2;
    est.std_error = std::sqrt(std::max(m4 - m2 * m2, 0.0) / kept);
    est.samples = kept;
    return est;
}

McEstimate silent_probability_mc(double p_nn, double r_nn, double theta, long draws,
                                 RandomStream& rng) {
    const double sp = std::sqrt(p_nn);
    const double sr = std::sqrt(r_nn);
    long hits = 0;
    for (long i = 0; i < draws; ++i) {
        const double z = sp * rng.gaussian();
        const double w = sr * rng.gaussian();
        if (std::abs(z + w) <= theta) ++hits;
    }
    McEstimate est;
    est.value = static_cast<double>(hits) / draws;
    est.std_error = std::sqrt(est.value * (1.0 - est.value) / draws);
    est.samples = draws;
    return est;
}

double truncated_normal_variance(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("truncation half-width must be positive");
    const double mass = 2.0 * normal_cdf(c) - 1.0;
    return 1.0 - 2.0 * c * normal_pdf(c) / mass;
}

Eigen::MatrixXd lyapunov_fixed_point(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                     double tol, int max_iter) {
    Eigen::MatrixXd c = Q;
    for (int i = 0; i < max_iter; ++i) {
        Eigen::MatrixXd next = A * c * A.transpose() + Q;
        const double diff = (next - c).cwiseAbs().maxCoeff();
        c = std::move(next);
        if (diff <= tol * std::max(1.0, c.cwiseAbs().maxCoeff())) return c;
    }
    throw std::runtime_error("lyapunov_fixed_point: no convergence");
}

Eigen::MatrixXd riccati_all_sensors_fixed_point(const Eigen::MatrixXd& A,
                                                const Eigen::MatrixXd& Q,
                                                const Eigen::MatrixXd& R, double tol,
                                                int max_iter) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < max_iter; ++i) {
        Eigen::MatrixXd next = A * p * A.transpose() + Q;
        for (int s = 0; s < n; ++s) {
            const Eigen::VectorXd col = next.col(s);
            const double innovation = col(s) + R(s, s);
            if (innovation > 0.0) next -= (col * col.transpose()) / innovation;
        }
        next = 0.5 * (next + next.transpose()).eval();
        const double diff = (next - p).cwiseAbs().maxCoeff();
        p = std::move(next);
        if (diff <= tol * std::max(1.0, p.cwiseAbs().maxCoeff())) return p;
    }
    throw std::runtime_error("riccati_all_sensors_fixed_point: no convergence");
}

} // namespace wursim::oracle
