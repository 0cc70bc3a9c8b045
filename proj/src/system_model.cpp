#include "wursim/system_model.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace wursim {

namespace {

constexpr double kPsdTol = 1e-9;

void check_symmetric(const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != m.cols())
        throw std::invalid_argument(std::string(name) + " must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kPsdTol * scale)
        throw std::invalid_argument(std::string(name) + " is not symmetric within tolerance");
}

Eigen::VectorXd gaussian_vector(int n, RandomStream& rng) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
    return v;
}

} // namespace

long math_mod(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
    check_symmetric(cov, "covariance");
    const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition of covariance failed");
    Eigen::VectorXd lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) < -kPsdTol * scale)
            throw std::invalid_argument("covariance is indefinite beyond tolerance");
        if (lam(i) < 0.0) lam(i) = 0.0;
    }
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

double spectral_radius(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SystemSpec make_system_spec(Eigen::MatrixXd A, Eigen::MatrixXd H, Eigen::MatrixXd Q,
                            Eigen::MatrixXd R, Eigen::VectorXd epsilon) {
    SystemSpec spec;
    spec.state_dim = static_cast<int>(A.rows());
    spec.n_sensors = static_cast<int>(H.rows());
    if (spec.state_dim <= 0 || spec.n_sensors <= 0)
        throw std::invalid_argument("system dimensions must be positive");
    if (A.cols() != spec.state_dim)
        throw std::invalid_argument("A must be square");
    if (H.cols() != spec.state_dim)
        throw std::invalid_argument("H has wrong column count");
    if (Q.rows() != spec.state_dim || Q.cols() != spec.state_dim)
        throw std::invalid_argument("Q must be P x P");
    if (R.rows() != spec.n_sensors || R.cols() != spec.n_sensors)
        throw std::invalid_argument("R must be N x N");
    if (epsilon.size() != spec.n_sensors)
        throw std::invalid_argument("epsilon must have one entry per sensor");
    for (int i = 0; i < epsilon.size(); ++i)
        if (!(epsilon(i) >= 0.0 && epsilon(i) <= 1.0))
            throw std::invalid_argument("erasure probabilities must lie in [0,1]");

    check_symmetric(Q, "Q");
    check_symmetric(R, "R");
    spec.A = std::move(A);
    spec.H = std::move(H);
    spec.Q = 0.5 * (Q + Q.transpose());
    spec.R = 0.5 * (R + R.transpose());
    spec.epsilon = std::move(epsilon);
    spec.noise_factor_q = psd_factor(spec.Q); // also validates PSD
    spec.noise_factor_r = psd_factor(spec.R);
    spec.h_identity_ = spec.H.rows() == spec.H.cols() && spec.H.isIdentity(1e-12);

    if (spectral_radius(spec.A) >= 1.0)
        std::cerr << "wursim: warning: system matrix has spectral radius >= 1, "
                     "process is unstable\n";
    return spec;
}

SystemSpec build_benchmark(Benchmark which, int n) {
    if (n < 1) throw std::invalid_argument("build_benchmark: n must be >= 1");

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    // Patterns are 1-based in (i, j), matching the sensor indexing.
    for (long i = 1; i <= n; ++i) {
        for (long j = 1; j <= n; ++j) {
            double& a = A(i - 1, j - 1);
            if (which == Benchmark::System1) {
                if (i == j)
                    a = 0.75;
                else if (math_mod(i - 2 * j, 4) == 0)
                    a = -0.125;
            } else {
                if (i == j)
                    a = 0.8;
                else if (math_mod(static_cast<long>(std::ceil(i - 2.3 * j)), 4) == 0)
                    a = -1.0 / 9.0;
            }
        }
    }

    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (long i = 1; i <= n; ++i) {
        for (long j = 1; j <= n; ++j) {
            if (i == j)
                Q(i - 1, j - 1) = (11.0 + math_mod(i, 5)) / 5.0;
            else if (math_mod(i - j, 6) == 0)
                Q(i - 1, j - 1) = 1.0;
        }
    }

    Eigen::VectorXd eps(n);
    for (long i = 1; i <= n; ++i)
        eps(i - 1) = 0.02 * std::ceil((i - 1) / 25.0);

    SystemSpec spec = make_system_spec(std::move(A), Eigen::MatrixXd::Identity(n, n),
                                       std::move(Q), Eigen::MatrixXd::Identity(n, n),
                                       std::move(eps));
    if (spectral_radius(spec.A) >= 1.0)
        throw std::runtime_error("benchmark system matrix is not stable");
    return spec;
}

ProcessState step_process(const ProcessState& state, const SystemSpec& spec,
                          RandomStream& rng) {
    if (state.x.size() != spec.state_dim)
        throw std::invalid_argument("step_process: state dimension mismatch");
    ProcessState next;
    next.x = spec.A * state.x + spec.noise_factor_q * gaussian_vector(spec.state_dim, rng);
    next.step_index = state.step_index + 1;
    return next;
}

Measurement measure(const ProcessState& state, const SystemSpec& spec, RandomStream& rng) {
    if (state.x.size() != spec.state_dim)
        throw std::invalid_argument("measure: state dimension mismatch");
    Measurement m;
    m.y = spec.H * state.x + spec.noise_factor_r * gaussian_vector(spec.n_sensors, rng);
    m.step_index = state.step_index;
    return m;
}

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                RandomStream& rng) {
    if (mean.size() != cov.rows())
        throw std::invalid_argument("sample_gaussian: dimension mismatch");
    const Eigen::MatrixXd factor = psd_factor(cov);
    return mean + factor * gaussian_vector(static_cast<int>(mean.size()), rng);
}

} // namespace wursim
