// Ground-truth linear dynamical system: x(k) = A x(k-1) + v,  y(k) = H x(k) + w,
// with builders for the two benchmark systems used throughout the experiments.
#pragma once

#include <Eigen/Dense>

#include "wursim/rng.hpp"

namespace wursim {

/// Immutable world definition. Construct through make_system_spec or
/// build_benchmark so the invariants are checked and the noise factors cached.
struct SystemSpec {
    int n_sensors = 0; // N
    int state_dim = 0; // P
    Eigen::MatrixXd A; // P x P state update
    Eigen::MatrixXd H; // N x P observation
    Eigen::MatrixXd Q; // P x P process-noise covariance
    Eigen::MatrixXd R; // N x N measurement-noise covariance
    Eigen::VectorXd epsilon; // length-N erasure probabilities

    // Cached PSD square roots of Q and R for noise sampling.
    Eigen::MatrixXd noise_factor_q;
    Eigen::MatrixXd noise_factor_r;

    bool h_is_identity() const { return h_identity_; }
    bool h_identity_ = false; // cached by make_system_spec
};

enum class Benchmark { System1, System2 };

struct ProcessState {
    Eigen::VectorXd x;
    long step_index = 0;
};

struct Measurement {
    Eigen::VectorXd y;
    long step_index = 0;
};

/// Nonnegative remainder in [0, m); the matrix-builder patterns need a
/// well-defined value for negative arguments.
long math_mod(long a, long m);

/// Validates dimensions, symmetry/PSD of Q and R (min eigenvalue >= -1e-9
/// after symmetrization), and epsilon in [0,1]; warns on stderr if the
/// spectral radius of A is >= 1 but does not reject.
SystemSpec make_system_spec(Eigen::MatrixXd A, Eigen::MatrixXd H, Eigen::MatrixXd Q,
                            Eigen::MatrixXd R, Eigen::VectorXd epsilon);

/// Benchmark systems: H = I, R = I, Q and A from the piecewise patterns,
/// epsilon_n = 0.02 * ceil((n-1)/25) with 1-based n. Rejects unstable A.
SystemSpec build_benchmark(Benchmark which, int n);

ProcessState step_process(const ProcessState& state, const SystemSpec& spec, RandomStream& rng);

Measurement measure(const ProcessState& state, const SystemSpec& spec, RandomStream& rng);

/// Draw from N(mean, cov) via a symmetric PSD factorization; eigenvalues in
/// [-1e-9, 0) are clamped to 0, anything lower is rejected.
Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                RandomStream& rng);

/// PSD square root used by sample_gaussian; exposed for factor caching.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov);

double spectral_radius(const Eigen::MatrixXd& m);

} // namespace wursim
