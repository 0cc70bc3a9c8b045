#include <doctest.h>

#include <cmath>

#include "wursim/oracles.hpp"
#include "wursim/system_model.hpp"

using namespace wursim;

namespace {

SystemSpec small_spec(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                      const Eigen::MatrixXd& r) {
    const int n = static_cast<int>(a.rows());
    return make_system_spec(a, Eigen::MatrixXd::Identity(n, n), q, r,
                            Eigen::VectorXd::Zero(n));
}

} // namespace

TEST_CASE("math_mod gives the nonnegative remainder") {
    CHECK(math_mod(-3, 4) == 1);
    CHECK(math_mod(-4, 4) == 0);
    CHECK(math_mod(6, 6) == 0);
    CHECK(math_mod(7, 5) == 2);
}

TEST_CASE("benchmark system 1 matches its defining pattern") {
    const SystemSpec spec = build_benchmark(Benchmark::System1, 50);
    CHECK(spec.n_sensors == 50);
    CHECK(spec.state_dim == 50);
    CHECK(spec.A(0, 0) == 0.75);
    CHECK(spec.A(1, 0) == -0.125); // i=2, j=1: mod(2-2, 4) = 0
    CHECK(spec.A(0, 1) == 0.0);    // i=1, j=2: mod(-3, 4) = 1
    CHECK(spec.Q(0, 0) == doctest::Approx(2.4).epsilon(1e-15));
    CHECK(spec.Q(6, 0) == 1.0); // i=7, j=1: mod(6, 6) = 0
    CHECK(spec.Q(1, 0) == 0.0);
    CHECK(spec.epsilon(0) == 0.0);
    CHECK(spec.epsilon(25) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(spec.epsilon(49) == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(spec.H.isIdentity(0.0));
    CHECK(spec.R.isIdentity(0.0));
}

TEST_CASE("benchmark system 2 uses the ceiling pattern") {
    const SystemSpec spec = build_benchmark(Benchmark::System2, 50);
    CHECK(spec.A(0, 0) == 0.8);
    // i=2, j=3: ceil(2 - 6.9) = -4, mod(-4, 4) = 0.
    CHECK(spec.A(1, 2) == doctest::Approx(-1.0 / 9.0).epsilon(1e-15));
    // i=3, j=1: ceil(3 - 2.3) = 1.
    CHECK(spec.A(2, 0) == 0.0);
}

TEST_CASE("benchmark builders are deterministic and stable") {
    for (const auto which : {Benchmark::System1, Benchmark::System2}) {
        const SystemSpec a = build_benchmark(which, 50);
        const SystemSpec b = build_benchmark(which, 50);
        CHECK((a.A - b.A).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.Q - b.Q).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.epsilon - b.epsilon).cwiseAbs().maxCoeff() == 0.0);

        const double rho = spectral_radius(a.A);
        CHECK(rho < 1.0);

        // Independent growth-rate estimate of the spectral radius.
        Eigen::VectorXd v = Eigen::VectorXd::Ones(50);
        double log_growth = 0.0;
        const int iters = 4000;
        for (int i = 0; i < iters; ++i) {
            v = a.A * v;
            const double norm = v.norm();
            log_growth += std::log(norm);
            v /= norm;
        }
        const double rho_power = std::exp(log_growth / iters);
        CHECK(rho_power < 1.0);
        CHECK(rho_power == doctest::Approx(rho).epsilon(0.05));
    }
}

TEST_CASE("build_benchmark rejects bad sizes") {
    CHECK_THROWS_AS(build_benchmark(Benchmark::System1, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_benchmark(Benchmark::System2, -3), std::invalid_argument);
}

TEST_CASE("make_system_spec validates inputs") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) * 0.5;
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd eps(2);
    eps << 0.0, 1.5;
    CHECK_THROWS_AS(make_system_spec(a, Eigen::MatrixXd::Identity(2, 2), q, q, eps),
                    std::invalid_argument);

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(make_system_spec(a, Eigen::MatrixXd::Identity(2, 2), indefinite, q,
                                     Eigen::VectorXd::Zero(2)),
                    std::invalid_argument);

    // A tiny negative eigenvalue is rounding noise and gets clamped.
    Eigen::MatrixXd nearly_psd(2, 2);
    nearly_psd << 1.0, 1.0, 1.0, 1.0 - 1e-10;
    CHECK_NOTHROW(make_system_spec(a, Eigen::MatrixXd::Identity(2, 2), nearly_psd, q,
                                   Eigen::VectorXd::Zero(2)));
}

TEST_CASE("step_process implements x' = A x + v") {
    RandomStream rng(1);
    const SystemSpec ident = small_spec(Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::MatrixXd::Zero(2, 2),
                                        Eigen::MatrixXd::Identity(2, 2));
    Eigen::VectorXd x0(2);
    x0 << 1.0, 2.0;
    const ProcessState next = step_process(ProcessState{x0, 0}, ident, rng);
    CHECK(next.x(0) == 1.0);
    CHECK(next.x(1) == 2.0);
    CHECK(next.step_index == 1);

    Eigen::MatrixXd a(2, 2);
    a << 0.3, -0.2, 0.1, 0.5;
    const SystemSpec noiseless =
        small_spec(a, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
    const ProcessState zero = step_process(ProcessState{Eigen::VectorXd::Zero(2), 0},
                                           noiseless, rng);
    CHECK(zero.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step_process is bit-reproducible for a fixed stream") {
    const SystemSpec spec = build_benchmark(Benchmark::System1, 10);
    RandomStream rng_a(42), rng_b(42);
    ProcessState a{Eigen::VectorXd::Zero(10), 0}, b = a;
    for (int k = 0; k < 20; ++k) {
        a = step_process(a, spec, rng_a);
        b = step_process(b, spec, rng_b);
    }
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-noise benchmark trajectory decays to zero") {
    const SystemSpec bench = build_benchmark(Benchmark::System1, 50);
    const SystemSpec noiseless = make_system_spec(bench.A, bench.H,
                                                  Eigen::MatrixXd::Zero(50, 50), bench.R,
                                                  bench.epsilon);
    RandomStream rng(3);
    ProcessState s{Eigen::VectorXd::Ones(50), 0};
    for (int k = 0; k < 250; ++k) s = step_process(s, noiseless, rng);
    CHECK(s.x.norm() < 1e-6);
}

TEST_CASE("long-run state covariance matches the Lyapunov fixed point") {
    const SystemSpec spec = build_benchmark(Benchmark::System1, 50);
    const Eigen::MatrixXd target = oracle::lyapunov_fixed_point(spec.A, spec.Q);
    RandomStream rng(2024);
    ProcessState s{Eigen::VectorXd::Zero(50), 0};
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(50, 50);
    const int steps = 100000;
    for (int k = 0; k < steps; ++k) {
        s = step_process(s, spec, rng);
        acc.noalias() += s.x * s.x.transpose();
    }
    acc /= steps;
    CHECK((acc - target).norm() / target.norm() < 0.10);
}

TEST_CASE("measure implements y = H x + w") {
    RandomStream rng(5);
    const SystemSpec exact = small_spec(Eigen::MatrixXd::Identity(3, 3) * 0.5,
                                        Eigen::MatrixXd::Identity(3, 3),
                                        Eigen::MatrixXd::Zero(3, 3));
    Eigen::VectorXd x(3);
    x << -1.0, 0.5, 2.0;
    const Measurement m = measure(ProcessState{x, 7}, exact, rng);
    CHECK((m.y - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.step_index == 7);

    // H = 0 leaves pure noise with the configured covariance.
    const SystemSpec noise_only = make_system_spec(
        Eigen::MatrixXd::Identity(3, 3) * 0.5, Eigen::MatrixXd::Zero(3, 3),
        Eigen::MatrixXd::Identity(3, 3),
        Eigen::Vector3d(4.0, 1.0, 0.25).asDiagonal().toDenseMatrix(),
        Eigen::VectorXd::Zero(3));
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d second = Eigen::Vector3d::Zero();
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const Measurement s = measure(ProcessState{x, 0}, noise_only, rng);
        mean += s.y;
        second += s.y.cwiseProduct(s.y);
    }
    mean /= draws;
    second /= draws;
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(mean(i)) < 0.05);
        CHECK(second(i) == doctest::Approx(noise_only.R(i, i)).epsilon(0.05));
    }
}

TEST_CASE("sample_gaussian handles PSD covariance") {
    RandomStream rng(9);
    Eigen::VectorXd mean(2);
    mean << 3.0, -1.0;

    const Eigen::VectorXd exact = sample_gaussian(mean, Eigen::MatrixXd::Zero(2, 2), rng);
    CHECK((exact - mean).cwiseAbs().maxCoeff() == 0.0);

    double sum = 0.0, sum_sq = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd v =
            sample_gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), rng);
        sum += v(0);
        sum_sq += v(0) * v(0);
    }
    const double var = sum_sq / draws - (sum / draws) * (sum / draws);
    CHECK(var == doctest::Approx(1.0).epsilon(3.0 * std::sqrt(2.0 / draws)));

    double sq4 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd v = sample_gaussian(
            Eigen::VectorXd::Zero(1), 4.0 * Eigen::MatrixXd::Identity(1, 1), rng);
        sq4 += v(0) * v(0);
    }
    CHECK(std::sqrt(sq4 / draws) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("sample_gaussian rejects bad covariance") {
    RandomStream rng(1);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(sample_gaussian(Eigen::VectorXd::Zero(2), asym, rng),
                    std::invalid_argument);
    Eigen::MatrixXd indef(2, 2);
    indef << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(sample_gaussian(Eigen::VectorXd::Zero(2), indef, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_gaussian(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(2, 2), rng),
                    std::invalid_argument);
}
