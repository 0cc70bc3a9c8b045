// Scalar Gaussian helpers used across the estimator and scheduler.
#pragma once

#include <cmath>

namespace wursim {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

/// Standard normal pdf.
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard normal cdf in the tail-stable erfc form: Phi(x) = erfc(-x/sqrt(2))/2.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

/// P(|X| <= half_width) for X ~ N(0, sigma^2); equals 2*Phi(h/sigma) - 1
/// without cancellation.
inline double centered_interval_mass(double half_width, double sigma) {
    return std::erf(half_width / (sigma * kSqrt2));
}

} // namespace wursim
