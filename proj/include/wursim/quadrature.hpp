// Adaptive Simpson quadrature with Richardson extrapolation.
//
// The censored-update integrands are smooth and exponentially decaying, so
// plain Simpson refinement with per-split tolerance halving reaches the
// requested accuracy quickly; a depth cap turns non-convergence into an error
// instead of unbounded recursion.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace wursim {

struct QuadratureConfig {
    double half_width_sigmas = 10.0; // integration truncation, in prior sigmas
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 60; // maximum recursion depth
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double simpson_recurse(F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw QuadratureError("adaptive Simpson: tolerance not reached within max_subdivisions");
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
std::array<double, 2> simpson_pair_recurse(F& f, double a, double b,
                                           const std::array<double, 2>& fa,
                                           const std::array<double, 2>& fm,
                                           const std::array<double, 2>& fb,
                                           const std::array<double, 2>& whole,
                                           std::array<double, 2> tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const std::array<double, 2> flm = f(lm);
    const std::array<double, 2> frm = f(rm);
    const double h6 = (b - a) / 12.0;
    std::array<double, 2> left{}, right{}, delta{};
    bool converged = true;
    for (int i = 0; i < 2; ++i) {
        left[i] = h6 * (fa[i] + 4.0 * flm[i] + fm[i]);
        right[i] = h6 * (fm[i] + 4.0 * frm[i] + fb[i]);
        delta[i] = left[i] + right[i] - whole[i];
        converged = converged && std::abs(delta[i]) <= 15.0 * tol[i];
    }
    if (converged)
        return {left[0] + right[0] + delta[0] / 15.0, left[1] + right[1] + delta[1] / 15.0};
    if (depth <= 0)
        throw QuadratureError("adaptive Simpson: tolerance not reached within max_subdivisions");
    tol[0] *= 0.5;
    tol[1] *= 0.5;
    const auto l = simpson_pair_recurse(f, a, m, fa, flm, fm, left, tol, depth - 1);
    const auto r = simpson_pair_recurse(f, m, b, fm, frm, fb, right, tol, depth - 1);
    return {l[0] + r[0], l[1] + r[1]};
}

} // namespace detail

/// Integrates f over [a, b] to max(abs_tol, rel_tol*|I|) accuracy.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, double rel_tol,
                        int max_depth) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fm = f(0.5 * (a + b));
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Scale for the relative tolerance from a coarse composite pass.
    double scale = 0.0;
    const int kCoarse = 16;
    const double h = (b - a) / kCoarse;
    for (int i = 0; i < kCoarse; ++i) {
        const double x0 = a + i * h;
        scale += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
    }
    const double tol = std::max(abs_tol, rel_tol * std::abs(scale));
    return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integrates a two-component integrand over [a, b] in one traversal,
/// refining until both components meet their tolerances.
template <class F>
std::array<double, 2> adaptive_simpson_pair(F&& f, double a, double b, double abs_tol,
                                            double rel_tol, int max_depth) {
    if (!(b > a)) return {0.0, 0.0};
    const std::array<double, 2> fa = f(a);
    const std::array<double, 2> fm = f(0.5 * (a + b));
    const std::array<double, 2> fb = f(b);
    std::array<double, 2> whole{}, scale{};
    for (int i = 0; i < 2; ++i) whole[i] = (b - a) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
    const int kCoarse = 16;
    const double h = (b - a) / kCoarse;
    for (int i = 0; i < kCoarse; ++i) {
        const double x0 = a + i * h;
        const auto f0 = f(x0);
        const auto f1 = f(x0 + 0.5 * h);
        const auto f2 = f(x0 + h);
        for (int c = 0; c < 2; ++c) scale[c] += h / 6.0 * (f0[c] + 4.0 * f1[c] + f2[c]);
    }
    const std::array<double, 2> tol{std::max(abs_tol, rel_tol * std::abs(scale[0])),
                                    std::max(abs_tol, rel_tol * std::abs(scale[1]))};
    return detail::simpson_pair_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace wursim
