#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace ebmix {

struct OptimResult {
    std::vector<double> x;
    double fval = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Objective: fills grad (same length as x) and returns f(x).
using ObjectiveFn = std::function<double(const std::vector<double>&, std::vector<double>&)>;

/// Dense box-bounded BFGS minimizer with Armijo backtracking and a scaled
/// first step. Intended for the small smooth problems here (2-d
/// hyperparameter likelihoods); deterministic.
inline OptimResult bfgs_minimize(const ObjectiveFn& fn, std::vector<double> x,
                                 int max_iters = 500, double rel_tol = 1e-8,
                                 std::vector<double> lo = {}, std::vector<double> hi = {}) {
    const size_t n = x.size();
    const bool bounded = !lo.empty();
    auto clamp = [&](std::vector<double>& v) {
        if (!bounded) return;
        for (size_t i = 0; i < n; ++i) v[i] = std::min(hi[i], std::max(lo[i], v[i]));
    };
    clamp(x);

    std::vector<double> g(n), g_new(n), x_new(n), p(n), s(n), y(n);
    std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) H[i][i] = 1.0;

    double f = fn(x, g);
    OptimResult res;
    bool first_step = true;
    int it = 0;
    for (; it < max_iters; ++it) {
        double gnorm = 0.0;
        for (size_t i = 0; i < n; ++i) {
            p[i] = 0.0;
            for (size_t j = 0; j < n; ++j) p[i] -= H[i][j] * g[j];
            gnorm += g[i] * g[i];
        }
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-10) {
            res.converged = true;
            break;
        }
        double slope = 0.0;
        for (size_t i = 0; i < n; ++i) slope += p[i] * g[i];
        if (slope >= 0.0) {  // not a descent direction; reset to steepest descent
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
            for (size_t i = 0; i < n; ++i) p[i] = -g[i];
            slope = -gnorm * gnorm;
        }
        double pnorm = 0.0;
        for (double pi : p) pnorm += pi * pi;
        pnorm = std::sqrt(pnorm);
        // Keep the very first trial move at unit length in x-space.
        double step = first_step ? std::min(1.0, 1.0 / pnorm) : 1.0;
        double f_new = f;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * p[i];
            clamp(x_new);
            double actual_slope = 0.0;  // slope along the projected move
            for (size_t i = 0; i < n; ++i) actual_slope += (x_new[i] - x[i]) * g[i];
            f_new = fn(x_new, g_new);
            if (std::isfinite(f_new) &&
                f_new <= f + 1e-4 * std::min(actual_slope, 0.0)) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        first_step = false;
        if (!moved) {
            res.converged = true;  // no further progress possible
            break;
        }
        const double rel_change = std::fabs(f - f_new) / std::max(1.0, std::fabs(f));
        double sy = 0.0;
        for (size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        if (sy > 1e-12) {
            std::vector<double> Hy(n, 0.0);
            double yHy = 0.0;
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < n; ++j) Hy[i] += H[i][j] * y[j];
                yHy += y[i] * Hy[i];
            }
            const double rho = 1.0 / sy;
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j)
                    H[i][j] += (1.0 + rho * yHy) * rho * s[i] * s[j] -
                               rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
        x = x_new;
        g = g_new;
        f = f_new;
        if (rel_change < rel_tol) {
            res.converged = true;
            ++it;
            break;
        }
    }
    double gnorm = 0.0;
    for (double gi : g) gnorm += gi * gi;
    res.x = x;
    res.fval = f;
    res.grad_norm = std::sqrt(gnorm);
    res.iterations = it;
    return res;
}

}  // namespace ebmix
