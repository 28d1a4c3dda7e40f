#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace supou::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_intervals = 200;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
    // Subinterval carrying the largest error estimate when the loop stopped.
    double worst_lo = 0.0;
    double worst_hi = 0.0;
    double worst_error = 0.0;

    std::string describe() const;
};

using Integrand = std::function<double(double)>;

/// Adaptive 21-point Gauss-Kronrod on a finite interval [lo, hi].
/// Bisects the subinterval with the largest error estimate until
/// error <= max(abs_tol, rel_tol*|value|) or the interval cap is hit.
Result gauss_kronrod(const Integrand& f, double lo, double hi, const Options& opts = {});

/// Integral over (0, inf) through the substitution x = u/(1-u).
/// The worst subinterval is reported in x coordinates.
Result half_line(const Integrand& f, const Options& opts = {});

/// Integral over (0, inf) split at increasing positive breakpoints
/// b_1 < ... < b_n: finite pieces [0, b_1], ..., [b_{n-1}, b_n] and the tail
/// x = b_n + u/(1-u). Useful when f has structure on several scales.
/// The absolute tolerance is shared evenly across the pieces.
Result half_line(const Integrand& f, const std::vector<double>& breakpoints, const Options& opts = {});

/// Same as gauss_kronrod but throws ComputationError when not converged.
double integrate(const Integrand& f, double lo, double hi, const Options& opts = {});
double integrate_half_line(const Integrand& f, const Options& opts = {});
double integrate_half_line(const Integrand& f, const std::vector<double>& breakpoints, const Options& opts = {});

}  // namespace supou::quad
