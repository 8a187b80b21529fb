#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace shewhart {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
inline double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

struct BisectionOptions {
    double value_tol = 0.0;       // early exit once |f(x) - target| <= value_tol (0: off)
    double x_tol = 1e-14;         // or when the bracket is this narrow (relative+absolute)
    int max_expansions = 200;     // geometric bracket doublings
    int max_iterations = 400;
};

// Solves f(x) = target for a nonincreasing f by bisection. The initial bracket
// [lo, hi] is expanded geometrically (width doubling) until it straddles the
// target. Throws BracketNotFound when expansion is exhausted and
// NonMonotoneModel when the bracket audit shows f increasing.
double solve_decreasing(const std::function<double(double)>& f, double target, double lo,
                        double hi, const BisectionOptions& opts = {});

// Same as solve_decreasing for a nondecreasing f.
double solve_increasing(const std::function<double(double)>& f, double target, double lo,
                        double hi, const BisectionOptions& opts = {});

struct SimpsonOptions {
    double abs_tol = 1e-11;
    int max_depth = 50;
};

// Adaptive Simpson quadrature of a smooth integrand on [a, b]. Throws
// QuadratureFailure when refinement would exceed max_depth.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const SimpsonOptions& opts = {});

}  // namespace shewhart
