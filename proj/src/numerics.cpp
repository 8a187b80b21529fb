#include "shewhart/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shewhart/errors.hpp"

namespace shewhart {
namespace {

bool narrow(double lo, double hi, double x_tol) {
    return hi - lo <= x_tol * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

}  // namespace

double solve_decreasing(const std::function<double(double)>& f, double target, double lo,
                        double hi, const BisectionOptions& opts) {
    if (!(lo < hi)) throw std::invalid_argument("solve_decreasing: empty bracket");
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo < f_hi) {
        throw NonMonotoneModel("bracket audit failed: function increases from " +
                               std::to_string(f_lo) + " to " + std::to_string(f_hi));
    }
    // Expand until f(lo) >= target >= f(hi).
    int expansions = 0;
    while (f_lo < target || f_hi > target) {
        if (++expansions > opts.max_expansions) {
            throw BracketNotFound("no bracket for target " + std::to_string(target) + " after " +
                                  std::to_string(opts.max_expansions) + " doublings");
        }
        const double width = hi - lo;
        if (f_lo < target) {
            lo -= width;
            f_lo = f(lo);
        }
        if (f_hi > target) {
            hi += width;
            f_hi = f(hi);
        }
        if (f_lo < f_hi) throw NonMonotoneModel("bracket audit failed during expansion");
    }
    if (f_lo == target) return lo;
    if (f_hi == target) return hi;
    for (int i = 0; i < opts.max_iterations && !narrow(lo, hi, opts.x_tol); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (opts.value_tol > 0.0 && std::abs(f_mid - target) <= opts.value_tol) return mid;
        if (f_mid >= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double solve_increasing(const std::function<double(double)>& f, double target, double lo,
                        double hi, const BisectionOptions& opts) {
    return solve_decreasing([&](double x) { return -f(x); }, -target, lo, hi, opts);
}

namespace {

struct SimpsonNode {
    double a, b, fa, fm, fb, whole;
};

double simpson_step(const std::function<double(double)>& f, const SimpsonNode& n, double tol,
                    int depth, int max_depth) {
    const double m = 0.5 * (n.a + n.b);
    const double lm = 0.5 * (n.a + m);
    const double rm = 0.5 * (m + n.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - n.a) / 6.0 * (n.fa + 4.0 * flm + n.fm);
    const double right = (n.b - m) / 6.0 * (n.fm + 4.0 * frm + n.fb);
    const double delta = left + right - n.whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth) {
        throw QuadratureFailure("adaptive Simpson exceeded depth " + std::to_string(max_depth) +
                                " on [" + std::to_string(n.a) + ", " + std::to_string(n.b) + "]");
    }
    return simpson_step(f, {n.a, m, n.fa, flm, n.fm, left}, 0.5 * tol, depth + 1, max_depth) +
           simpson_step(f, {m, n.b, n.fm, frm, n.fb, right}, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const SimpsonOptions& opts) {
    if (a == b) return 0.0;
    if (a > b) return -adaptive_simpson(f, b, a, opts);
    // Start from a few panels so narrow peaks are not missed by the first estimate.
    constexpr int kPanels = 16;
    double total = 0.0;
    const double h = (b - a) / kPanels;
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == kPanels) ? b : lo + h;
        const double fa = f(lo);
        const double fb = f(hi);
        const double fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(f, {lo, hi, fa, fm, fb, whole}, opts.abs_tol / kPanels, 0,
                              opts.max_depth);
    }
    return total;
}

}  // namespace shewhart
