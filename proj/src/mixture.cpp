#include "shewhart/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "shewhart/errors.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

namespace {

constexpr int kScanPoints = 4001;

void check_weight(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("mixture weight q must lie in [0, 1]");
}

// Root of a sign change of pred on [a, b] where pred(a) != pred(b).
double bisect_boundary(const std::function<bool(double)>& pred, double a, double b) {
    const bool left = pred(a);
    for (int i = 0; i < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
        const double mid = 0.5 * (a + b);
        if (pred(mid) == left) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

double quadrature_survival(const TwoAlternativeModel& model, Measure m, double q, double log_nu) {
    const auto [lo, hi] = model.observation_window(m);
    auto inside = [&](double x) { return model.log_mixture_at(q, x) >= log_nu; };
    auto pdf = [&](double x) { return model.observation_pdf(m, x); };

    std::vector<std::pair<double, double>> segments;
    double x_prev = lo;
    bool in_prev = inside(lo);
    double seg_start = lo;
    for (int k = 1; k < kScanPoints; ++k) {
        const double x = lo + (hi - lo) * k / (kScanPoints - 1);
        const bool in = inside(x);
        if (in != in_prev) {
            const double edge = bisect_boundary(inside, x_prev, x);
            if (in) {
                seg_start = edge;
            } else {
                segments.emplace_back(seg_start, edge);
            }
        }
        x_prev = x;
        in_prev = in;
    }
    if (in_prev) segments.emplace_back(seg_start, hi);

    SimpsonOptions opts;
    opts.abs_tol = 1e-12;
    double total = 0.0;
    for (const auto& [a, b] : segments) {
        if (b > a) total += adaptive_simpson(pdf, a, b, opts);
    }
    return std::clamp(total, 0.0, 1.0);
}

struct Scan {
    double lo;
    double hi;
    std::vector<double> x;
};

Scan scan_window(const TwoAlternativeModel& model) {
    double lo = kPosInf;
    double hi = kNegInf;
    for (Measure m : {Measure::Nominal, Measure::Alt1, Measure::Alt2}) {
        const auto [a, b] = model.observation_window(m);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    Scan s{lo, hi, {}};
    s.x.resize(kScanPoints);
    for (int k = 0; k < kScanPoints; ++k) s.x[k] = lo + (hi - lo) * k / (kScanPoints - 1);
    return s;
}

// inf of exp(f) over {x : member(x)} within the scan window. Candidates are the
// grid minimum (polished by golden-section search when interior) and every set
// boundary located by bisection.
double numeric_infimum(const Scan& scan, const std::function<bool(double)>& member,
                       const std::function<double(double)>& log_f) {
    const auto& x = scan.x;
    const int n = static_cast<int>(x.size());
    double best = kPosInf;
    int best_k = -1;
    std::vector<char> in(n);
    for (int k = 0; k < n; ++k) in[k] = member(x[k]);
    for (int k = 0; k < n; ++k) {
        if (in[k]) {
            const double v = log_f(x[k]);
            if (v < best) {
                best = v;
                best_k = k;
            }
        }
        if (k > 0 && in[k] != in[k - 1]) {
            const double b = bisect_boundary(member, x[k - 1], x[k]);
            best = std::min(best, log_f(b));
        }
    }
    if (best_k > 0 && best_k < n - 1 && in[best_k - 1] && in[best_k + 1]) {
        double a = x[best_k - 1];
        double b = x[best_k + 1];
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
            const double c = b - g * (b - a);
            const double d = a + g * (b - a);
            if (log_f(c) < log_f(d)) {
                b = d;
            } else {
                a = c;
            }
        }
        best = std::min(best, log_f(0.5 * (a + b)));
    }
    return best == kPosInf ? kPosInf : std::exp(best);
}

}  // namespace

double mixture_survival_log(const TwoAlternativeModel& model, Measure m, double q,
                            double log_nu, MixtureMethod method) {
    check_weight(q);
    if (std::isnan(log_nu)) throw std::invalid_argument("threshold must not be NaN");
    if (log_nu == kNegInf) return 1.0;
    if (method != MixtureMethod::Quadrature) {
        if (auto exact = model.mixture_survival_exact(m, q, log_nu)) return *exact;
        if (method == MixtureMethod::Exact) {
            throw std::logic_error("model has no closed-form mixture survival");
        }
    }
    return quadrature_survival(model, m, q, log_nu);
}

double mixture_survival(const TwoAlternativeModel& model, Measure m, double q, double nu,
                        MixtureMethod method) {
    if (nu < 0.0 || std::isnan(nu)) throw std::invalid_argument("threshold must be >= 0");
    return mixture_survival_log(model, m, q, safe_log(nu), method);
}

double mixture_log_quantile(const TwoAlternativeModel& model, Measure m, double q,
                            double target_prob, MixtureMethod method) {
    if (!(target_prob > 0.0 && target_prob <= 1.0)) {
        throw std::invalid_argument("target probability must lie in (0, 1]");
    }
    if (target_prob == 1.0) return kNegInf;
    auto f = [&](double y) { return mixture_survival_log(model, m, q, y, method); };
    return solve_decreasing(f, target_prob, -1.0, 1.0);
}

RegionInfima region_infima(const TwoAlternativeModel& model, double q, bool numeric) {
    check_weight(q);
    if (!numeric) {
        if (auto closed = model.region_infima_closed_form(q)) return *closed;
    }
    const Scan scan = scan_window(model);
    auto in_a = [&](int i, double x) { return model.log_lr_at(i, x) <= 0.0; };
    RegionInfima out;
    out.lr1_on_a1_not_a2 = numeric_infimum(
        scan, [&](double x) { return in_a(1, x) && !in_a(2, x); },
        [&](double x) { return model.log_lr_at(1, x); });
    out.lr2_on_not_a1_a2 = numeric_infimum(
        scan, [&](double x) { return !in_a(1, x) && in_a(2, x); },
        [&](double x) { return model.log_lr_at(2, x); });
    out.mixture_on_a1_a2 = numeric_infimum(
        scan, [&](double x) { return in_a(1, x) && in_a(2, x); },
        [&](double x) { return model.log_mixture_at(q, x); });
    return out;
}

}  // namespace shewhart
