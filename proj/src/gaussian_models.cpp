#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shewhart/errors.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/normal.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

// ---------------------------------------------------------------------------
// GaussianMeanShiftModel

GaussianMeanShiftModel::GaussianMeanShiftModel(double mu)
    : GaussianMeanShiftModel(std::vector<double>{mu}) {}

GaussianMeanShiftModel::GaussianMeanShiftModel(std::vector<double> mu_seq)
    : mu_seq_(std::move(mu_seq)) {
    if (mu_seq_.empty()) throw std::invalid_argument("mu_seq must not be empty");
    for (double mu : mu_seq_) {
        if (!(mu > 0.0) || !std::isfinite(mu)) {
            throw std::invalid_argument("post-change means must be finite and > 0");
        }
    }
    time_varying_ = std::any_of(mu_seq_.begin(), mu_seq_.end(),
                                [&](double mu) { return mu != mu_seq_.front(); });
}

double GaussianMeanShiftModel::mu_at(std::int64_t t) const {
    if (t < 1) throw std::invalid_argument("time index starts at 1");
    const auto n = static_cast<std::int64_t>(mu_seq_.size());
    return mu_seq_[static_cast<std::size_t>((t - 1) % n)];
}

double GaussianMeanShiftModel::survival_log(Measure m, int lr, std::int64_t t,
                                            double log_nu) const {
    if (lr != 1 || m == Measure::Alt2) {
        throw std::invalid_argument("gaussian_shift has a single alternative");
    }
    const double mu = mu_at(t);
    const double mean = m == Measure::Nominal ? 0.0 : mu;
    // ℓ ≥ ν  ⇔  ξ ≥ log ν / μ + μ/2
    return normal_sf(log_nu / mu + 0.5 * mu - mean);
}

LrSample GaussianMeanShiftModel::sample(Measure m, std::int64_t t, Rng& rng) const {
    const double mu = mu_at(t);
    const double xi = standard_normal(rng) + (m == Measure::Nominal ? 0.0 : mu);
    return {mu * xi - 0.5 * mu * mu};
}

std::optional<double> GaussianMeanShiftModel::log_post_quantile_closed_form(std::int64_t t,
                                                                            double beta) const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
    const double mu = mu_at(t);
    if (beta == 1.0) return kNegInf;
    if (beta == 0.0) return kPosInf;
    return 0.5 * mu * mu + mu * normal_isf(beta);
}

// ---------------------------------------------------------------------------
// TwoAlternativeGaussianModel

TwoAlternativeGaussianModel::TwoAlternativeGaussianModel(double mu1, double mu2)
    : mu1_(mu1), mu2_(mu2) {
    if (!std::isfinite(mu1) || !std::isfinite(mu2) || mu1 == 0.0 || mu2 == 0.0) {
        throw std::invalid_argument("post-change means must be finite and nonzero");
    }
}

double TwoAlternativeGaussianModel::mean(Measure m) const {
    switch (m) {
        case Measure::Nominal: return 0.0;
        case Measure::Alt1: return mu1_;
        case Measure::Alt2: return mu2_;
    }
    return 0.0;
}

double TwoAlternativeGaussianModel::survival_log(Measure m, int lr, std::int64_t /*t*/,
                                                 double log_nu) const {
    if (lr != 1 && lr != 2) throw std::invalid_argument("lr index must be 1 or 2");
    const double a = slope(lr);
    const double x0 = (log_nu + 0.5 * a * a) / a;
    return a > 0.0 ? normal_sf(x0 - mean(m)) : normal_cdf(x0 - mean(m));
}

LrSample TwoAlternativeGaussianModel::sample(Measure m, std::int64_t /*t*/, Rng& rng) const {
    const double xi = standard_normal(rng) + mean(m);
    return {log_lr_at(1, xi), log_lr_at(2, xi)};
}

double TwoAlternativeGaussianModel::log_lr_at(int lr, double x) const {
    const double a = slope(lr);
    return a * x - 0.5 * a * a;
}

double TwoAlternativeGaussianModel::observation_pdf(Measure m, double x) const {
    return normal_pdf(x - mean(m));
}

std::pair<double, double> TwoAlternativeGaussianModel::observation_window(Measure m) const {
    return {mean(m) - 12.0, mean(m) + 12.0};
}

double TwoAlternativeGaussianModel::symmetric_half_survival(Measure m, double log_nu) const {
    if (!symmetric()) throw std::logic_error("cosh closed form needs mu2 = -mu1");
    const double mu = std::abs(mu1_);
    const double z = log_nu + 0.5 * mu * mu;  // log of ν e^{μ²/2}
    if (z <= 0.0) return 1.0;
    const double x = (z + std::log1p(std::sqrt(-std::expm1(-2.0 * z)))) / mu;  // arccosh(e^z)/μ
    return normal_sf(x - mean(m)) + normal_cdf(-x - mean(m));
}

std::optional<double> TwoAlternativeGaussianModel::mixture_survival_exact(Measure m, double q,
                                                                          double log_nu) const {
    if (q == 0.0) return survival_log(m, 1, 1, log_nu);
    if (q == 1.0) return survival_log(m, 2, 1, log_nu);
    if (symmetric() && q == 0.5) return symmetric_half_survival(m, log_nu);
    if (log_nu == kNegInf) return 1.0;
    const double mu = mean(m);
    auto g = [&](double x) { return log_mixture_at(q, x); };
    const double a1 = mu1_;
    const double a2 = mu2_;
    if (a1 * a2 > 0.0) {
        // Monotone statistic: one crossing.
        if (a1 > 0.0) {
            const double x = solve_increasing(g, log_nu, -1.0, 1.0);
            return normal_sf(x - mu);
        }
        const double x = solve_decreasing(g, log_nu, -1.0, 1.0);
        return normal_cdf(x - mu);
    }
    // Convex statistic with an interior minimum: {g ≥ log ν} is the complement
    // of an interval around the minimizer.
    const double xm = (std::log(-q * a2 / ((1.0 - q) * a1)) + 0.5 * (a1 * a1 - a2 * a2)) / (a1 - a2);
    if (g(xm) >= log_nu) return 1.0;
    const double left = solve_decreasing(g, log_nu, xm - 1.0, xm);
    const double right = solve_increasing(g, log_nu, xm, xm + 1.0);
    return normal_cdf(left - mu) + normal_sf(right - mu);
}

namespace {

struct Interval {
    double lo = kNegInf;
    double hi = kPosInf;
    bool empty() const { return lo > hi; }
};

// {x : a x ≤ a²/2} or its complement.
Interval half_line(double a, bool complement) {
    const bool below = (a > 0.0) != complement;
    return below ? Interval{kNegInf, 0.5 * a} : Interval{0.5 * a, kPosInf};
}

Interval intersect(Interval u, Interval v) {
    return {std::max(u.lo, v.lo), std::min(u.hi, v.hi)};
}

// inf of exp(a x − a²/2) on the interval.
double inf_exp_affine(double a, Interval iv) {
    if (iv.empty()) return kPosInf;
    const double x = a > 0.0 ? iv.lo : iv.hi;
    if (!std::isfinite(x)) return 0.0;
    return std::exp(a * x - 0.5 * a * a);
}

}  // namespace

std::optional<RegionInfima> TwoAlternativeGaussianModel::region_infima_closed_form(double q) const {
    const double a1 = mu1_;
    const double a2 = mu2_;
    RegionInfima out;
    out.lr1_on_a1_not_a2 = inf_exp_affine(a1, intersect(half_line(a1, false), half_line(a2, true)));
    out.lr2_on_not_a1_a2 = inf_exp_affine(a2, intersect(half_line(a1, true), half_line(a2, false)));
    const Interval both = intersect(half_line(a1, false), half_line(a2, false));
    if (both.empty()) {
        out.mixture_on_a1_a2 = kPosInf;
    } else if (q == 0.0) {
        out.mixture_on_a1_a2 = inf_exp_affine(a1, both);
    } else if (q == 1.0) {
        out.mixture_on_a1_a2 = inf_exp_affine(a2, both);
    } else if (a1 * a2 > 0.0) {
        const double x = a1 > 0.0 ? both.lo : both.hi;
        out.mixture_on_a1_a2 = std::isfinite(x) ? std::exp(log_mixture_at(q, x)) : 0.0;
    } else {
        const double xm =
            (std::log(-q * a2 / ((1.0 - q) * a1)) + 0.5 * (a1 * a1 - a2 * a2)) / (a1 - a2);
        out.mixture_on_a1_a2 = std::exp(log_mixture_at(q, std::clamp(xm, both.lo, both.hi)));
    }
    return out;
}

}  // namespace shewhart
