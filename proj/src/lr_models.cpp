#include "shewhart/lr_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "shewhart/errors.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

const char* to_string(Measure m) {
    switch (m) {
        case Measure::Nominal: return "nominal";
        case Measure::Alt1: return "alt1";
        case Measure::Alt2: return "alt2";
    }
    return "?";
}

Measure post_change_measure(int alternative) {
    if (alternative == 1) return Measure::Alt1;
    if (alternative == 2) return Measure::Alt2;
    throw std::invalid_argument("alternative index must be 1 or 2");
}

double LikelihoodRatioModel::survival(Measure m, int lr, std::int64_t t, double nu) const {
    if (nu < 0.0 || std::isnan(nu)) throw std::invalid_argument("threshold must be >= 0");
    return survival_log(m, lr, t, safe_log(nu));
}

double survival_inf(const LikelihoodRatioModel& model, std::int64_t t, double nu) {
    return model.survival(Measure::Nominal, 1, t, nu);
}

double survival_post(const LikelihoodRatioModel& model, int alternative, std::int64_t t,
                     double nu) {
    return model.survival(post_change_measure(alternative), alternative, t, nu);
}

double log_quantile(const LikelihoodRatioModel& model, Measure m, int lr, std::int64_t t,
                    double target_prob) {
    if (!(target_prob > 0.0 && target_prob <= 1.0)) {
        throw std::invalid_argument("target probability must lie in (0, 1]");
    }
    if (target_prob == 1.0) return kNegInf;
    auto f = [&](double y) { return model.survival_log(m, lr, t, y); };
    return solve_decreasing(f, target_prob, -1.0, 1.0);
}

double quantile_inf(const LikelihoodRatioModel& model, std::int64_t t, double target_prob) {
    return std::exp(log_quantile(model, Measure::Nominal, 1, t, target_prob));
}

double log_quantile_post(const LikelihoodRatioModel& model, std::int64_t t, double beta) {
    if (auto closed = model.log_post_quantile_closed_form(t, beta)) return *closed;
    return log_quantile(model, Measure::Alt1, 1, t, beta);
}

namespace {

struct Curve {
    Measure m;
    int lr;
};

std::vector<Curve> curves_of(const LikelihoodRatioModel& model) {
    std::vector<Curve> curves{{Measure::Nominal, 1}, {Measure::Alt1, 1}};
    if (model.num_alternatives() == 2) {
        curves.push_back({Measure::Nominal, 2});
        curves.push_back({Measure::Alt2, 2});
        curves.push_back({Measure::Alt1, 2});
        curves.push_back({Measure::Alt2, 1});
    }
    return curves;
}

// Largest one-step drop of the survival curve over an n-point grid, or -1 if
// the curve increases somewhere / is flat inside its support.
double max_step(const LikelihoodRatioModel& model, const Curve& c, std::int64_t t, double lo,
                double hi, int n, std::string& problem) {
    constexpr double kEdge = 1e-13;
    double prev = model.survival_log(c.m, c.lr, t, lo);
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double y = lo + (hi - lo) * k / n;
        const double s = model.survival_log(c.m, c.lr, t, y);
        if (s > prev + 1e-15) {
            problem = "survival increases near log(nu)=" + std::to_string(y);
            return -1.0;
        }
        const bool interior = prev > kEdge && prev < 1.0 - kEdge && s > kEdge && s < 1.0 - kEdge;
        if (interior && !(s < prev)) {
            problem = "survival is flat near log(nu)=" + std::to_string(y);
            return -1.0;
        }
        worst = std::max(worst, prev - s);
        prev = s;
    }
    return worst;
}

}  // namespace

ContinuityAudit audit_continuity(const LikelihoodRatioModel& model, std::int64_t t,
                                 int grid_points) {
    ContinuityAudit audit;
    if (!model.declares_continuity()) {
        audit.ok = false;
        audit.detail = "model does not declare continuous likelihood-ratio laws";
        return audit;
    }
    const auto curves = curves_of(model);
    double lo = kPosInf;
    double hi = kNegInf;
    try {
        for (const auto& c : curves) {
            const double a = log_quantile(model, c.m, c.lr, t, 1.0 - 1e-9);
            const double b = log_quantile(model, c.m, c.lr, t, 1e-9);
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    } catch (const Error& e) {
        audit.ok = false;
        audit.detail = std::string("support bracketing failed: ") + e.what();
        return audit;
    }
    const double pad = 0.05 * (hi - lo) + 1e-3;
    lo -= pad;
    hi += pad;
    for (const auto& c : curves) {
        std::string problem;
        const double coarse = max_step(model, c, t, lo, hi, grid_points, problem);
        const double fine = coarse < 0 ? -1.0 : max_step(model, c, t, lo, hi, 4 * grid_points, problem);
        if (coarse < 0 || fine < 0) {
            audit.ok = false;
            audit.detail = std::string(to_string(c.m)) + " lr" + std::to_string(c.lr) + ": " + problem;
            return audit;
        }
        if (coarse > 1e-9 && fine > 0.6 * coarse) {
            audit.ok = false;
            audit.detail = std::string(to_string(c.m)) + " lr" + std::to_string(c.lr) +
                           ": jump of size " + std::to_string(fine) + " (atom in the law of l_t)";
            return audit;
        }
    }
    return audit;
}

void require_continuity(const LikelihoodRatioModel& model) {
    const std::int64_t horizon = std::min<std::int64_t>(model.period(), 64);
    for (std::int64_t t = 1; t <= horizon; ++t) {
        const auto audit = audit_continuity(model, t);
        if (!audit.ok) {
            throw ModelContractViolation("continuity contract violated at t=" + std::to_string(t) +
                                         ": " + audit.detail);
        }
    }
}

Measure RegimeSpec::measure_at(std::int64_t s) const {
    if (tau == kNever || s <= tau) return Measure::Nominal;
    if (duration != kNever && s - tau > duration) return Measure::Nominal;
    return post_change_measure(alternative);
}

std::vector<LrSample> sample_path(const LikelihoodRatioModel& model, const RegimeSpec& regime,
                                  std::int64_t length, Rng& rng) {
    std::vector<LrSample> path;
    path.reserve(static_cast<std::size_t>(std::max<std::int64_t>(length, 0)));
    for (std::int64_t s = 1; s <= length; ++s) {
        path.push_back(model.sample(regime.measure_at(s), s, rng));
    }
    return path;
}

double TwoAlternativeModel::log_mixture_at(double q, double x) const {
    const double a = q < 1.0 ? std::log1p(-q) + log_lr_at(1, x) : kNegInf;
    const double b = q > 0.0 ? std::log(q) + log_lr_at(2, x) : kNegInf;
    return log_sum_exp(a, b);
}

}  // namespace shewhart
