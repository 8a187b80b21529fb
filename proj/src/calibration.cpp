#include "shewhart/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shewhart/errors.hpp"
#include "shewhart/mixture.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

void GeometricPrior::validate() const {
    if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("prior pi must lie in [0, 1]");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("prior p must lie in (0, 1]");
}

const char* to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::Shewhart: return "shewhart";
        case RuleKind::TimeVaryingShewhart: return "time_varying_shewhart";
        case RuleKind::MixtureShewhart: return "mixture_shewhart";
        case RuleKind::Cusum: return "cusum";
        case RuleKind::ClassicalCusum: return "classical_cusum";
        case RuleKind::PoorCusum: return "poor_cusum";
        case RuleKind::StopAtZero: return "stop_at_zero";
        case RuleKind::FixedSample: return "fixed_sample";
    }
    return "?";
}

RuleKind rule_kind_from_string(const std::string& name) {
    for (RuleKind k : {RuleKind::Shewhart, RuleKind::TimeVaryingShewhart,
                       RuleKind::MixtureShewhart, RuleKind::Cusum, RuleKind::ClassicalCusum,
                       RuleKind::PoorCusum, RuleKind::StopAtZero, RuleKind::FixedSample}) {
        if (name == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown rule kind '" + name + "'");
}

double ThresholdSchedule::log_nu_at(std::int64_t t) const {
    if (t < 1) throw std::invalid_argument("thresholds start at t = 1");
    if (log_nu.empty()) throw std::logic_error("empty threshold schedule");
    return log_nu[static_cast<std::size_t>((t - 1) % static_cast<std::int64_t>(log_nu.size()))];
}

// ---------------------------------------------------------------------------
// Policy

Policy Policy::shewhart(double nu, double varpi) {
    Policy p;
    p.kind = RuleKind::Shewhart;
    p.nu = nu;
    p.varpi = varpi;
    return p;
}

Policy Policy::time_varying(ThresholdSchedule schedule) {
    Policy p;
    p.kind = RuleKind::TimeVaryingShewhart;
    p.schedule = std::move(schedule);
    return p;
}

Policy Policy::mixture(double q, double nu) {
    Policy p;
    p.kind = RuleKind::MixtureShewhart;
    p.q = q;
    p.nu = nu;
    return p;
}

Policy Policy::cusum(double nu) {
    Policy p;
    p.kind = RuleKind::Cusum;
    p.nu = nu;
    return p;
}

Policy Policy::classical_cusum(double nu) {
    Policy p;
    p.kind = RuleKind::ClassicalCusum;
    p.nu = nu;
    return p;
}

Policy Policy::poor_cusum(double nu, double c) {
    Policy p;
    p.kind = RuleKind::PoorCusum;
    p.nu = nu;
    p.c = c;
    return p;
}

Policy Policy::stop_at_zero() {
    Policy p;
    p.kind = RuleKind::StopAtZero;
    p.varpi = 1.0;
    return p;
}

Policy Policy::fixed_sample(std::int64_t n) {
    Policy p;
    p.kind = RuleKind::FixedSample;
    p.fixed_n = n;
    return p;
}

double Policy::log_nu_at(std::int64_t t) const {
    if (kind == RuleKind::TimeVaryingShewhart) return schedule->log_nu_at(t);
    return safe_log(nu);
}

void Policy::validate() const {
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument(std::string(to_string(kind)) + " policy: " + why);
    };
    if (!(varpi >= 0.0 && varpi <= 1.0)) fail("varpi must lie in [0, 1]");
    const bool needs_nu = kind == RuleKind::Shewhart || kind == RuleKind::MixtureShewhart ||
                          kind == RuleKind::Cusum || kind == RuleKind::ClassicalCusum ||
                          kind == RuleKind::PoorCusum;
    if (needs_nu != !std::isnan(nu)) fail(needs_nu ? "nu is required" : "nu must not be set");
    if (needs_nu && !(nu >= 0.0)) fail("nu must be >= 0");
    const bool needs_schedule = kind == RuleKind::TimeVaryingShewhart;
    if (needs_schedule != schedule.has_value()) {
        fail(needs_schedule ? "threshold schedule is required" : "schedule must not be set");
    }
    if (needs_schedule) {
        if (schedule->log_nu.empty()) fail("threshold schedule is empty");
        if (!std::isnan(schedule->beta) && !(schedule->beta > 0.0 && schedule->beta <= 1.0)) {
            fail("beta must lie in (0, 1]");
        }
        for (double y : schedule->log_nu) {
            if (std::isnan(y)) fail("threshold schedule holds NaN");
        }
    }
    const bool needs_q = kind == RuleKind::MixtureShewhart;
    if (needs_q != !std::isnan(q)) fail(needs_q ? "q is required" : "q must not be set");
    if (needs_q && !(q >= 0.0 && q <= 1.0)) fail("q must lie in [0, 1]");
    const bool needs_c = kind == RuleKind::PoorCusum;
    if (needs_c != !std::isnan(c)) fail(needs_c ? "c is required" : "c must not be set");
    if (needs_c && !(c > 0.0)) fail("c must be > 0");
    const bool needs_n = kind == RuleKind::FixedSample;
    if (needs_n != (fixed_n != 0)) fail(needs_n ? "fixed_n is required" : "fixed_n must not be set");
    if (needs_n && fixed_n < 1) fail("fixed_n must be >= 1");
    if (kind == RuleKind::StopAtZero && varpi != 1.0) fail("varpi must be 1");
}

// ---------------------------------------------------------------------------
// helpers

namespace {

void require_iid(const LikelihoodRatioModel& model) {
    if (model.time_varying()) {
        throw std::invalid_argument("this calibration needs an i.i.d. model");
    }
}

void require_gamma(double gamma) {
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("gamma must be finite and >= 1");
    }
}

double s_inf_log(const LikelihoodRatioModel& model, std::int64_t t, double log_nu) {
    return model.survival_log(Measure::Nominal, 1, t, log_nu);
}

double s_post_log(const LikelihoodRatioModel& model, std::int64_t t, double log_nu) {
    return model.survival_log(Measure::Alt1, 1, t, log_nu);
}

// P(T ≤ τ) for the randomized Shewhart rule under the geometric prior.
double false_alarm(const GeometricPrior& prior, double varpi, double s_inf) {
    const double p = prior.p;
    const double a = (1.0 - p) * s_inf / (1.0 - (1.0 - p) * (1.0 - s_inf));
    return (1.0 - prior.pi) * (varpi + a * (1.0 - varpi));
}

// Bayesian modified measure of the randomized Shewhart rule.
double shiryaev_value(const GeometricPrior& prior, double varpi, double s_inf, double s_post) {
    const double p = prior.p;
    const double pi = prior.pi;
    const double den = 1.0 - (1.0 - p) * (1.0 - s_inf);
    const double e_lr = (1.0 - p) * s_post / den;
    const double e_disc = (1.0 - p) * s_inf / den;
    const double num = pi * varpi + (1.0 - pi) * p / (1.0 - p) * e_lr * (1.0 - varpi);
    const double dnm = pi + (1.0 - pi) * (1.0 - e_disc) * (1.0 - varpi);
    return num / dnm;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bayesian criterion

double shiryaev_nu_star(const GeometricPrior& prior) {
    prior.validate();
    if (prior.pi == 1.0) return kPosInf;
    return prior.pi / (1.0 - prior.pi) * (1.0 - prior.p) / prior.p;
}

double shiryaev_case_bound(const LikelihoodRatioModel& model, const GeometricPrior& prior) {
    const double nu_star = shiryaev_nu_star(prior);
    const double s = model.survival(Measure::Nominal, 1, 1, nu_star);
    const double p = prior.p;
    return (1.0 - prior.pi) * (1.0 - p) * s / (1.0 - (1.0 - p) * (1.0 - s));
}

CalibrationResult calibrate_shiryaev(const LikelihoodRatioModel& model,
                                     const GeometricPrior& prior, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InfeasibleAlpha("alpha must lie in (0, 1)");
    prior.validate();
    require_iid(model);
    require_continuity(model);

    CalibrationResult out;
    const double pi = prior.pi;
    const double p = prior.p;
    if (alpha >= 1.0 - pi) {
        out.policy = Policy::stop_at_zero();
        out.policy.case_label = "i";
        out.value = 1.0;
        return out;
    }
    const double nu_star = shiryaev_nu_star(prior);
    const double s_star = model.survival(Measure::Nominal, 1, 1, nu_star);
    const double bound = shiryaev_case_bound(model, prior);
    if (alpha >= bound) {
        const double varpi = alpha / (p * (1.0 - pi)) * (1.0 - (1.0 - p) * (1.0 - s_star)) -
                             (1.0 - p) / p * s_star;
        out.policy = Policy::shewhart(nu_star, std::clamp(varpi, 0.0, 1.0));
        out.policy.case_label = "ii";
        out.diagnostics.residuals["false_alarm"] =
            std::abs(false_alarm(prior, out.policy.varpi, s_star) - alpha);
        out.value = shiryaev_value(prior, out.policy.varpi, s_star,
                                   model.survival(Measure::Alt1, 1, 1, nu_star));
        return out;
    }
    const double target = alpha * p / ((1.0 - pi - alpha) * (1.0 - p));
    const double log_nu = log_quantile(model, Measure::Nominal, 1, 1, target);
    const double s_inf = s_inf_log(model, 1, log_nu);
    out.policy = Policy::shewhart(std::exp(log_nu), 0.0);
    out.policy.case_label = "iii";
    out.diagnostics.residuals["threshold_equation"] = std::abs(s_inf - target);
    out.diagnostics.residuals["false_alarm"] = std::abs(false_alarm(prior, 0.0, s_inf) - alpha);
    out.value = shiryaev_value(prior, 0.0, s_inf, s_post_log(model, 1, log_nu));
    return out;
}

CalibrationResult calibrate_shiryaev_maxmin(const LikelihoodRatioModel& model, double gamma) {
    require_gamma(gamma);
    require_iid(model);
    require_continuity(model);
    // P₀(ℓ < ν) − γ P∞(ℓ ≥ ν) is increasing in ν, negative at ν = 0.
    auto h = [&](double y) { return (1.0 - s_post_log(model, 1, y)) - gamma * s_inf_log(model, 1, y); };
    const double log_nu = solve_increasing(h, 0.0, -1.0, 1.0);
    const double s_inf = s_inf_log(model, 1, log_nu);
    const double s_post = s_post_log(model, 1, log_nu);

    CalibrationResult out;
    out.policy = Policy::shewhart(std::exp(log_nu), s_post);
    out.policy.case_label = "maxmin";
    out.diagnostics.residuals["threshold_equation"] = std::abs((1.0 - s_post) / s_inf - gamma) / gamma;
    out.diagnostics.residuals["run_length_constraint"] =
        std::abs((1.0 - out.policy.varpi) / s_inf - gamma) / gamma;
    out.value = s_post;
    return out;
}

CalibrationResult calibrate_lorden_pollak(const LikelihoodRatioModel& model, double gamma) {
    require_gamma(gamma);
    require_iid(model);
    require_continuity(model);
    const double log_nu = log_quantile(model, Measure::Nominal, 1, 1, 1.0 / gamma);

    CalibrationResult out;
    out.policy = Policy::shewhart(std::exp(log_nu), 0.0);
    out.policy.case_label = "threshold";
    out.diagnostics.residuals["threshold_equation"] =
        std::abs(s_inf_log(model, 1, log_nu) - 1.0 / gamma);
    out.value = s_post_log(model, 1, log_nu);
    return out;
}

// ---------------------------------------------------------------------------
// Time-varying thresholds

ThresholdSchedule threshold_schedule(const LikelihoodRatioModel& model, double beta) {
    ThresholdSchedule s;
    s.beta = beta;
    const std::int64_t period = model.period();
    s.log_nu.resize(static_cast<std::size_t>(period));
    for (std::int64_t t = 1; t <= period; ++t) {
        s.log_nu[static_cast<std::size_t>(t - 1)] = log_quantile_post(model, t, beta);
    }
    return s;
}

std::vector<double> nominal_continue_probs(const LikelihoodRatioModel& model,
                                           const ThresholdSchedule& schedule,
                                           std::int64_t count) {
    std::vector<double> rho(static_cast<std::size_t>(count));
    for (std::int64_t t = 1; t <= count; ++t) {
        rho[static_cast<std::size_t>(t - 1)] = 1.0 - s_inf_log(model, t, schedule.log_nu_at(t));
    }
    return rho;
}

SeriesValue expected_run_length_series(const std::vector<double>& rho_period, double trunc_eps,
                                       double cap) {
    if (rho_period.empty()) throw std::invalid_argument("empty rho sequence");
    SeriesValue out;
    out.value = 1.0;
    double prod = 1.0;
    const auto n = rho_period.size();
    // Hard stop well beyond any geometric decay the audit accepts.
    const std::int64_t max_terms = 2'000'000'000;
    for (std::int64_t t = 1; t <= max_terms; ++t) {
        const double r = rho_period[static_cast<std::size_t>((t - 1) % static_cast<std::int64_t>(n))];
        out.rho_hat = std::max(out.rho_hat, r);
        prod *= r;
        out.value += prod;
        out.terms = t;
        if (out.value > cap) {
            out.capped = true;
            return out;
        }
        if (prod < trunc_eps * (1.0 - out.rho_hat)) break;
        if (prod == 0.0) break;
    }
    out.tail_bound = out.rho_hat < 1.0 ? prod * out.rho_hat / (1.0 - out.rho_hat) : kPosInf;
    return out;
}

CalibrationResult calibrate_time_varying(const LikelihoodRatioModel& model, double gamma,
                                         const TimeVaryingOptions& opts) {
    require_gamma(gamma);
    if (model.num_alternatives() != 1) {
        throw std::invalid_argument("time-varying calibration needs a single alternative");
    }
    if (!(opts.trunc_eps > 0.0 && opts.trunc_eps < 1.0)) {
        throw std::invalid_argument("trunc_eps must lie in (0, 1)");
    }
    if (opts.audit_horizon < 1) throw std::invalid_argument("audit horizon must be >= 1");
    require_continuity(model);

    const std::int64_t period = model.period();
    auto rho_of = [&](double beta) {
        return nominal_continue_probs(model, threshold_schedule(model, beta), period);
    };

    CalibrationResult out;
    double beta = 1.0;
    if (gamma > 1.0) {
        auto phi = [&](double b) {
            if (b <= 0.0) return kPosInf;
            return expected_run_length_series(rho_of(b), opts.trunc_eps, 2.0 * gamma).value;
        };
        BisectionOptions bo;
        bo.x_tol = 1e-15;
        try {
            // φ is decreasing in β with φ(1) = 1 < γ; keep β inside (0, 1].
            double lo = 0.5;
            while (phi(lo) < gamma) {
                lo *= 0.5;
                if (lo < 1e-300) throw NoSolution("no beta in (0, 1) reaches the run-length target");
            }
            beta = solve_decreasing(phi, gamma, lo, 1.0, bo);
        } catch (const BracketNotFound& e) {
            throw NoSolution(std::string("run-length equation has no root: ") + e.what());
        }
    }

    ThresholdSchedule schedule = threshold_schedule(model, beta);
    const auto rho = nominal_continue_probs(model, schedule, period);
    const SeriesValue series = expected_run_length_series(rho, opts.trunc_eps);
    const std::int64_t audited = std::min(opts.audit_horizon, period);
    const double rho_sup = *std::max_element(rho.begin(), rho.begin() + audited);
    if (rho_sup >= 1.0 - 1e-6) {
        throw Rho1Violation("sup_t P(l_t < nu_t) = " + std::to_string(rho_sup) +
                            " is not bounded away from 1");
    }

    double detect_resid = 0.0;
    for (std::int64_t t = 1; t <= period; ++t) {
        detect_resid = std::max(detect_resid, std::abs(s_post_log(model, t, schedule.log_nu_at(t)) - beta));
    }

    out.policy = Policy::time_varying(std::move(schedule));
    out.policy.case_label = "time_varying";
    out.value = beta;
    auto& d = out.diagnostics;
    d.rho_beta = rho_sup;
    d.series_truncation_error = series.tail_bound;
    d.audit_horizon = opts.audit_horizon;
    d.residuals["run_length_series"] = std::abs(series.value - gamma) / gamma;
    d.residuals["per_time_detection"] = detect_resid;
    if (period < opts.audit_horizon) {
        d.caveats.push_back("model is periodic with period " + std::to_string(period) +
                            "; the audit over one period covers every t");
    } else {
        d.caveats.push_back("sup_t P(l_t < nu_t) < 1 verified only for t <= " +
                            std::to_string(opts.audit_horizon));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Two alternatives

double mixture_threshold_log(const TwoAlternativeModel& model, double q, double gamma) {
    require_gamma(gamma);
    return mixture_log_quantile(model, Measure::Nominal, q, 1.0 / gamma);
}

double mixture_gap(const TwoAlternativeModel& model, double q, double gamma) {
    const double y = mixture_threshold_log(model, q, gamma);
    return mixture_survival_log(model, Measure::Alt1, q, y) -
           mixture_survival_log(model, Measure::Alt2, q, y);
}

MixtureCaseConditions mixture_case_conditions(const TwoAlternativeModel& model, double gamma,
                                              int q_grid) {
    MixtureCaseConditions c;
    const double y0 = mixture_threshold_log(model, 0.0, gamma);
    const double y1 = mixture_threshold_log(model, 1.0, gamma);
    c.nu0 = std::exp(y0);
    c.nu1 = std::exp(y1);
    c.gap_i = mixture_survival_log(model, Measure::Alt2, 0.0, y0) -
              mixture_survival_log(model, Measure::Alt1, 0.0, y0);
    c.gap_ii = mixture_survival_log(model, Measure::Alt1, 1.0, y1) -
               mixture_survival_log(model, Measure::Alt2, 1.0, y1);
    c.case_i = c.gap_i >= 0.0;
    c.case_ii = c.gap_ii >= 0.0;
    // Endpoints are included so crossings close to q = 0 or 1 are not missed.
    double prev = mixture_gap(model, 0.0, gamma);
    for (int k = 1; k <= q_grid && !c.case_iii; ++k) {
        const double d = mixture_gap(model, static_cast<double>(k) / q_grid, gamma);
        if ((prev > 0.0 && d < 0.0) || (prev < 0.0 && d > 0.0)) c.case_iii = true;
        prev = d;
    }
    return c;
}

CalibrationResult calibrate_mixture(const TwoAlternativeModel& model, double gamma) {
    require_gamma(gamma);
    require_continuity(model);
    constexpr double kTol = 1e-12;

    const double y0 = mixture_threshold_log(model, 0.0, gamma);
    const double y1 = mixture_threshold_log(model, 1.0, gamma);
    const double gap_i = mixture_survival_log(model, Measure::Alt2, 0.0, y0) -
                         mixture_survival_log(model, Measure::Alt1, 0.0, y0);
    const double gap_ii = mixture_survival_log(model, Measure::Alt1, 1.0, y1) -
                          mixture_survival_log(model, Measure::Alt2, 1.0, y1);
    const bool case_i = gap_i >= -kTol;
    const bool case_ii = gap_ii >= -kTol;

    CalibrationResult out;
    auto finish = [&](double q, double log_nu, const char* label) {
        out.policy = Policy::mixture(q, std::exp(log_nu));
        out.policy.case_label = label;
        const double s1 = mixture_survival_log(model, Measure::Alt1, q, log_nu);
        const double s2 = mixture_survival_log(model, Measure::Alt2, q, log_nu);
        out.diagnostics.D_of_q = s1 - s2;
        out.diagnostics.residuals["threshold_equation"] =
            std::abs(mixture_survival_log(model, Measure::Nominal, q, log_nu) - 1.0 / gamma);
        out.value = std::min(s1, s2);
        return out;
    };

    if (case_i && case_ii) {
        if (std::abs(gap_i) <= kTol && std::abs(gap_ii) <= kTol) {
            // Indistinguishable alternatives: every q is equivalent.
            return finish(0.0, y0, "i");
        }
        throw CaseConflict("cases i and ii both hold (gaps " + std::to_string(gap_i) + ", " +
                           std::to_string(gap_ii) + ")");
    }
    if (case_i) return finish(0.0, y0, "i");
    if (case_ii) return finish(1.0, y1, "ii");

    // D(0) > 0 > D(1): bisect for the equalizing weight.
    double lo = 0.0;
    double hi = 1.0;
    double q = 0.5;
    double d = mixture_gap(model, q, gamma);
    for (int it = 0; it < 200 && std::abs(d) >= kTol && hi - lo > 1e-16; ++it) {
        if (d > 0.0) {
            lo = q;
        } else {
            hi = q;
        }
        q = 0.5 * (lo + hi);
        d = mixture_gap(model, q, gamma);
    }
    return finish(q, mixture_threshold_log(model, q, gamma), "iii");
}

// ---------------------------------------------------------------------------
// Classical worst-case delay range

ClassicalRange classical_optimality_range(const Policy& policy, const LikelihoodRatioModel& model) {
    policy.validate();
    ClassicalRange r;
    auto s_inf = [&](double nu) { return model.survival(Measure::Nominal, 1, 1, nu); };
    auto s_post = [&](double nu) { return model.survival(Measure::Alt1, 1, 1, nu); };

    if (policy.kind == RuleKind::Shewhart || policy.kind == RuleKind::Cusum) {
        r.nu_lo = 0.0;
        r.nu_hi = 1.0;
        r.gamma_lo = 1.0;
        r.gamma_hi = 1.0 / s_inf(1.0);
        r.applies = policy.nu <= 1.0;
        if (!r.applies) r.violated = "nu <= 1";
        const double s = s_post(policy.nu);
        r.delay_bound = s > 0.0 ? 1.0 / s : kPosInf;
        return r;
    }
    if (policy.kind == RuleKind::PoorCusum) {
        // With ν ≤ 1 the discounted recursion never carries over, so the rule
        // is the Shewhart test with threshold ν / c.
        r.nu_lo = 0.0;
        r.nu_hi = 1.0;
        r.gamma_lo = 1.0;
        r.gamma_hi = 1.0 / s_inf(1.0 / policy.c);
        r.applies = policy.nu <= 1.0;
        if (!r.applies) r.violated = "nu <= 1";
        const double s = s_post(policy.nu / policy.c);
        r.delay_bound = s > 0.0 ? 1.0 / s : kPosInf;
        return r;
    }
    if (policy.kind == RuleKind::MixtureShewhart) {
        const auto* m2 = dynamic_cast<const TwoAlternativeModel*>(&model);
        if (m2 == nullptr) throw std::invalid_argument("mixture policy needs a two-alternative model");
        const double q = policy.q;
        const RegionInfima inf = region_infima(*m2, q);
        const double upper = std::min({q + (1.0 - q) * inf.lr1_on_a1_not_a2,
                                       (1.0 - q) + q * inf.lr2_on_not_a1_a2, 1.0});
        const double lower = inf.mixture_on_a1_a2 == kPosInf ? 0.0 : inf.mixture_on_a1_a2;
        r.nu_lo = lower;
        r.nu_hi = upper;
        const double s1 = mixture_survival(*m2, Measure::Alt1, q, policy.nu);
        const double s2 = mixture_survival(*m2, Measure::Alt2, q, policy.nu);
        const double s = std::min(s1, s2);
        r.delay_bound = s > 0.0 ? 1.0 / s : kPosInf;
        if (lower > upper) {
            r.applies = false;
            r.violated = "threshold interval is empty (infimum over A1 and A2 exceeds the upper bound)";
            return r;
        }
        r.gamma_lo = 1.0 / mixture_survival(*m2, Measure::Nominal, q, lower);
        r.gamma_hi = 1.0 / mixture_survival(*m2, Measure::Nominal, q, upper);
        if (policy.nu > upper) {
            r.violated = "nu <= upper bound of the threshold interval";
        } else if (policy.nu < lower) {
            r.violated = "nu >= infimum of the mixture over A1 and A2";
        }
        r.applies = r.violated.empty();
        return r;
    }
    throw std::invalid_argument(std::string("no classical range for ") + to_string(policy.kind));
}

}  // namespace shewhart
