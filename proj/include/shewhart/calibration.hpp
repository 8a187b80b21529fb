#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shewhart/lr_models.hpp"

namespace shewhart {

// Zero-modified geometric change-time prior: P(τ ≤ −1) = pi and
// P(τ = t) = (1 − pi) p (1 − p)^t for t ≥ 0.
struct GeometricPrior {
    double pi = 0.0;
    double p = 1.0;

    void validate() const;
};

enum class RuleKind {
    Shewhart,
    TimeVaryingShewhart,
    MixtureShewhart,
    Cusum,           // Y_t = max{Y_{t−1}, 1} ℓ_t, Y_0 = 0
    ClassicalCusum,  // Y_t = max{Y_{t−1} ℓ_t, 1}, Y_0 = 1
    PoorCusum,       // Y_t = max{Y_{t−1}, 1} c ℓ_t, Y_0 = 0
    StopAtZero,
    FixedSample,     // T ≡ n
};

const char* to_string(RuleKind kind);
RuleKind rule_kind_from_string(const std::string& name);

// Thresholds ν_t(β), one per time point of a period of the model; t ≥ 1 maps
// to entry (t − 1) mod size.
struct ThresholdSchedule {
    double beta = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> log_nu;

    double log_nu_at(std::int64_t t) const;
};

struct Policy {
    RuleKind kind = RuleKind::Shewhart;
    double varpi = 0.0;
    double nu = std::numeric_limits<double>::quiet_NaN();
    std::optional<ThresholdSchedule> schedule;
    double q = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
    std::int64_t fixed_n = 0;
    std::string case_label;

    static Policy shewhart(double nu, double varpi = 0.0);
    static Policy time_varying(ThresholdSchedule schedule);
    static Policy mixture(double q, double nu);
    static Policy cusum(double nu);
    static Policy classical_cusum(double nu);
    static Policy poor_cusum(double nu, double c);
    static Policy stop_at_zero();
    static Policy fixed_sample(std::int64_t n);

    // log ν_t for threshold rules (constant or scheduled).
    double log_nu_at(std::int64_t t) const;

    // Throws std::invalid_argument unless exactly the fields demanded by kind
    // are populated with admissible values.
    void validate() const;
};

struct CalibrationDiagnostics {
    std::optional<double> rho_beta;
    std::optional<double> series_truncation_error;
    std::map<std::string, double> residuals;
    std::optional<double> D_of_q;
    std::int64_t audit_horizon = 0;
    std::vector<std::string> caveats;
};

struct CalibrationResult {
    Policy policy;
    CalibrationDiagnostics diagnostics;
    // Optimal value of the criterion attained by the policy (β for the
    // detection-probability criteria, the Shiryaev measure for Bayesian ones).
    double value = std::numeric_limits<double>::quiet_NaN();
};

// Boundary between the randomized and the pure-threshold Bayesian solutions.
double shiryaev_case_bound(const LikelihoodRatioModel& model, const GeometricPrior& prior);
double shiryaev_nu_star(const GeometricPrior& prior);

CalibrationResult calibrate_shiryaev(const LikelihoodRatioModel& model,
                                     const GeometricPrior& prior, double alpha);
CalibrationResult calibrate_shiryaev_maxmin(const LikelihoodRatioModel& model, double gamma);
CalibrationResult calibrate_lorden_pollak(const LikelihoodRatioModel& model, double gamma);

struct TimeVaryingOptions {
    double trunc_eps = 1e-12;
    std::int64_t audit_horizon = 10000;
};

// Per-time quantities of a threshold schedule: rho[t−1] = P∞,t(ℓ_t < ν_t).
std::vector<double> nominal_continue_probs(const LikelihoodRatioModel& model,
                                           const ThresholdSchedule& schedule,
                                           std::int64_t count);
ThresholdSchedule threshold_schedule(const LikelihoodRatioModel& model, double beta);

struct SeriesValue {
    double value = 0.0;          // 1 + Σ_t Π_{l≤t} P∞,l(ℓ_l < ν_l)
    double tail_bound = 0.0;     // bound on the omitted tail
    double rho_hat = 0.0;        // running max of the factors
    std::int64_t terms = 0;
    bool capped = false;         // stopped early after exceeding the cap
};

// Expected run length of the scheduled Shewhart rule under P∞ by the
// truncated series. Summation stops once the partial sum exceeds cap.
SeriesValue expected_run_length_series(const std::vector<double>& rho_period, double trunc_eps,
                                       double cap = std::numeric_limits<double>::infinity());

CalibrationResult calibrate_time_varying(const LikelihoodRatioModel& model, double gamma,
                                         const TimeVaryingOptions& opts = {});

// Case tests for the mixture rule. D(q) is the signed gap
// P₀¹(S(q) = 1) − P₀²(S(q) = 1) at the threshold ν(q) matching E∞ = γ.
struct MixtureCaseConditions {
    double nu0 = 0.0;
    double nu1 = 0.0;
    double gap_i = 0.0;   // P₀²(ℓ¹≥ν(0)) − P₀¹(ℓ¹≥ν(0)), case i iff ≥ 0
    double gap_ii = 0.0;  // P₀¹(ℓ²≥ν(1)) − P₀²(ℓ²≥ν(1)), case ii iff ≥ 0
    bool case_i = false;
    bool case_ii = false;
    bool case_iii = false;  // D changes sign strictly on a q-grid over [0, 1]
    int count() const { return int(case_i) + int(case_ii) + int(case_iii); }
};

double mixture_threshold_log(const TwoAlternativeModel& model, double q, double gamma);
double mixture_gap(const TwoAlternativeModel& model, double q, double gamma);
MixtureCaseConditions mixture_case_conditions(const TwoAlternativeModel& model, double gamma,
                                              int q_grid = 64);

CalibrationResult calibrate_mixture(const TwoAlternativeModel& model, double gamma);

struct ClassicalRange {
    bool applies = false;
    double gamma_lo = std::numeric_limits<double>::quiet_NaN();
    double gamma_hi = std::numeric_limits<double>::quiet_NaN();
    double nu_lo = std::numeric_limits<double>::quiet_NaN();
    double nu_hi = std::numeric_limits<double>::quiet_NaN();
    double delay_bound = std::numeric_limits<double>::quiet_NaN();
    std::string violated;  // empty when applies
};

// Range of thresholds/ARL levels on which the threshold rule is also optimal
// for the classical worst-case delay criterion, and the delay it attains.
ClassicalRange classical_optimality_range(const Policy& policy, const LikelihoodRatioModel& model);

}  // namespace shewhart
