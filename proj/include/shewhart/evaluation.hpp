#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shewhart/calibration.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/monte_carlo.hpp"

namespace shewhart {

// ---------------------------------------------------------------------------
// Closed forms for threshold rules on i.i.d. models

struct ArlAnalytic {
    double e_inf = 0.0;   // E∞[S]
    double e_post = 0.0;  // E₀[S]
};

// E_i[S] = 1 / P_i(ℓ ≥ ν). Throws ZeroSurvival when a survival is 0.
ArlAnalytic arl_analytic(const LikelihoodRatioModel& model, double nu);

// Modified Bayesian measure (m = 1) of the randomized constant-threshold rule.
double shiryaev_measure_analytic(const Policy& policy, const LikelihoodRatioModel& model,
                                 const GeometricPrior& prior);

// P(T ≤ τ) of the randomized constant-threshold rule.
double false_alarm_prob_analytic(const Policy& policy, const LikelihoodRatioModel& model,
                                 const GeometricPrior& prior);

// Worst-case (classical) average delay of a threshold rule: 1 / P₀(ℓ ≥ ν).
double classical_lorden_shewhart(const LikelihoodRatioModel& model, double nu);
// Two alternatives: max_i 1 / P₀ⁱ(mixture ≥ ν).
double classical_lorden_mixture(const TwoAlternativeModel& model, double q, double nu);

// ---------------------------------------------------------------------------
// Monte Carlo primitives

struct RunLengthMc {
    Estimate mean_T;
    Estimate lr_at_stop_per_T;  // E[ℓ_T] / E[T], ℓ_0 = 0
    std::int64_t paths = 0;
    std::int64_t truncated = 0;
};

// Run lengths of the rule on paths following regime (tau = kNever: P∞).
RunLengthMc mc_run_length(const Policy& policy, const LikelihoodRatioModel& model,
                          const RegimeSpec& regime, std::int64_t n_paths, std::int64_t horizon,
                          const McConfig& mc, std::uint64_t tag = 1);

struct ConditionalMc {
    std::int64_t t = 0;
    Estimate detection;   // P_t(t < T ≤ t + m | T > t)
    Estimate survival;    // P∞(T > t), NaN when the prefix was skipped
    std::int64_t survivors = 0;
    std::int64_t successes = 0;
    std::int64_t attempts = 0;
    double state_min = std::numeric_limits<double>::quiet_NaN();   // m = 1 only
    double state_mean = std::numeric_limits<double>::quiet_NaN();  // m = 1 only
    bool renewal = false;
};

struct ConditionalOptions {
    std::int64_t m = 1;
    int alternative = 1;
    std::optional<std::int64_t> transient_d;
    std::int64_t renewal_min_t = 50;  // skip the prefix of memoryless rules from here on
    std::int64_t max_attempt_factor = 2000;
};

// Conditional detection probability at change time t by rejection sampling:
// each batch simulates P∞ prefixes until it has collected its share of
// survivors, then continues them under the post-change law.
ConditionalMc mc_conditional_detection(const Policy& policy, const LikelihoodRatioModel& model,
                                       std::int64_t t, std::int64_t n_survivors,
                                       const ConditionalOptions& opts, const McConfig& mc);

struct BayesMc {
    Estimate shiryaev;     // P(τ < T ≤ τ + m | T > τ) with the τ ≤ −1 convention
    Estimate false_alarm;  // P(T ≤ τ)
};

BayesMc mc_bayes(const Policy& policy, const LikelihoodRatioModel& model,
                 const GeometricPrior& prior, std::int64_t m, int alternative,
                 std::int64_t n_paths, const McConfig& mc);

// ---------------------------------------------------------------------------
// Full report

struct EvaluationConfig {
    std::int64_t n_paths = 10000;
    std::int64_t horizon = 100000;
    std::int64_t m = 1;
    std::vector<std::int64_t> t_grid{0, 1, 2, 5, 10};
    std::vector<GeometricPrior> prior_grid;
    std::optional<std::int64_t> transient_d;
    int alternative = 1;
    std::uint64_t seed = 1;
    int threads = 0;
    int batches = 100;
    std::int64_t renewal_min_t = 50;
    bool estimate_arl = true;

    void validate() const;
};

struct PriorRow {
    GeometricPrior prior;
    Estimate shiryaev_mc;
    std::optional<double> shiryaev_analytic;
    Estimate false_alarm_mc;
    std::optional<double> false_alarm_analytic;
};

struct EvaluationReport {
    std::optional<double> arl_inf_analytic;
    std::optional<double> arl_post_analytic;
    Estimate arl_inf_mc;
    std::int64_t truncation_count = 0;
    bool truncation_bias = false;

    std::vector<ConditionalMc> per_t;
    Estimate pollak_grid_inf;
    std::int64_t pollak_argmin_t = -1;
    double lorden_grid_inf = std::numeric_limits<double>::quiet_NaN();
    std::string lorden_label;
    bool essinf_is_unconditional = false;

    double chi2_stat = std::numeric_limits<double>::quiet_NaN();
    int chi2_dof = 0;
    double chi2_pvalue = std::numeric_limits<double>::quiet_NaN();
    bool time_equalizer = false;

    std::vector<PriorRow> bayes;
    std::optional<double> classical_delay;
    std::vector<std::string> caveats;
};

// Chi-square homogeneity test of per-t success proportions.
struct HomogeneityTest {
    double stat = 0.0;
    int dof = 0;
    double pvalue = 1.0;
};
HomogeneityTest chi_square_homogeneity(const std::vector<std::int64_t>& successes,
                                       const std::vector<std::int64_t>& trials);

EvaluationReport modified_measures_mc(const Policy& policy, const LikelihoodRatioModel& model,
                                      const EvaluationConfig& config);

}  // namespace shewhart
