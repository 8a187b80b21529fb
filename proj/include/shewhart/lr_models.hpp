#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shewhart/rng.hpp"

namespace shewhart {

// Probability measures a likelihood ratio can be evaluated under: the nominal
// (pre-change) law P∞ and up to two post-change laws P₀¹, P₀².
enum class Measure { Nominal, Alt1, Alt2 };

const char* to_string(Measure m);
Measure post_change_measure(int alternative);

// One time step of log-likelihood ratios. lr2 is NaN for single-alternative
// models.
struct LrSample {
    double lr1 = 0.0;
    double lr2 = std::numeric_limits<double>::quiet_NaN();
};

// Change-point model described through the laws of the likelihood ratios ℓ_t
// under each measure. Implementations are immutable after construction and
// safe to share between threads; sampling draws from an explicit generator.
class LikelihoodRatioModel {
public:
    virtual ~LikelihoodRatioModel() = default;

    virtual std::string type_name() const = 0;
    virtual int num_alternatives() const = 0;
    virtual bool time_varying() const = 0;

    // The laws of ℓ_t repeat with this period in t (1 for i.i.d. models).
    virtual std::int64_t period() const { return 1; }

    // Whether the model declares continuous, strictly decreasing survival
    // functions. Calibration refuses models that do not.
    virtual bool declares_continuity() const { return true; }

    // P_m(ℓ^lr_t ≥ exp(log_nu)) for lr ∈ {1, 2} and t ≥ 1.
    virtual double survival_log(Measure m, int lr, std::int64_t t, double log_nu) const = 0;

    virtual LrSample sample(Measure m, std::int64_t t, Rng& rng) const = 0;

    // log ν with P₀,t(ℓ_t ≥ ν) = beta, when the model knows it in closed form.
    virtual std::optional<double> log_post_quantile_closed_form(std::int64_t /*t*/,
                                                                double /*beta*/) const {
        return std::nullopt;
    }

    double survival(Measure m, int lr, std::int64_t t, double nu) const;
};

double survival_inf(const LikelihoodRatioModel& model, std::int64_t t, double nu);
double survival_post(const LikelihoodRatioModel& model, int alternative, std::int64_t t,
                     double nu);

// log ν such that P_m(ℓ^lr_t ≥ ν) = target_prob. target_prob = 1 maps to ν = 0
// (log ν = -inf). Solved by bisection in log ν with geometric bracket expansion.
double log_quantile(const LikelihoodRatioModel& model, Measure m, int lr, std::int64_t t,
                    double target_prob);

// ν with survival_inf(t, ν) = target_prob (absolute tolerance 1e-12).
double quantile_inf(const LikelihoodRatioModel& model, std::int64_t t, double target_prob);

// ν_t with P₀,t(ℓ_t ≥ ν_t) = beta, closed form when available.
double log_quantile_post(const LikelihoodRatioModel& model, std::int64_t t, double beta);

struct ContinuityAudit {
    bool ok = true;
    std::string detail;
};

// Grid audit of the continuity contract at time t: survival functions must be
// strictly decreasing on their support and free of jumps (checked by refining
// the grid and requiring the largest step to shrink).
ContinuityAudit audit_continuity(const LikelihoodRatioModel& model, std::int64_t t,
                                 int grid_points = 400);

// Throws ModelContractViolation unless the model declares the contract and
// passes the audit for every t in one period (capped at 64 time points).
void require_continuity(const LikelihoodRatioModel& model);

inline constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

// Change scenario for path generation: observations at times s ≤ tau follow
// P∞, times in (tau, tau + duration] follow the chosen alternative, and later
// times revert to P∞. duration = kNever is a persistent change.
struct RegimeSpec {
    std::int64_t tau = kNever;
    int alternative = 1;
    std::int64_t duration = kNever;

    Measure measure_at(std::int64_t s) const;
};

std::vector<LrSample> sample_path(const LikelihoodRatioModel& model, const RegimeSpec& regime,
                                  std::int64_t length, Rng& rng);

// ---------------------------------------------------------------------------
// Concrete models

// Unit-variance Gaussian observations, mean 0 before the change and μ_t > 0
// after it: ℓ_t = exp(μ_t ξ_t − μ_t²/2). A sequence of means is repeated
// cyclically, which makes time-varying models periodic.
class GaussianMeanShiftModel final : public LikelihoodRatioModel {
public:
    explicit GaussianMeanShiftModel(double mu);
    explicit GaussianMeanShiftModel(std::vector<double> mu_seq);

    std::string type_name() const override { return "gaussian_shift"; }
    int num_alternatives() const override { return 1; }
    bool time_varying() const override { return time_varying_; }
    std::int64_t period() const override { return static_cast<std::int64_t>(mu_seq_.size()); }

    double survival_log(Measure m, int lr, std::int64_t t, double log_nu) const override;
    LrSample sample(Measure m, std::int64_t t, Rng& rng) const override;
    std::optional<double> log_post_quantile_closed_form(std::int64_t t,
                                                        double beta) const override;

    double mu_at(std::int64_t t) const;
    const std::vector<double>& mu_seq() const { return mu_seq_; }

private:
    std::vector<double> mu_seq_;
    bool time_varying_ = false;
};

// Infima entering the Lorden-range condition for mixture rules, over the
// observation sets A_i = {ℓ^i ≤ 1}. Empty sets give +inf.
struct RegionInfima {
    double lr1_on_a1_not_a2 = 0.0;
    double lr2_on_not_a1_a2 = 0.0;
    double mixture_on_a1_a2 = 0.0;
};

// i.i.d. model with two post-change laws, both likelihood ratios being known
// functions of a scalar observation ξ.
class TwoAlternativeModel : public LikelihoodRatioModel {
public:
    int num_alternatives() const override { return 2; }
    bool time_varying() const override { return false; }

    virtual double log_lr_at(int lr, double x) const = 0;
    virtual double observation_pdf(Measure m, double x) const = 0;
    // Interval outside which the observation density under m is negligible.
    virtual std::pair<double, double> observation_window(Measure m) const = 0;

    // Exact P_m((1−q)ℓ¹ + qℓ² ≥ exp(log_nu)) when the model has one.
    virtual std::optional<double> mixture_survival_exact(Measure /*m*/, double /*q*/,
                                                         double /*log_nu*/) const {
        return std::nullopt;
    }
    virtual std::optional<RegionInfima> region_infima_closed_form(double /*q*/) const {
        return std::nullopt;
    }

    // log((1−q)ℓ¹(x) + qℓ²(x)).
    double log_mixture_at(double q, double x) const;
};

// Unit-variance Gaussian observations with nominal mean 0 and post-change
// means mu1 or mu2. mu2 = −mu1 is the symmetric two-sided case, where the
// q = 0.5 statistic is e^{−μ²/2} cosh(μξ).
class TwoAlternativeGaussianModel final : public TwoAlternativeModel {
public:
    TwoAlternativeGaussianModel(double mu1, double mu2);
    static TwoAlternativeGaussianModel two_sided(double mu) { return {mu, -mu}; }

    std::string type_name() const override { return "gaussian_two_alternative"; }
    double survival_log(Measure m, int lr, std::int64_t t, double log_nu) const override;
    LrSample sample(Measure m, std::int64_t t, Rng& rng) const override;

    double log_lr_at(int lr, double x) const override;
    double observation_pdf(Measure m, double x) const override;
    std::pair<double, double> observation_window(Measure m) const override;
    std::optional<double> mixture_survival_exact(Measure m, double q,
                                                 double log_nu) const override;
    std::optional<RegionInfima> region_infima_closed_form(double q) const override;

    double mu1() const { return mu1_; }
    double mu2() const { return mu2_; }
    bool symmetric() const { return mu2_ == -mu1_; }
    double mean(Measure m) const;

    // P_m(|ξ| ≥ arccosh(ν e^{μ²/2})/μ), the q = 0.5 symmetric closed form.
    double symmetric_half_survival(Measure m, double log_nu) const;

private:
    double slope(int lr) const { return lr == 1 ? mu1_ : mu2_; }

    double mu1_;
    double mu2_;
};

// Single-alternative i.i.d. model given by tabulated survival functions of ℓ
// (columns nu, s_inf, s_post1[, s_post2]) with monotone PCHIP interpolation.
// The table must start at nu = 0 with survival 1; survival is 0 beyond the
// last row. A second post-change column adds P₀²(ℓ ≥ ν) for the same ℓ.
class TabulatedModel final : public LikelihoodRatioModel {
public:
    struct Table {
        std::vector<double> nu;
        std::vector<double> s_inf;
        std::vector<double> s_post1;
        std::vector<double> s_post2;  // optional, empty when absent
    };

    explicit TabulatedModel(Table table);
    static TabulatedModel from_csv(const std::string& path);
    static TabulatedModel from_csv_text(const std::string& text);

    std::string type_name() const override { return "tabulated"; }
    int num_alternatives() const override { return table_.s_post2.empty() ? 1 : 2; }
    bool time_varying() const override { return false; }
    bool declares_continuity() const override { return continuous_; }

    double survival_log(Measure m, int lr, std::int64_t t, double log_nu) const override;
    LrSample sample(Measure m, std::int64_t t, Rng& rng) const override;

    const Table& table() const { return table_; }

private:
    struct Interpolants;

    Table table_;
    std::shared_ptr<const Interpolants> interp_;
    bool continuous_ = true;
};

}  // namespace shewhart
