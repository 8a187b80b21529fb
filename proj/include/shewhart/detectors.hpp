#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "shewhart/calibration.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/rng.hpp"

namespace shewhart {

struct DetectorState {
    RuleKind kind = RuleKind::Shewhart;
    std::int64_t t = 0;
    double log_stat = -std::numeric_limits<double>::infinity();
    std::optional<std::int64_t> stopped_at;
};

enum class StepResult { Continue, Stop };

// Online stopping rule fed one log-likelihood ratio (two for mixture rules)
// per time step. All comparisons happen in the log domain. Randomization at
// time 0 is handled outside, by apply_randomization.
class Detector {
public:
    explicit Detector(const Policy& policy);

    StepResult step(double log_lr1,
                    double log_lr2 = std::numeric_limits<double>::quiet_NaN());
    StepResult step(const LrSample& s) { return step(s.lr1, s.lr2); }

    const DetectorState& state() const { return state_; }
    std::int64_t t() const { return state_.t; }
    bool stopped() const { return state_.stopped_at.has_value(); }

    // Jumps a memoryless rule to time t as if it had not stopped before.
    // Only valid for rules whose state carries no information beyond t.
    void advance_to(std::int64_t t);
    bool memoryless() const;

    // P(the next step stops | current state) when ℓ_{t+1} follows m.
    double next_stop_probability(const LikelihoodRatioModel& model, Measure m) const;

private:
    double threshold_log(std::int64_t t) const;

    Policy policy_;
    DetectorState state_;
    double log_c_ = 0.0;
};

enum class StartDecision { StopAtZero, RunDetector };

StartDecision apply_randomization(const Policy& policy, Rng& rng);

struct RunOutcome {
    std::int64_t T = 0;
    bool truncated = false;  // the path ended before the rule stopped; T = path length
};

RunOutcome run_to_stop(const Policy& policy, const std::vector<LrSample>& path,
                       StartDecision start);
RunOutcome run_to_stop(const Policy& policy, const std::vector<LrSample>& path, Rng& rng);

}  // namespace shewhart
