#include "shewhart/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shewhart/errors.hpp"
#include "shewhart/mixture.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

Detector::Detector(const Policy& policy) : policy_(policy) {
    policy_.validate();
    state_.kind = policy_.kind;
    switch (policy_.kind) {
        case RuleKind::ClassicalCusum:
            state_.log_stat = 0.0;  // Y_0 = 1
            break;
        case RuleKind::PoorCusum:
            log_c_ = std::log(policy_.c);
            break;
        default:
            break;
    }
}

double Detector::threshold_log(std::int64_t t) const { return policy_.log_nu_at(t); }

bool Detector::memoryless() const {
    return policy_.kind == RuleKind::Shewhart || policy_.kind == RuleKind::TimeVaryingShewhart ||
           policy_.kind == RuleKind::MixtureShewhart;
}

void Detector::advance_to(std::int64_t t) {
    if (!memoryless()) throw std::logic_error("advance_to needs a memoryless rule");
    if (stopped()) throw SteppedAfterStop("detector already stopped");
    if (t < state_.t) throw std::invalid_argument("cannot move a detector back in time");
    state_.t = t;
    state_.log_stat = kNegInf;
}

StepResult Detector::step(double log_lr1, double log_lr2) {
    if (stopped()) {
        throw SteppedAfterStop("detector stopped at t = " + std::to_string(*state_.stopped_at));
    }
    const std::int64_t t = state_.t + 1;
    bool stop = false;
    switch (policy_.kind) {
        case RuleKind::Shewhart:
        case RuleKind::TimeVaryingShewhart:
            state_.log_stat = log_lr1;
            stop = log_lr1 >= threshold_log(t);
            break;
        case RuleKind::MixtureShewhart: {
            if (std::isnan(log_lr2)) throw std::invalid_argument("mixture rule needs both ratios");
            const double q = policy_.q;
            const double a = q < 1.0 ? std::log1p(-q) + log_lr1 : kNegInf;
            const double b = q > 0.0 ? std::log(q) + log_lr2 : kNegInf;
            state_.log_stat = log_sum_exp(a, b);
            stop = state_.log_stat >= threshold_log(t);
            break;
        }
        case RuleKind::Cusum:
            state_.log_stat = std::max(state_.log_stat, 0.0) + log_lr1;
            stop = state_.log_stat >= threshold_log(t);
            break;
        case RuleKind::ClassicalCusum:
            state_.log_stat = std::max(state_.log_stat + log_lr1, 0.0);
            stop = state_.log_stat >= threshold_log(t);
            break;
        case RuleKind::PoorCusum:
            state_.log_stat = std::max(state_.log_stat, 0.0) + log_c_ + log_lr1;
            stop = state_.log_stat >= threshold_log(t);
            break;
        case RuleKind::FixedSample:
            state_.log_stat = log_lr1;
            stop = t >= policy_.fixed_n;
            break;
        case RuleKind::StopAtZero:
            throw std::logic_error("stop-at-zero rule never takes observations");
    }
    state_.t = t;
    if (stop) {
        state_.stopped_at = t;
        return StepResult::Stop;
    }
    return StepResult::Continue;
}

double Detector::next_stop_probability(const LikelihoodRatioModel& model, Measure m) const {
    if (stopped()) throw SteppedAfterStop("detector already stopped");
    const std::int64_t t = state_.t + 1;
    const int lr = 1;  // single-statistic rules always track ℓ¹
    const double y = threshold_log(t);
    switch (policy_.kind) {
        case RuleKind::Shewhart:
        case RuleKind::TimeVaryingShewhart:
            return model.survival_log(m, lr, t, y);
        case RuleKind::MixtureShewhart: {
            const auto* m2 = dynamic_cast<const TwoAlternativeModel*>(&model);
            if (m2 == nullptr) throw std::invalid_argument("mixture rule needs a two-alternative model");
            return mixture_survival_log(*m2, m, policy_.q, y);
        }
        case RuleKind::Cusum:
            return model.survival_log(m, lr, t, y - std::max(state_.log_stat, 0.0));
        case RuleKind::ClassicalCusum:
            if (y <= 0.0) return 1.0;
            return model.survival_log(m, lr, t, y - state_.log_stat);
        case RuleKind::PoorCusum:
            return model.survival_log(m, lr, t, y - log_c_ - std::max(state_.log_stat, 0.0));
        case RuleKind::FixedSample:
            return t >= policy_.fixed_n ? 1.0 : 0.0;
        case RuleKind::StopAtZero:
            break;
    }
    throw std::logic_error("stop-at-zero rule never takes observations");
}

StartDecision apply_randomization(const Policy& policy, Rng& rng) {
    if (policy.varpi <= 0.0) return StartDecision::RunDetector;
    if (policy.varpi >= 1.0) return StartDecision::StopAtZero;
    return bernoulli(rng, policy.varpi) ? StartDecision::StopAtZero : StartDecision::RunDetector;
}

RunOutcome run_to_stop(const Policy& policy, const std::vector<LrSample>& path,
                       StartDecision start) {
    if (start == StartDecision::StopAtZero) return {0, false};
    Detector d(policy);
    for (const auto& s : path) {
        if (d.step(s) == StepResult::Stop) return {d.t(), false};
    }
    return {static_cast<std::int64_t>(path.size()), true};
}

RunOutcome run_to_stop(const Policy& policy, const std::vector<LrSample>& path, Rng& rng) {
    return run_to_stop(policy, path, apply_randomization(policy, rng));
}

}  // namespace shewhart
