#pragma once

#include "shewhart/lr_models.hpp"

namespace shewhart {

enum class MixtureMethod {
    Auto,        // closed form when the model provides one, quadrature otherwise
    Exact,       // closed form only (throws std::logic_error if unavailable)
    Quadrature,  // always integrate the observation density
};

// P_m((1−q)ℓ¹ + qℓ² ≥ ν) for a two-alternative model.
double mixture_survival(const TwoAlternativeModel& model, Measure m, double q, double nu,
                        MixtureMethod method = MixtureMethod::Auto);
double mixture_survival_log(const TwoAlternativeModel& model, Measure m, double q,
                            double log_nu, MixtureMethod method = MixtureMethod::Auto);

// log ν with P_m(mixture ≥ ν) = target_prob; target_prob = 1 gives -inf.
double mixture_log_quantile(const TwoAlternativeModel& model, Measure m, double q,
                            double target_prob, MixtureMethod method = MixtureMethod::Auto);

// Infima of ℓ¹ on A₁∩A₂ᶜ, ℓ² on A₁ᶜ∩A₂ and of the mixture on A₁∩A₂, where
// A_i = {ℓ^i ≤ 1}. Uses the model's closed form unless numeric is set.
RegionInfima region_infima(const TwoAlternativeModel& model, double q, bool numeric = false);

}  // namespace shewhart
