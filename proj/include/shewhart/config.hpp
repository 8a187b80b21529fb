#pragma once

#include <initializer_list>
#include <memory>
#include <string>

#include <json.hpp>

#include "shewhart/calibration.hpp"
#include "shewhart/evaluation.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/monte_carlo.hpp"

namespace shewhart {

using Json = nlohmann::json;

// Throws InvalidJob naming the first key of obj not in allowed.
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where);

// Model specs:
//   {"type": "gaussian_shift", "mu": 1.0} or {"type": "gaussian_shift", "mu_seq": [...]}
//   {"type": "gaussian_two_sided", "mu": 6.1805}
//   {"type": "gaussian_two_alternative", "mu1": 1.0, "mu2": 2.0}
//   {"type": "tabulated", "csv": "path.csv"}
std::shared_ptr<const LikelihoodRatioModel> model_from_json(const Json& spec);

Policy policy_from_json(const Json& spec);
Json policy_to_json(const Policy& policy);
Json diagnostics_to_json(const CalibrationDiagnostics& d);
Json estimate_to_json(const Estimate& e);
Json report_to_json(const EvaluationReport& r);

// Fills an evaluation config from {"n_paths", "horizon", "m", "t_grid",
// "prior_grid": [{"pi", "p"}], "transient_d", "alternative", "batches",
// "renewal_min_t", "estimate_arl"}; absent keys keep their defaults.
EvaluationConfig evaluation_from_json(const Json& spec, const McConfig& mc);

// Number rounded to 12 significant digits; non-finite values become strings.
Json num(double v);

// Applies num() to every floating-point leaf.
Json round_numbers(const Json& j);

}  // namespace shewhart
