#include "shewhart/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "shewhart/errors.hpp"

namespace shewhart {

namespace {

template <class T>
T get(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw InvalidJob(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidJob(where + ": bad value for '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return get<T>(obj, key, where);
}

void require_object(const Json& j, const std::string& where) {
    if (!j.is_object()) throw InvalidJob(where + " must be a JSON object");
}

}  // namespace

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    require_object(obj, where);
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || item.key() == a;
        if (!ok) throw InvalidJob(where + ": unknown key '" + item.key() + "'");
    }
}

std::shared_ptr<const LikelihoodRatioModel> model_from_json(const Json& spec) {
    const std::string where = "model";
    require_object(spec, where);
    const auto type = get<std::string>(spec, "type", where);
    if (type == "gaussian_shift") {
        reject_unknown_keys(spec, {"type", "mu", "mu_seq"}, where);
        if (spec.contains("mu") == spec.contains("mu_seq")) {
            throw InvalidJob("model: give exactly one of 'mu' and 'mu_seq'");
        }
        if (spec.contains("mu")) {
            return std::make_shared<GaussianMeanShiftModel>(get<double>(spec, "mu", where));
        }
        return std::make_shared<GaussianMeanShiftModel>(get<std::vector<double>>(spec, "mu_seq", where));
    }
    if (type == "gaussian_two_sided") {
        reject_unknown_keys(spec, {"type", "mu"}, where);
        const double mu = get<double>(spec, "mu", where);
        if (!(mu > 0.0)) throw InvalidJob("model: mu must be > 0");
        return std::make_shared<TwoAlternativeGaussianModel>(mu, -mu);
    }
    if (type == "gaussian_two_alternative") {
        reject_unknown_keys(spec, {"type", "mu1", "mu2"}, where);
        return std::make_shared<TwoAlternativeGaussianModel>(get<double>(spec, "mu1", where),
                                                             get<double>(spec, "mu2", where));
    }
    if (type == "tabulated") {
        reject_unknown_keys(spec, {"type", "csv"}, where);
        return std::make_shared<TabulatedModel>(TabulatedModel::from_csv(get<std::string>(spec, "csv", where)));
    }
    throw InvalidJob("model: unknown type '" + type + "'");
}

Policy policy_from_json(const Json& spec) {
    const std::string where = "policy";
    reject_unknown_keys(spec, {"kind", "varpi", "nu", "q", "c", "fixed_n", "beta", "log_nu_schedule",
                               "case_label"},
                        where);
    Policy p;
    p.kind = rule_kind_from_string(get<std::string>(spec, "kind", where));
    p.varpi = get_or<double>(spec, "varpi", p.kind == RuleKind::StopAtZero ? 1.0 : 0.0, where);
    p.nu = get_or<double>(spec, "nu", p.nu, where);
    p.q = get_or<double>(spec, "q", p.q, where);
    p.c = get_or<double>(spec, "c", p.c, where);
    p.fixed_n = get_or<std::int64_t>(spec, "fixed_n", 0, where);
    p.case_label = get_or<std::string>(spec, "case_label", "", where);
    if (spec.contains("log_nu_schedule")) {
        ThresholdSchedule s;
        s.log_nu = get<std::vector<double>>(spec, "log_nu_schedule", where);
        s.beta = get_or<double>(spec, "beta", s.beta, where);
        p.schedule = std::move(s);
    } else if (spec.contains("beta")) {
        throw InvalidJob("policy: 'beta' only goes with 'log_nu_schedule'");
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw InvalidJob(e.what());
    }
    return p;
}

Json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

Json round_numbers(const Json& j) {
    if (j.is_number_float()) return num(j.get<double>());
    if (j.is_array() || j.is_object()) {
        Json out = j;
        for (auto& v : out) v = round_numbers(v);
        return out;
    }
    return j;
}

Json policy_to_json(const Policy& p) {
    Json j;
    j["kind"] = to_string(p.kind);
    j["varpi"] = p.varpi;
    if (!std::isnan(p.nu)) j["nu"] = p.nu;
    if (p.schedule) {
        j["beta"] = p.schedule->beta;
        j["log_nu_schedule"] = p.schedule->log_nu;
    }
    if (!std::isnan(p.q)) j["q"] = p.q;
    if (!std::isnan(p.c)) j["c"] = p.c;
    if (p.fixed_n != 0) j["fixed_n"] = p.fixed_n;
    if (!p.case_label.empty()) j["case_label"] = p.case_label;
    return j;
}

Json diagnostics_to_json(const CalibrationDiagnostics& d) {
    Json j;
    j["residuals"] = Json::object();
    for (const auto& [k, v] : d.residuals) j["residuals"][k] = v;
    if (d.rho_beta) j["rho_beta"] = *d.rho_beta;
    if (d.series_truncation_error) j["series_truncation_error"] = *d.series_truncation_error;
    if (d.D_of_q) j["D_of_q"] = *d.D_of_q;
    if (d.audit_horizon > 0) j["audit_horizon"] = d.audit_horizon;
    j["caveats"] = d.caveats;
    return j;
}

Json estimate_to_json(const Estimate& e) { return {{"value", num(e.value)}, {"se", num(e.se)}}; }

Json report_to_json(const EvaluationReport& r) {
    Json j;
    if (r.arl_inf_analytic) j["arl_inf_analytic"] = *r.arl_inf_analytic;
    if (r.arl_post_analytic) j["arl_post_analytic"] = *r.arl_post_analytic;
    j["arl_inf_mc"] = estimate_to_json(r.arl_inf_mc);
    j["truncation_count"] = r.truncation_count;
    j["truncation_bias"] = r.truncation_bias;
    Json rows = Json::array();
    for (const auto& row : r.per_t) {
        Json x;
        x["t"] = row.t;
        x["detection"] = estimate_to_json(row.detection);
        x["survival"] = estimate_to_json(row.survival);
        x["survivors"] = row.survivors;
        x["successes"] = row.successes;
        x["attempts"] = row.attempts;
        x["state_min"] = num(row.state_min);
        x["state_mean"] = num(row.state_mean);
        x["renewal"] = row.renewal;
        rows.push_back(x);
    }
    j["equalizer_table"] = rows;
    j["pollak_grid_inf"] = estimate_to_json(r.pollak_grid_inf);
    j["pollak_argmin_t"] = r.pollak_argmin_t;
    j["lorden_grid_inf"] = num(r.lorden_grid_inf);
    j["lorden_label"] = r.lorden_label;
    j["essinf_is_unconditional"] = r.essinf_is_unconditional;
    j["chi2"] = {{"stat", num(r.chi2_stat)}, {"dof", r.chi2_dof}, {"pvalue", num(r.chi2_pvalue)},
                 {"time_equalizer", r.time_equalizer}};
    Json bayes = Json::array();
    for (const auto& b : r.bayes) {
        Json x;
        x["pi"] = b.prior.pi;
        x["p"] = b.prior.p;
        x["shiryaev_mc"] = estimate_to_json(b.shiryaev_mc);
        if (b.shiryaev_analytic) x["shiryaev_analytic"] = *b.shiryaev_analytic;
        x["false_alarm_mc"] = estimate_to_json(b.false_alarm_mc);
        if (b.false_alarm_analytic) x["false_alarm_analytic"] = *b.false_alarm_analytic;
        bayes.push_back(x);
    }
    j["bayes"] = bayes;
    if (r.classical_delay) j["classical_delay"] = *r.classical_delay;
    j["caveats"] = r.caveats;
    return j;
}

EvaluationConfig evaluation_from_json(const Json& spec, const McConfig& mc) {
    EvaluationConfig c;
    c.seed = mc.seed;
    c.threads = mc.threads;
    if (spec.is_null()) return c;
    const std::string where = "evaluation";
    reject_unknown_keys(spec, {"n_paths", "horizon", "m", "t_grid", "prior_grid", "transient_d",
                               "alternative", "batches", "renewal_min_t", "estimate_arl"},
                        where);
    c.n_paths = get_or<std::int64_t>(spec, "n_paths", c.n_paths, where);
    c.horizon = get_or<std::int64_t>(spec, "horizon", c.horizon, where);
    c.m = get_or<std::int64_t>(spec, "m", c.m, where);
    c.t_grid = get_or<std::vector<std::int64_t>>(spec, "t_grid", c.t_grid, where);
    if (spec.contains("transient_d")) c.transient_d = get<std::int64_t>(spec, "transient_d", where);
    c.alternative = get_or<int>(spec, "alternative", c.alternative, where);
    c.batches = get_or<int>(spec, "batches", c.batches, where);
    c.renewal_min_t = get_or<std::int64_t>(spec, "renewal_min_t", c.renewal_min_t, where);
    c.estimate_arl = get_or<bool>(spec, "estimate_arl", c.estimate_arl, where);
    if (spec.contains("prior_grid")) {
        for (const auto& p : spec.at("prior_grid")) {
            reject_unknown_keys(p, {"pi", "p"}, "prior_grid entry");
            c.prior_grid.push_back({get<double>(p, "pi", "prior_grid"), get<double>(p, "p", "prior_grid")});
        }
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw InvalidJob(std::string("evaluation: ") + e.what());
    }
    return c;
}

}  // namespace shewhart
