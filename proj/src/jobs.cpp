#include "shewhart/jobs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "shewhart/errors.hpp"
#include "shewhart/mixture.hpp"
#include "shewhart/normal.hpp"
#include "shewhart/oracle.hpp"

#ifndef SHEWHART_VERSION
#define SHEWHART_VERSION "dev"
#endif

namespace shewhart {

bool JobResult::ok() const { return first_failure() == nullptr; }

const Check* JobResult::first_failure() const {
    for (const auto& c : checks) {
        if (!c.pass) return &c;
    }
    return nullptr;
}

std::uint64_t job_hash(const std::string& command, const Json& job) {
    const std::string text = command + "\n" + job.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

Json finalize_report(const JobResult& result, const std::string& command, const Json& job,
                     const JobContext& ctx) {
    Json out = result.report;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(job_hash(command, job)));
    out["command"] = command;
    out["version"] = SHEWHART_VERSION;
    out["job_hash"] = hash;
    out["seed"] = ctx.seed;
    Json checks = Json::array();
    for (const auto& c : result.checks) {
        Json x{{"name", c.name}, {"pass", c.pass}};
        if (!c.detail.empty()) x["detail"] = c.detail;
        checks.push_back(x);
    }
    out["checks"] = checks;
    out["pass"] = result.ok();
    return round_numbers(out);
}

namespace {

std::string show(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void add_check(JobResult& r, std::string name, bool pass, std::string detail = {}) {
    r.checks.push_back({std::move(name), pass, std::move(detail)});
}

// |a − b| ≤ k·se, with se = 0 demanding equality.
bool within_se(double a, double b, double se, double k) {
    if (std::isnan(a) || std::isnan(b)) return false;
    return std::abs(a - b) <= k * (std::isnan(se) ? 0.0 : se);
}

double get_num(const Json& obj, const char* key, double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<double>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidJob(std::string("bad numeric value for '") + key + "'");
    }
}

std::int64_t get_int(const Json& obj, const char* key, std::int64_t fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<std::int64_t>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidJob(std::string("bad integer value for '") + key + "'");
    }
}

const Json& require(const Json& job, const char* key) {
    if (!job.contains(key)) throw InvalidJob(std::string("job is missing '") + key + "'");
    return job.at(key);
}

std::string get_criterion(const Json& job) {
    try {
        return require(job, "criterion").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidJob("criterion must be a string");
    }
}

const TwoAlternativeModel& as_two(const LikelihoodRatioModel& model) {
    const auto* m2 = dynamic_cast<const TwoAlternativeModel*>(&model);
    if (m2 == nullptr) throw InvalidJob("this criterion needs a two-alternative model");
    return *m2;
}

CalibrationResult calibrate_with(const LikelihoodRatioModel& model, const std::string& criterion,
                                 const Json& params) {
    if (criterion == "shiryaev") {
        reject_unknown_keys(params, {"alpha", "pi", "p"}, "params");
        GeometricPrior prior{get_num(params, "pi", NAN), get_num(params, "p", NAN)};
        return calibrate_shiryaev(model, prior, get_num(params, "alpha", NAN));
    }
    if (criterion == "shiryaev_maxmin") {
        reject_unknown_keys(params, {"gamma"}, "params");
        return calibrate_shiryaev_maxmin(model, get_num(params, "gamma", NAN));
    }
    if (criterion == "lorden_pollak") {
        reject_unknown_keys(params, {"gamma"}, "params");
        return calibrate_lorden_pollak(model, get_num(params, "gamma", NAN));
    }
    if (criterion == "time_varying") {
        reject_unknown_keys(params, {"gamma", "trunc_eps", "audit_horizon"}, "params");
        TimeVaryingOptions opts;
        opts.trunc_eps = get_num(params, "trunc_eps", opts.trunc_eps);
        opts.audit_horizon = get_int(params, "audit_horizon", opts.audit_horizon);
        return calibrate_time_varying(model, get_num(params, "gamma", NAN), opts);
    }
    if (criterion == "mixture") {
        reject_unknown_keys(params, {"gamma"}, "params");
        return calibrate_mixture(as_two(model), get_num(params, "gamma", NAN));
    }
    throw InvalidJob("unknown criterion '" + criterion + "'");
}

Json classical_range_json(const ClassicalRange& r) {
    Json j;
    j["applies"] = r.applies;
    j["gamma_interval"] = {num(r.gamma_lo), num(r.gamma_hi)};
    j["nu_interval"] = {num(r.nu_lo), num(r.nu_hi)};
    j["delay_bound"] = num(r.delay_bound);
    if (!r.violated.empty()) j["violated"] = r.violated;
    return j;
}

bool has_classical_range(const Policy& p) {
    return p.kind == RuleKind::Shewhart || p.kind == RuleKind::MixtureShewhart ||
           p.kind == RuleKind::Cusum || p.kind == RuleKind::PoorCusum;
}

void residual_checks(JobResult& r, const CalibrationDiagnostics& d, double tol = 1e-9) {
    for (const auto& [name, v] : d.residuals) {
        add_check(r, "residual:" + name, v < tol, show(v));
    }
}

}  // namespace

// ---------------------------------------------------------------------------

JobResult run_calibrate(const Json& job, const JobContext&) {
    reject_unknown_keys(job, {"command", "seed", "output", "model", "criterion", "params"}, "job");
    const auto model = model_from_json(require(job, "model"));
    const auto criterion = get_criterion(job);
    const auto cal = calibrate_with(*model, criterion, job.value("params", Json::object()));
    JobResult r;
    r.report["criterion"] = criterion;
    r.report["model"] = job.at("model");
    r.report["policy"] = policy_to_json(cal.policy);
    r.report["diagnostics"] = diagnostics_to_json(cal.diagnostics);
    r.report["value"] = num(cal.value);
    if (has_classical_range(cal.policy) && !model->time_varying()) {
        r.report["classical_range"] = classical_range_json(classical_optimality_range(cal.policy, *model));
    }
    residual_checks(r, cal.diagnostics);
    return r;
}

JobResult run_simulate(const Json& job, const JobContext& ctx) {
    reject_unknown_keys(job, {"command", "seed", "output", "model", "criterion", "params", "policy",
                              "evaluation"},
                        "job");
    const auto model = model_from_json(require(job, "model"));
    Policy policy;
    JobResult r;
    if (job.contains("policy")) {
        if (job.contains("criterion")) throw InvalidJob("give either 'policy' or 'criterion', not both");
        policy = policy_from_json(job.at("policy"));
    } else {
        const auto cal = calibrate_with(*model, get_criterion(job), job.value("params", Json::object()));
        policy = cal.policy;
        r.report["calibration"] = {{"value", num(cal.value)},
                                   {"diagnostics", diagnostics_to_json(cal.diagnostics)}};
        residual_checks(r, cal.diagnostics);
    }
    const auto cfg = evaluation_from_json(job.value("evaluation", Json()), {ctx.seed, ctx.threads, 100});
    const auto rep = modified_measures_mc(policy, *model, cfg);
    r.report["policy"] = policy_to_json(policy);
    r.report["report"] = report_to_json(rep);

    if (rep.arl_inf_analytic && cfg.estimate_arl && !rep.truncation_bias) {
        add_check(r, "arl_analytic_vs_mc", within_se(rep.arl_inf_mc.value, *rep.arl_inf_analytic, rep.arl_inf_mc.se, 4.0),
                  show(rep.arl_inf_mc.value) + " vs " + show(*rep.arl_inf_analytic));
    }
    for (const auto& b : rep.bayes) {
        const std::string tag = "(pi=" + show(b.prior.pi) + ",p=" + show(b.prior.p) + ")";
        if (b.false_alarm_analytic) {
            add_check(r, "false_alarm_analytic_vs_mc" + tag,
                      within_se(b.false_alarm_mc.value, *b.false_alarm_analytic, b.false_alarm_mc.se, 4.0));
        }
        if (b.shiryaev_analytic) {
            add_check(r, "shiryaev_analytic_vs_mc" + tag,
                      within_se(b.shiryaev_mc.value, *b.shiryaev_analytic, b.shiryaev_mc.se, 4.0));
        }
    }
    if (rep.essinf_is_unconditional && rep.per_t.size() > 1) {
        add_check(r, "time_equalizer_chi2", rep.time_equalizer, "p=" + show(rep.chi2_pvalue));
    }
    return r;
}

JobResult run_sweep(const Json& job, const JobContext& ctx) {
    reject_unknown_keys(job, {"command", "seed", "output", "model", "criterion", "params",
                              "gamma_grid", "evaluation"},
                        "job");
    const auto model = model_from_json(require(job, "model"));
    const auto criterion = get_criterion(job);
    if (criterion == "shiryaev") throw InvalidJob("sweep runs over gamma; 'shiryaev' has no gamma");
    std::vector<double> grid;
    try {
        grid = require(job, "gamma_grid").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidJob("gamma_grid must be an array of numbers");
    }
    if (grid.empty()) throw InvalidJob("gamma_grid is empty");
    Json params = job.value("params", Json::object());
    if (params.contains("gamma")) throw InvalidJob("params.gamma conflicts with gamma_grid");

    JobResult r;
    std::ostringstream csv;
    csv << "gamma,nu,beta,varpi,q,arl_analytic,arl_mc,arl_se,jp_inf,jp_inf_se,jl_grid_inf,chi2_pvalue,truncated\n";
    auto cell = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    Json rows = Json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        params["gamma"] = grid[k];
        const auto cal = calibrate_with(*model, criterion, params);
        auto cfg = evaluation_from_json(job.value("evaluation", Json()), {ctx.seed + k, ctx.threads, 100});
        const auto rep = modified_measures_mc(cal.policy, *model, cfg);
        const double nu = cal.policy.schedule ? std::exp(cal.policy.schedule->log_nu_at(1)) : cal.policy.nu;
        csv << cell(grid[k]) << ',' << cell(nu) << ',' << cell(cal.value) << ',' << cell(cal.policy.varpi)
            << ',' << cell(cal.policy.q) << ',' << cell(rep.arl_inf_analytic.value_or(NAN)) << ','
            << cell(rep.arl_inf_mc.value) << ',' << cell(rep.arl_inf_mc.se) << ','
            << cell(rep.pollak_grid_inf.value) << ',' << cell(rep.pollak_grid_inf.se) << ','
            << cell(rep.lorden_grid_inf) << ',' << cell(rep.chi2_pvalue) << ',' << rep.truncation_count
            << '\n';
        rows.push_back({{"gamma", grid[k]}, {"policy", policy_to_json(cal.policy)}, {"report", report_to_json(rep)}});
        residual_checks(r, cal.diagnostics);
        if (rep.arl_inf_analytic && cfg.estimate_arl && !rep.truncation_bias) {
            add_check(r, "arl_analytic_vs_mc(gamma=" + show(grid[k]) + ")",
                      within_se(rep.arl_inf_mc.value, *rep.arl_inf_analytic, rep.arl_inf_mc.se, 4.0));
        }
    }
    r.csv = csv.str();
    r.report["criterion"] = criterion;
    r.report["rows"] = rows;
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct DpCase {
    std::string name;
    std::vector<double> mu_seq;
};

std::vector<DpCase> dp_battery() {
    return {{"gaussian_mu1", {1.0}},
            {"gaussian_mu0.5", {0.5}},
            {"gaussian_mu3", {3.0}},
            {"alternating_1_2", {1.0, 2.0}},
            {"cycle_0.5_1_1.5_2", {0.5, 1.0, 1.5, 2.0}}};
}

}  // namespace

JobResult run_oracle(const Json& job, const JobContext& ctx) {
    reject_unknown_keys(job, {"command", "seed", "output", "lagrangian", "dp", "dominance", "mixture_bound"}, "job");
    const Json lag_cfg = job.value("lagrangian", Json::object());
    const Json dp_cfg = job.value("dp", Json::object());
    const Json dom_cfg = job.value("dominance", Json::object());
    const Json mb_cfg = job.value("mixture_bound", Json::object());
    reject_unknown_keys(lag_cfg, {"M", "grid_points"}, "lagrangian");
    reject_unknown_keys(dp_cfg, {"M", "grid_points", "gammas"}, "dp");
    reject_unknown_keys(dom_cfg, {"gamma", "mu", "paths_per_t", "arl_paths", "t_grid"}, "dominance");
    reject_unknown_keys(mb_cfg, {"n_paths"}, "mixture_bound");

    JobResult r;
    // Lagrangian construction for the constant-threshold optimum.
    {
        const GaussianMeanShiftModel model(1.0);
        Json rows = Json::array();
        for (double gamma : {1.0, 10.0}) {
            const auto c = lagrangian_check(model, gamma, get_int(lag_cfg, "M", 200),
                                                 static_cast<int>(get_int(lag_cfg, "grid_points", 2001)), false);
            rows.push_back({{"gamma", gamma}, {"nu", c.nu}, {"lambda", c.lambda}, {"beta", c.beta},
                            {"identity_residual", c.identity_residual}, {"dp_value", c.dp_value},
                            {"dp_residual", c.dp_residual}, {"region_residual", c.region_residual},
                            {"refinement_delta", c.refinement_delta}, {"horizons", c.horizons},
                            {"dp_by_horizon", c.dp_by_horizon}, {"pass", c.pass}});
            add_check(r, "lagrangian(gamma=" + show(gamma) + ")", c.pass,
                      "identity " + show(c.identity_residual) + ", dp " + show(c.dp_residual));
        }
        r.report["lagrangian"] = rows;
    }
    // Backward-induction bound for (time-varying) thresholds.
    {
        std::vector<double> gammas{2.0, 10.0, 50.0};
        if (dp_cfg.contains("gammas")) gammas = dp_cfg.at("gammas").get<std::vector<double>>();
        const auto M = get_int(dp_cfg, "M", 200);
        const int grid = static_cast<int>(get_int(dp_cfg, "grid_points", 2001));
        Json rows = Json::array();
        for (const auto& dc : dp_battery()) {
            const GaussianMeanShiftModel model(dc.mu_seq);
            for (double gamma : gammas) {
                const auto cal = calibrate_time_varying(model, gamma);
                const auto d = dp_bound(model, cal.policy, gamma, M, grid, 1e-4, false);
                rows.push_back({{"model", dc.name}, {"gamma", gamma}, {"beta", d.beta}, {"V0", d.V0},
                                {"omega0_residual", d.omega0_residual},
                                {"recursion_residual", d.recursion_residual},
                                {"refinement_delta", d.refinement_delta}, {"bounds_ok", d.bounds_ok},
                                {"monotone", d.monotone}, {"pass", d.pass}});
                add_check(r, "dp_bound(" + dc.name + ",gamma=" + show(gamma) + ")", d.pass,
                          "V0=" + show(d.V0));
            }
        }
        r.report["dp_bound"] = rows;
    }
    // Competitor dominance.
    {
        const double gamma = get_num(dom_cfg, "gamma", 10.0);
        const GaussianMeanShiftModel model(get_num(dom_cfg, "mu", 1.0));
        DominanceConfig cfg;
        cfg.seed = ctx.seed;
        cfg.threads = ctx.threads;
        cfg.strict = false;
        cfg.paths_per_t = get_int(dom_cfg, "paths_per_t", cfg.paths_per_t);
        cfg.arl_paths = get_int(dom_cfg, "arl_paths", cfg.arl_paths);
        if (dom_cfg.contains("t_grid")) cfg.t_grid = dom_cfg.at("t_grid").get<std::vector<std::int64_t>>();
        const auto table = dominance_sweep(model, gamma, default_competitors(), cfg);
        Json rows = Json::array();
        for (const auto& row : table.rows) {
            rows.push_back({{"rule", row.rule}, {"policy", policy_to_json(row.policy)},
                            {"arl", estimate_to_json(row.arl)}, {"arl_matched", row.arl_matched},
                            {"pollak_grid_inf", estimate_to_json(row.pollak)},
                            {"pollak_argmin_t", row.pollak_argmin_t}, {"lorden_grid_inf", num(row.lorden)},
                            {"upper_bound", estimate_to_json(row.upper_bound)},
                            {"dominated", row.dominated}, {"bound_ok", row.bound_ok},
                            {"ordering_ok", row.ordering_ok}, {"skipped_t", row.skipped_t}});
            add_check(r, "dominance(" + row.rule + ")", row.dominated && row.bound_ok && row.ordering_ok,
                      "pollak " + show(row.pollak.value) + " vs beta " + show(table.beta));
        }
        r.report["dominance"] = {{"gamma", gamma}, {"nu", table.nu}, {"beta", table.beta}, {"rows", rows}};
    }
    // Lower-bound identity for the two-alternative classical problem.
    {
        const auto n = get_int(mb_cfg, "n_paths", 1000000);
        Json rows = Json::array();
        const std::pair<double, double> cases[] = {{6.1805, 500.0}, {2.0, 2.0}};
        for (const auto& [mu, gamma] : cases) {
            const auto model = TwoAlternativeGaussianModel::two_sided(mu);
            const auto cal = calibrate_mixture(model, gamma);
            const auto c = mixture_bound_check(model, cal.policy, gamma, n, {ctx.seed, ctx.threads, 100}, false);
            rows.push_back({{"mu", mu}, {"gamma", gamma}, {"q", c.q}, {"nu", c.nu},
                            {"denominator", estimate_to_json(c.denominator)}, {"target1", c.target1},
                            {"target2", c.target2}, {"z1", c.z1}, {"z2", c.z2},
                            {"bound", estimate_to_json(c.bound)}, {"classical_delay", c.classical_delay},
                            {"pass", c.pass}});
            add_check(r, "mixture_lower_bound(mu=" + show(mu) + ",gamma=" + show(gamma) + ")", c.pass,
                      "z=" + show(std::max({c.z1, c.z2, c.z_bound})));
        }
        r.report["mixture_bound"] = rows;
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

// Rounds to the given number of significant digits.
double sig(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::strtod(buf, nullptr);
}

JobResult reproduce_1(const Json& job, const JobContext& ctx) {
    reject_unknown_keys(job, {"command", "seed", "output", "example", "mu", "gamma", "n_paths"}, "job");
    const double mu = get_num(job, "mu", 6.1805);
    const double gamma = get_num(job, "gamma", 1000.0);
    const auto n = get_int(job, "n_paths", 1000000);
    const GaussianMeanShiftModel model(mu);
    JobResult r;
    const double gamma_max = 1.0 / normal_cdf(-0.5 * mu);
    const double delay_max = 1.0 / normal_cdf(0.5 * mu);
    r.report["mu"] = mu;
    r.report["gamma_interval"] = {1.0, gamma_max};
    r.report["delay_interval"] = {1.0, delay_max};
    r.report["gamma_max_4sig"] = sig(gamma_max, 4);
    r.report["delay_max_4sig"] = sig(delay_max, 4);
    if (mu == 6.1805) {
        add_check(r, "gamma_max==1000", sig(gamma_max, 4) == 1000.0, show(gamma_max));
        add_check(r, "delay_max==1.001", sig(delay_max, 4) == 1.001, show(delay_max));
    }

    const auto cal = calibrate_lorden_pollak(model, gamma);
    const auto range = classical_optimality_range(cal.policy, model);
    const auto arl = arl_analytic(model, cal.policy.nu);
    r.report["policy"] = policy_to_json(cal.policy);
    r.report["classical_range"] = classical_range_json(range);
    r.report["arl_analytic"] = {{"e_inf", arl.e_inf}, {"e_post", arl.e_post}};

    const McConfig mc{ctx.seed, ctx.threads, 100};
    const auto horizon = static_cast<std::int64_t>(std::max(1e5, 200.0 * gamma));
    const auto inf = mc_run_length(cal.policy, model, RegimeSpec{}, n, horizon, mc, 11);
    RegimeSpec post;
    post.tau = 0;
    const auto zero = mc_run_length(cal.policy, model, post, n, horizon, mc, 12);
    r.report["mc"] = {{"n_paths", n},
                      {"e_inf", estimate_to_json(inf.mean_T)},
                      {"e_post", estimate_to_json(zero.mean_T)},
                      {"truncated", inf.truncated + zero.truncated}};
    add_check(r, "classical_range_applies", range.applies);
    add_check(r, "mc_e_inf_within_3se", inf.truncated == 0 && within_se(inf.mean_T.value, arl.e_inf, inf.mean_T.se, 3.0),
              show(inf.mean_T.value) + " +- " + show(inf.mean_T.se));
    add_check(r, "mc_e_post_within_3se", within_se(zero.mean_T.value, arl.e_post, zero.mean_T.se, 3.0),
              show(zero.mean_T.value) + " +- " + show(zero.mean_T.se));
    return r;
}

JobResult reproduce_2(const Json& job, const JobContext&) {
    reject_unknown_keys(job, {"command", "seed", "output", "example", "mu_seq", "gamma"}, "job");
    std::vector<double> mu_seq{1.0, 2.0};
    if (job.contains("mu_seq")) mu_seq = job.at("mu_seq").get<std::vector<double>>();
    const double gamma = get_num(job, "gamma", 10.0);
    const GaussianMeanShiftModel model(mu_seq);
    const auto cal = calibrate_time_varying(model, gamma);
    const double beta = cal.value;
    const double s = normal_isf(beta);

    // Run-length equation in the explicit Gaussian form 1 + Σ Π Φ(μ_l + s) = γ.
    double sum = 1.0;
    double prod = 1.0;
    for (std::int64_t t = 1; t <= 100'000'000 && prod > 1e-18; ++t) {
        prod *= normal_cdf(model.mu_at(t) + s);
        sum += prod;
    }
    JobResult r;
    r.report["mu_seq"] = mu_seq;
    r.report["gamma"] = gamma;
    r.report["beta"] = beta;
    r.report["s_beta"] = s;
    Json nus = Json::array();
    for (std::int64_t t = 1; t <= 10; ++t) {
        nus.push_back({{"t", t}, {"nu", std::exp(cal.policy.log_nu_at(t))},
                       {"closed_form", std::exp(0.5 * model.mu_at(t) * model.mu_at(t) + model.mu_at(t) * s)}});
    }
    r.report["thresholds"] = nus;
    r.report["run_length_residual"] = std::abs(sum - gamma) / gamma;
    r.report["diagnostics"] = diagnostics_to_json(cal.diagnostics);
    residual_checks(r, cal.diagnostics);
    add_check(r, "explicit_run_length_residual", std::abs(sum - gamma) / gamma < 1e-9, show(std::abs(sum - gamma)));
    if (!model.time_varying()) {
        const auto ref = calibrate_lorden_pollak(model, gamma);
        r.report["constant_threshold_beta"] = ref.value;
        add_check(r, "matches_constant_threshold", std::abs(ref.value - beta) < 1e-8,
                  show(std::abs(ref.value - beta)));
    }
    return r;
}

JobResult reproduce_3(const Json& job, const JobContext& ctx) {
    reject_unknown_keys(job, {"command", "seed", "output", "example", "mu", "gamma", "n_paths"}, "job");
    const double mu = get_num(job, "mu", 6.1805);
    const double gamma = get_num(job, "gamma", 500.0);
    const auto n = get_int(job, "n_paths", 100000);
    JobResult r;
    const double u = 4.0 * std::exp(-mu * mu);
    const double root = std::sqrt(1.0 - u);
    const double delta = -std::log1p(-u / (2.0 * (1.0 + root))) / mu;
    const double gamma_max = 1.0 / (2.0 * normal_cdf(-0.5 * mu + delta));
    const double delay_bound = 1.0 / (normal_cdf(0.5 * mu + delta) + normal_cdf(-1.5 * mu + delta));
    const double threshold = std::sqrt(2.0 * std::log(2.0));
    r.report["mu"] = mu;
    r.report["delta"] = delta;
    r.report["nu_interval"] = {std::exp(-0.5 * mu * mu), 0.5};
    r.report["gamma_interval"] = {1.0, gamma_max};
    r.report["delay_bound"] = delay_bound;
    r.report["mu_threshold"] = threshold;
    add_check(r, "mu_threshold==1.1774", std::round(threshold * 1e4) / 1e4 == 1.1774, show(threshold));

    const auto model = TwoAlternativeGaussianModel::two_sided(mu);
    // The generic machinery must land on the same interval.
    const Policy probe = Policy::mixture(0.5, 0.5);
    const auto range = classical_optimality_range(probe, model);
    r.report["classical_range"] = classical_range_json(range);
    add_check(r, "gamma_max_matches_formula",
              std::abs(range.gamma_hi - gamma_max) <= 1e-9 * gamma_max, show(range.gamma_hi));
    if (mu == 6.1805) {
        add_check(r, "gamma_max==500", sig(gamma_max, 3) == 500.0, show(gamma_max));
        add_check(r, "delay_bound==1.001", sig(delay_bound, 4) == 1.001, show(delay_bound));
    }

    const auto small = TwoAlternativeGaussianModel::two_sided(1.0);
    const auto small_range = classical_optimality_range(Policy::mixture(0.5, 0.5), small);
    r.report["mu1_range"] = classical_range_json(small_range);
    add_check(r, "mu=1_inapplicable", !small_range.applies, small_range.violated);

    if (gamma <= range.gamma_hi) {
        const auto cal = calibrate_mixture(model, gamma);
        const auto cr = classical_optimality_range(cal.policy, model);
        const double delay = classical_lorden_mixture(model, cal.policy.q, cal.policy.nu);
        r.report["policy"] = policy_to_json(cal.policy);
        r.report["classical_delay"] = delay;
        add_check(r, "policy_in_classical_range", cr.applies, cr.violated);
        add_check(r, "classical_delay<=bound", delay <= delay_bound * (1.0 + 1e-12), show(delay));
        const McConfig mc{ctx.seed, ctx.threads, 100};
        Json mcj = Json::array();
        for (int alt : {1, 2}) {
            RegimeSpec post;
            post.tau = 0;
            post.alternative = alt;
            const auto rl = mc_run_length(cal.policy, model, post, n, 100000, mc, 20 + alt);
            mcj.push_back({{"alternative", alt}, {"e_post", estimate_to_json(rl.mean_T)}});
            add_check(r, "mc_delay_alt" + std::to_string(alt) + "<=bound",
                      rl.mean_T.value <= delay_bound + 3.0 * rl.mean_T.se,
                      show(rl.mean_T.value) + " +- " + show(rl.mean_T.se));
        }
        r.report["mc"] = mcj;
    }
    return r;
}

}  // namespace

JobResult run_reproduce(int example, const Json& job, const JobContext& ctx) {
    switch (example) {
        case 1: return reproduce_1(job, ctx);
        case 2: return reproduce_2(job, ctx);
        case 3: return reproduce_3(job, ctx);
        default: break;
    }
    throw UnknownExample("unknown example " + std::to_string(example) + " (expected 1, 2 or 3)");
}

}  // namespace shewhart
