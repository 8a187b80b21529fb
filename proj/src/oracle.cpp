#include "shewhart/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shewhart/detectors.hpp"
#include "shewhart/errors.hpp"
#include "shewhart/mixture.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

double PiecewiseLinear::operator()(double l) const {
    if (x.size() < 2) throw std::logic_error("piecewise-linear function needs two nodes");
    auto it = std::upper_bound(x.begin(), x.end(), l);
    std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    k = std::min(k, x.size() - 2);
    const double s = (g[k + 1] - g[k]) / (x[k + 1] - x[k]);
    return g[k] + s * (l - x[k]);
}

double expect_nominal(const LikelihoodRatioModel& model, std::int64_t t, const PiecewiseLinear& f) {
    const auto& x = f.x;
    const auto& g = f.g;
    if (x.size() < 2 || x.front() != 0.0) throw std::invalid_argument("grid must start at 0");
    auto s_inf = [&](double v) { return model.survival(Measure::Nominal, 1, t, v); };
    auto s_post = [&](double v) { return model.survival(Measure::Alt1, 1, t, v); };
    double total = 0.0;
    double si_prev = 1.0;
    double sp_prev = 1.0;
    double slope = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double si = s_inf(x[k + 1]);
        const double sp = s_post(x[k + 1]);
        slope = (g[k + 1] - g[k]) / (x[k + 1] - x[k]);
        total += (g[k] - slope * x[k]) * (si_prev - si) + slope * (sp_prev - sp);
        si_prev = si;
        sp_prev = sp;
    }
    total += (g.back() - slope * x.back()) * si_prev + slope * sp_prev;
    return total;
}

std::vector<double> lr_grid(const LikelihoodRatioModel& model, std::int64_t t, int points,
                            const std::vector<double>& extra) {
    if (points < 3) throw std::invalid_argument("grid needs at least 3 points");
    const double lo = log_quantile(model, Measure::Nominal, 1, t, 1.0 - 1e-12);
    const double hi = log_quantile(model, Measure::Alt1, 1, t, 1e-12);
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(points) + 1 + extra.size());
    x.push_back(0.0);
    for (int k = 0; k < points; ++k) x.push_back(std::exp(lo + (hi - lo) * k / (points - 1)));
    for (double e : extra) {
        if (e > 0.0 && std::isfinite(e)) x.push_back(e);
    }
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

namespace {

// max{a·ℓ, k} sampled on the grid with its kink inserted.
PiecewiseLinear max_line_const(std::vector<double> grid, double a, double k) {
    if (a > 0.0 && k > 0.0) {
        grid.push_back(k / a);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    PiecewiseLinear f;
    f.g.reserve(grid.size());
    for (double l : grid) f.g.push_back(std::max(a * l, k));
    f.x = std::move(grid);
    return f;
}

// Continuation values C_t = E∞[max(ℓ, C_{t+1})] − λ for the Lagrangian problem.
std::vector<double> lagrangian_dp(const LikelihoodRatioModel& model, double lambda,
                                  std::int64_t M, int grid_points) {
    const auto grid = lr_grid(model, 1, grid_points);
    std::vector<double> C(static_cast<std::size_t>(M));
    PiecewiseLinear w = max_line_const(grid, 1.0, kNegInf);  // W_M(ℓ) = ℓ
    for (std::int64_t t = M - 1; t >= 0; --t) {
        const double ct = expect_nominal(model, 1, w) - lambda;
        C[static_cast<std::size_t>(t)] = ct;
        w = max_line_const(grid, 1.0, ct);
    }
    return C;
}

}  // namespace

LagrangianCheck lagrangian_check(const LikelihoodRatioModel& model, double gamma,
                                      std::int64_t M, int grid_points, bool strict) {
    if (M < 2) throw std::invalid_argument("horizon must be >= 2");
    const auto cal = calibrate_lorden_pollak(model, gamma);
    LagrangianCheck r;
    r.gamma = gamma;
    r.M = M;
    r.nu = cal.policy.nu;
    const double s_inf = model.survival(Measure::Nominal, 1, 1, r.nu);
    const double s_post = model.survival(Measure::Alt1, 1, 1, r.nu);
    r.beta = s_post;
    r.lambda = s_post - r.nu * s_inf;
    const double e_lr = s_post / s_inf;  // E∞[ℓ_S]
    const double e_s = 1.0 / s_inf;      // E∞[S]
    r.identity_residual = std::abs(e_lr - r.lambda * e_s - r.nu);

    const auto C = lagrangian_dp(model, r.lambda, M, grid_points);
    r.dp_value = C[0];
    r.dp_residual = std::abs(C[0] - r.nu);
    r.region_residual = std::abs(C[1] - r.nu);
    for (std::int64_t h : {M / 4, M / 2, M}) {
        if (h < 1) continue;
        r.horizons.push_back(h);
        r.dp_by_horizon.push_back(C[static_cast<std::size_t>(M - h)]);
    }
    const auto C2 = lagrangian_dp(model, r.lambda, M, 2 * grid_points - 1);
    r.refinement_delta = std::abs(C2[0] - C[0]);
    r.pass = r.identity_residual < 1e-9 && r.dp_residual < 1e-4;
    if (strict && !r.pass) {
        if (r.identity_residual >= 1e-9) {
            throw OracleMismatch("lagrangian identity", r.identity_residual, 1e-9);
        }
        throw OracleMismatch("lagrangian dp value", r.dp_residual, 1e-4);
    }
    return r;
}

DpBoundResult dp_bound(const LikelihoodRatioModel& model, const Policy& policy, double gamma,
                            std::int64_t M, int grid_points, double tolerance, bool strict) {
    if (M < 1) throw std::invalid_argument("horizon must be >= 1");
    if (model.num_alternatives() != 1) throw std::invalid_argument("needs a single alternative");
    policy.validate();
    if (policy.kind != RuleKind::TimeVaryingShewhart && policy.kind != RuleKind::Shewhart) {
        throw std::invalid_argument("dp bound needs a threshold rule");
    }
    ThresholdSchedule schedule;
    if (policy.schedule) {
        schedule = *policy.schedule;
    } else {
        schedule.log_nu = {safe_log(policy.nu)};
    }
    const std::int64_t period = std::max<std::int64_t>(model.period(), static_cast<std::int64_t>(schedule.log_nu.size()));
    double beta = schedule.beta;
    if (std::isnan(beta)) beta = model.survival_log(Measure::Alt1, 1, 1, schedule.log_nu_at(1));
    if (!(beta < 1.0)) throw std::invalid_argument("dp bound is degenerate at beta = 1");

    DpBoundResult r;
    r.gamma = gamma;
    r.beta = beta;
    auto& tab = r.tables;
    tab.M = M;

    // ρ over one period, then ω_t by the truncated series from every offset.
    const auto rho_period = nominal_continue_probs(model, schedule, period);
    std::vector<double> omega_period(static_cast<std::size_t>(period));
    for (std::int64_t k = 0; k < period; ++k) {
        std::vector<double> rotated(static_cast<std::size_t>(period));
        for (std::int64_t j = 0; j < period; ++j) {
            rotated[static_cast<std::size_t>(j)] = rho_period[static_cast<std::size_t>((k + j) % period)];
        }
        omega_period[static_cast<std::size_t>(k)] = expected_run_length_series(rotated, 1e-15).value;
    }
    auto rho_at = [&](std::int64_t t) { return rho_period[static_cast<std::size_t>((t - 1) % period)]; };
    auto omega_at = [&](std::int64_t t) { return omega_period[static_cast<std::size_t>(t % period)]; };
    auto nu_at = [&](std::int64_t t) { return std::exp(schedule.log_nu_at(t)); };

    const double rho_hat = *std::max_element(rho_period.begin(), rho_period.end());
    for (std::int64_t t = 0; t <= M; ++t) tab.omega.push_back(omega_at(t));
    for (std::int64_t t = 1; t <= M + 1; ++t) tab.rho.push_back(rho_at(t));
    for (std::int64_t t = 0; t < M; ++t) tab.c_seq.push_back(omega_at(t + 1) / nu_at(t + 1));

    r.omega0_residual = std::abs(tab.omega[0] - gamma);
    for (std::int64_t t = 1; t <= M; ++t) {
        r.recursion_residual = std::max(
            r.recursion_residual, std::abs(omega_at(t - 1) - 1.0 - rho_at(t) * omega_at(t)));
    }
    const double omega_cap = 1.0 / (1.0 - rho_hat);
    const double c_cap = 1.0 / ((1.0 - beta) * (1.0 - rho_hat));
    r.bounds_ok = true;
    for (double w : tab.omega) r.bounds_ok = r.bounds_ok && w <= omega_cap * (1.0 + 1e-12);
    for (double c : tab.c_seq) r.bounds_ok = r.bounds_ok && c <= c_cap * (1.0 + 1e-12);

    auto run = [&](int points, std::vector<double>* continuation, bool* monotone) {
        std::vector<std::vector<double>> grids(static_cast<std::size_t>(period));
        auto grid_at = [&](std::int64_t t) -> const std::vector<double>& {
            auto& g = grids[static_cast<std::size_t>((t - 1) % period)];
            if (g.empty()) g = lr_grid(model, t, points);
            return g;
        };
        auto c_at = [&](std::int64_t t) { return t < 0 ? 0.0 : tab.c_seq[static_cast<std::size_t>(t)]; };
        PiecewiseLinear v = max_line_const(grid_at(M), c_at(M - 1), kNegInf);
        bool mono = true;
        double k_t = 0.0;
        if (continuation) continuation->assign(static_cast<std::size_t>(M), 0.0);
        for (std::int64_t t = M - 1; t >= 0; --t) {
            k_t = 1.0 - beta * c_at(t) + expect_nominal(model, t + 1, v);
            if (continuation) (*continuation)[static_cast<std::size_t>(t)] = k_t;
            if (t == 0) break;
            v = max_line_const(grid_at(t), c_at(t - 1), k_t);
            for (std::size_t i = 1; i < v.g.size(); ++i) mono = mono && v.g[i] >= v.g[i - 1];
        }
        if (monotone) *monotone = mono;
        return std::max(0.0, k_t);  // V_0(ℓ_0 = 0), c_{−1} = 0
    };

    r.V0 = run(grid_points, &tab.continuation, &r.monotone);
    r.refinement_delta = std::abs(run(2 * grid_points - 1, nullptr, nullptr) - r.V0);
    for (std::int64_t t = 0; t < M; ++t) {
        r.bounds_ok = r.bounds_ok && tab.continuation[static_cast<std::size_t>(t)] <=
                                         tab.omega[static_cast<std::size_t>(t)] + tolerance;
    }
    r.pass = r.V0 <= gamma + tolerance && r.recursion_residual < 1e-10 && r.bounds_ok && r.monotone;
    if (strict && !r.pass) {
        if (r.V0 > gamma + tolerance) throw OracleMismatch("dp bound V0 <= gamma", r.V0 - gamma, tolerance);
        if (r.recursion_residual >= 1e-10) {
            throw OracleMismatch("omega recursion", r.recursion_residual, 1e-10);
        }
        throw OracleMismatch(r.bounds_ok ? "dp monotonicity" : "omega/c bounds", 1.0, 0.0);
    }
    return r;
}

// ---------------------------------------------------------------------------

std::vector<CompetitorSpec> default_competitors() {
    return {
        {RuleKind::Shewhart, std::numeric_limits<double>::quiet_NaN(), "shewhart"},
        {RuleKind::ClassicalCusum, std::numeric_limits<double>::quiet_NaN(), "classical_cusum"},
        {RuleKind::Cusum, std::numeric_limits<double>::quiet_NaN(), "cusum"},
        {RuleKind::PoorCusum, 0.9, "poor_cusum_c0.9"},
        {RuleKind::FixedSample, std::numeric_limits<double>::quiet_NaN(), "fixed_sample"},
    };
}

namespace {

Policy competitor_policy(const CompetitorSpec& spec, double log_nu) {
    const double nu = std::exp(log_nu);
    switch (spec.kind) {
        case RuleKind::Cusum: return Policy::cusum(nu);
        case RuleKind::ClassicalCusum: return Policy::classical_cusum(nu);
        case RuleKind::PoorCusum: return Policy::poor_cusum(nu, spec.c);
        case RuleKind::Shewhart: return Policy::shewhart(nu);
        default: break;
    }
    throw std::invalid_argument(std::string("cannot tune ") + to_string(spec.kind));
}

}  // namespace

DominanceTable dominance_sweep(const LikelihoodRatioModel& model, double gamma,
                               const std::vector<CompetitorSpec>& competitors,
                               const DominanceConfig& config) {
    const auto cal = calibrate_lorden_pollak(model, gamma);
    DominanceTable table;
    table.gamma = gamma;
    table.nu = cal.policy.nu;
    table.beta = cal.value;
    McConfig mc{config.seed, config.threads, config.batches};
    table.pass = true;

    for (std::size_t idx = 0; idx < competitors.size(); ++idx) {
        const auto& spec = competitors[idx];
        DominanceRow row;
        row.rule = spec.label.empty() ? to_string(spec.kind) : spec.label;
        McConfig arl_mc = mc;
        arl_mc.seed = config.seed + 101;  // common random numbers across tuning steps
        auto arl_of = [&](const Policy& p) {
            return mc_run_length(p, model, RegimeSpec{}, config.arl_paths, config.horizon, arl_mc, 5);
        };

        RunLengthMc rl;
        if (spec.kind == RuleKind::FixedSample) {
            row.policy = Policy::fixed_sample(static_cast<std::int64_t>(std::ceil(gamma)));
            rl = arl_of(row.policy);
            row.arl_matched = static_cast<double>(row.policy.fixed_n) == gamma;
        } else if (spec.kind == RuleKind::Shewhart) {
            row.policy = cal.policy;
            rl = arl_of(row.policy);
            row.arl_matched = std::abs(rl.mean_T.value - gamma) <= 3.0 * rl.mean_T.se;
        } else {
            // Stochastic bisection on log ν; ARL is pathwise nondecreasing in ν.
            double lo = -1.0;
            double hi = 1.0;
            for (int i = 0; i < 200 && arl_of(competitor_policy(spec, lo)).mean_T.value > gamma; ++i) lo -= 2.0 * (hi - lo);
            for (int i = 0; i < 200 && arl_of(competitor_policy(spec, hi)).mean_T.value < gamma; ++i) hi += 2.0 * (hi - lo);
            double y = 0.5 * (lo + hi);
            for (int it = 0; it < config.max_tune_iterations; ++it) {
                y = 0.5 * (lo + hi);
                rl = arl_of(competitor_policy(spec, y));
                if (std::abs(rl.mean_T.value - gamma) <= rl.mean_T.se) {
                    row.arl_matched = true;
                    break;
                }
                if (rl.mean_T.value < gamma) {
                    lo = y;
                } else {
                    hi = y;
                }
            }
            row.policy = competitor_policy(spec, y);
            rl = arl_of(row.policy);
        }
        row.arl = rl.mean_T;
        row.upper_bound = rl.lr_at_stop_per_T;

        ConditionalOptions co;
        McConfig tmc = mc;
        tmc.seed = config.seed + 1000 * (idx + 1);
        for (auto t : config.t_grid) {
            try {
                const auto c = mc_conditional_detection(row.policy, model, t, config.paths_per_t, co, tmc);
                if (!(c.detection.value >= row.pollak.value)) {
                    row.pollak = c.detection;
                    row.pollak_argmin_t = t;
                }
                row.lorden = std::isnan(row.lorden) ? c.state_min : std::min(row.lorden, c.state_min);
            } catch (const InsufficientSurvivors&) {
                row.skipped_t.push_back(t);
            }
        }
        const double se = std::isnan(row.pollak.se) ? 0.0 : row.pollak.se;
        row.dominated = row.pollak.value <= table.beta + 3.0 * se;
        row.bound_ok = row.pollak.value <= row.upper_bound.value + 3.0 * (se + row.upper_bound.se);
        row.ordering_ok = row.lorden <= row.pollak.value + 3.0 * se;
        table.pass = table.pass && row.dominated && row.bound_ok && row.ordering_ok;
        if (config.strict && !row.dominated) {
            throw DominanceViolation(row.rule, row.pollak_argmin_t, row.pollak.value, table.beta);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------

MixtureBoundCheck mixture_bound_check(const TwoAlternativeModel& model, const Policy& policy, double gamma,
                           std::int64_t n_paths, const McConfig& mc, bool strict) {
    policy.validate();
    if (policy.kind != RuleKind::MixtureShewhart) throw std::invalid_argument("needs a mixture rule");
    const auto range = classical_optimality_range(policy, model);
    if (!range.applies) {
        throw std::invalid_argument("threshold outside the classical range: " + range.violated);
    }
    MixtureBoundCheck r;
    r.gamma = gamma;
    r.q = policy.q;
    r.nu = policy.nu;
    const double q = policy.q;
    const double s_inf = mixture_survival(model, Measure::Nominal, q, policy.nu);
    const double g = 1.0 / s_inf;
    const double s1 = mixture_survival(model, Measure::Alt1, q, policy.nu);
    const double s2 = mixture_survival(model, Measure::Alt2, q, policy.nu);
    r.target1 = g * s1;
    r.target2 = g * s2;
    r.classical_delay = 1.0 / std::min(s1, s2);

    const std::int64_t cap = 100'000'000;
    const int batches = static_cast<int>(std::min<std::int64_t>(mc.batches, n_paths));
    const auto counts = split_count(n_paths, batches);
    std::vector<double> sums(batches), npaths(batches), trunc(batches);
    for_each_batch(batches, mc.threads, [&](int b) {
        Rng rng = make_stream(mc.seed, batch_stream(6, 0, b));
        double total = 0.0;
        double tr = 0.0;
        for (std::int64_t i = 0; i < counts[b]; ++i) {
            Detector d(policy);
            double z = 1.0;  // ℓ_0 = 0
            std::int64_t s = 1;
            for (; s <= cap; ++s) {
                const LrSample x = model.sample(Measure::Nominal, s, rng);
                if (d.step(x) == StepResult::Stop) break;
                z += (1.0 - q) * std::max(0.0, -std::expm1(x.lr1)) + q * std::max(0.0, -std::expm1(x.lr2));
            }
            if (s > cap) tr += 1.0;
            total += z;
        }
        sums[b] = total;
        npaths[b] = static_cast<double>(counts[b]);
        trunc[b] = tr;
    });
    for (double v : trunc) {
        if (v > 0.0) throw std::runtime_error("mixture rule failed to stop within the path cap");
    }
    r.denominator = batch_ratio(sums, npaths);
    const double se = r.denominator.se;
    r.z1 = std::abs(r.denominator.value - r.target1) / se;
    r.z2 = std::abs(r.denominator.value - r.target2) / se;
    r.bound = {g / r.denominator.value, g * se / (r.denominator.value * r.denominator.value)};
    r.z_bound = std::abs(r.bound.value - r.classical_delay) / r.bound.se;
    r.pass = r.z1 <= 3.0 && r.z2 <= 3.0 && r.z_bound <= 3.0;
    if (strict && !r.pass) {
        throw OracleMismatch("mixture lower-bound identity", std::max({r.z1, r.z2, r.z_bound}), 3.0);
    }
    return r;
}

}  // namespace shewhart
