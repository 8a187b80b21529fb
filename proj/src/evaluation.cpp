#include "shewhart/evaluation.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "shewhart/detectors.hpp"
#include "shewhart/errors.hpp"
#include "shewhart/mixture.hpp"
#include "shewhart/numerics.hpp"

namespace shewhart {

namespace {

bool constant_threshold(const Policy& policy) {
    return policy.kind == RuleKind::Shewhart || policy.kind == RuleKind::StopAtZero;
}

double inv_survival(double s, const char* what) {
    if (s <= 0.0) throw ZeroSurvival(std::string(what) + " survival is zero at the threshold");
    return 1.0 / s;
}

}  // namespace

ArlAnalytic arl_analytic(const LikelihoodRatioModel& model, double nu) {
    if (model.time_varying()) throw std::invalid_argument("closed-form run lengths need an i.i.d. model");
    return {inv_survival(model.survival(Measure::Nominal, 1, 1, nu), "nominal"),
            inv_survival(model.survival(Measure::Alt1, 1, 1, nu), "post-change")};
}

double shiryaev_measure_analytic(const Policy& policy, const LikelihoodRatioModel& model,
                                 const GeometricPrior& prior) {
    prior.validate();
    if (!constant_threshold(policy)) {
        throw std::invalid_argument("closed-form Shiryaev measure needs a constant-threshold rule");
    }
    if (policy.varpi >= 1.0) return 1.0;
    if (model.time_varying()) throw std::invalid_argument("closed form needs an i.i.d. model");
    const double s_inf = model.survival(Measure::Nominal, 1, 1, policy.nu);
    const double s_post = model.survival(Measure::Alt1, 1, 1, policy.nu);
    const double pi = prior.pi;
    const double p = prior.p;
    const double w = policy.varpi;
    const double den = 1.0 - (1.0 - p) * (1.0 - s_inf);
    const double e_disc = (1.0 - p) * s_inf / den;  // E∞[(1−p)^S]
    const double num = pi * w + (1.0 - pi) * p * s_post / den * (1.0 - w);
    return num / (pi + (1.0 - pi) * (1.0 - e_disc) * (1.0 - w));
}

double false_alarm_prob_analytic(const Policy& policy, const LikelihoodRatioModel& model,
                                 const GeometricPrior& prior) {
    prior.validate();
    if (!constant_threshold(policy)) {
        throw std::invalid_argument("closed-form false-alarm probability needs a constant threshold");
    }
    if (policy.varpi >= 1.0) return 1.0 - prior.pi;
    if (model.time_varying()) throw std::invalid_argument("closed form needs an i.i.d. model");
    const double s_inf = model.survival(Measure::Nominal, 1, 1, policy.nu);
    const double p = prior.p;
    const double a = (1.0 - p) * s_inf / (1.0 - (1.0 - p) * (1.0 - s_inf));
    return (1.0 - prior.pi) * (policy.varpi + a * (1.0 - policy.varpi));
}

double classical_lorden_shewhart(const LikelihoodRatioModel& model, double nu) {
    return inv_survival(model.survival(Measure::Alt1, 1, 1, nu), "post-change");
}

double classical_lorden_mixture(const TwoAlternativeModel& model, double q, double nu) {
    const double s1 = mixture_survival(model, Measure::Alt1, q, nu);
    const double s2 = mixture_survival(model, Measure::Alt2, q, nu);
    return inv_survival(std::min(s1, s2), "post-change");
}

// ---------------------------------------------------------------------------

RunLengthMc mc_run_length(const Policy& policy, const LikelihoodRatioModel& model,
                          const RegimeSpec& regime, std::int64_t n_paths, std::int64_t horizon,
                          const McConfig& mc, std::uint64_t tag) {
    if (n_paths < 1 || horizon < 1) throw std::invalid_argument("need paths and a horizon");
    policy.validate();
    const int batches = static_cast<int>(std::min<std::int64_t>(mc.batches, n_paths));
    const auto counts = split_count(n_paths, batches);
    std::vector<double> sum_t(batches), sum_lr(batches), npaths(batches), trunc(batches);

    for_each_batch(batches, mc.threads, [&](int b) {
        Rng rng = make_stream(mc.seed, batch_stream(tag, 0, b));
        double st = 0.0;
        double sl = 0.0;
        double tr = 0.0;
        for (std::int64_t i = 0; i < counts[b]; ++i) {
            if (apply_randomization(policy, rng) == StartDecision::StopAtZero) continue;
            Detector d(policy);
            std::int64_t s = 1;
            for (; s <= horizon; ++s) {
                const LrSample x = model.sample(regime.measure_at(s), s, rng);
                if (d.step(x) == StepResult::Stop) {
                    sl += std::exp(x.lr1);
                    break;
                }
            }
            if (s > horizon) {
                tr += 1.0;
                s = horizon;
            }
            st += static_cast<double>(s);
        }
        sum_t[b] = st;
        sum_lr[b] = sl;
        trunc[b] = tr;
        npaths[b] = static_cast<double>(counts[b]);
    });

    RunLengthMc out;
    out.paths = n_paths;
    out.mean_T = batch_ratio(sum_t, npaths);
    out.lr_at_stop_per_T = batch_ratio(sum_lr, sum_t);
    for (double v : trunc) out.truncated += static_cast<std::int64_t>(v);
    return out;
}

ConditionalMc mc_conditional_detection(const Policy& policy, const LikelihoodRatioModel& model,
                                       std::int64_t t, std::int64_t n_survivors,
                                       const ConditionalOptions& opts, const McConfig& mc) {
    policy.validate();
    if (t < 0 || opts.m < 1 || n_survivors < 1) throw std::invalid_argument("bad conditional MC request");
    if (policy.kind == RuleKind::StopAtZero ||
        (policy.kind == RuleKind::FixedSample && t >= policy.fixed_n)) {
        throw InsufficientSurvivors(t, 0);
    }
    RegimeSpec regime;
    regime.tau = t;
    regime.alternative = opts.alternative;
    if (opts.transient_d) regime.duration = *opts.transient_d;
    const Measure post = post_change_measure(opts.alternative);

    const int batches = static_cast<int>(std::min<std::int64_t>(mc.batches, n_survivors));
    const auto targets = split_count(n_survivors, batches);
    std::vector<double> surv(batches), succ(batches), att(batches), smin(batches, kPosInf),
        ssum(batches);
    const bool renewal = Detector(policy).memoryless() && t >= opts.renewal_min_t;
    const bool track_state = opts.m == 1;

    for_each_batch(batches, mc.threads, [&](int b) {
        Rng rng = make_stream(mc.seed, batch_stream(2, static_cast<std::uint64_t>(t), b));
        const std::int64_t max_attempts = targets[b] * opts.max_attempt_factor + 1000;
        std::int64_t survivors = 0;
        std::int64_t successes = 0;
        std::int64_t attempts = 0;
        while (survivors < targets[b] && attempts < max_attempts) {
            ++attempts;
            if (apply_randomization(policy, rng) == StartDecision::StopAtZero) continue;
            Detector d(policy);
            bool alive = true;
            if (renewal) {
                d.advance_to(t);
            } else {
                for (std::int64_t s = 1; s <= t; ++s) {
                    if (d.step(model.sample(Measure::Nominal, s, rng)) == StepResult::Stop) {
                        alive = false;
                        break;
                    }
                }
            }
            if (!alive) continue;
            ++survivors;
            if (track_state) {
                const double ps = d.next_stop_probability(model, post);
                smin[b] = std::min(smin[b], ps);
                ssum[b] += ps;
            }
            for (std::int64_t s = t + 1; s <= t + opts.m; ++s) {
                if (d.step(model.sample(regime.measure_at(s), s, rng)) == StepResult::Stop) {
                    ++successes;
                    break;
                }
            }
        }
        surv[b] = static_cast<double>(survivors);
        succ[b] = static_cast<double>(successes);
        att[b] = static_cast<double>(attempts);
    });

    ConditionalMc out;
    out.t = t;
    out.renewal = renewal;
    for (int b = 0; b < batches; ++b) {
        out.survivors += static_cast<std::int64_t>(surv[b]);
        out.successes += static_cast<std::int64_t>(succ[b]);
        out.attempts += static_cast<std::int64_t>(att[b]);
    }
    if (out.survivors < 100) throw InsufficientSurvivors(t, out.survivors);
    out.detection = batch_ratio(succ, surv);
    if (!renewal) out.survival = batch_ratio(surv, att);
    if (track_state) {
        out.state_min = *std::min_element(smin.begin(), smin.end());
        double total = 0.0;
        for (double v : ssum) total += v;
        out.state_mean = total / static_cast<double>(out.survivors);
    }
    return out;
}

BayesMc mc_bayes(const Policy& policy, const LikelihoodRatioModel& model,
                 const GeometricPrior& prior, std::int64_t m, int alternative,
                 std::int64_t n_paths, const McConfig& mc) {
    prior.validate();
    policy.validate();
    if (m < 1 || n_paths < 1) throw std::invalid_argument("bad Bayesian MC request");
    const int batches = static_cast<int>(std::min<std::int64_t>(mc.batches, n_paths));
    const auto counts = split_count(n_paths, batches);
    std::vector<double> num(batches), den(batches), fa(batches), npaths(batches);

    for_each_batch(batches, mc.threads, [&](int b) {
        Rng rng = make_stream(mc.seed, batch_stream(3, 0, b));
        std::geometric_distribution<std::int64_t> geom(prior.p);
        double n_succ = 0.0;
        double n_alive = 0.0;
        double n_fa = 0.0;
        for (std::int64_t i = 0; i < counts[b]; ++i) {
            const std::int64_t tau =
                uniform01(rng) < prior.pi ? -1 : (prior.p >= 1.0 ? 0 : geom(rng));
            // Stopping time, or window end + 1 when the rule has not stopped by then.
            const std::int64_t last = std::max<std::int64_t>(tau, 0) + m;
            std::int64_t T = last + 1;
            if (apply_randomization(policy, rng) == StartDecision::StopAtZero) {
                T = 0;
            } else {
                RegimeSpec regime;
                regime.tau = std::max<std::int64_t>(tau, 0);
                regime.alternative = alternative;
                Detector d(policy);
                for (std::int64_t s = 1; s <= last; ++s) {
                    if (d.step(model.sample(regime.measure_at(s), s, rng)) == StepResult::Stop) {
                        T = s;
                        break;
                    }
                }
            }
            if (T <= tau) {
                n_fa += 1.0;
                continue;
            }
            n_alive += 1.0;
            const std::int64_t window_end = tau < 0 ? m - 1 : tau + m;
            if (T <= window_end) n_succ += 1.0;
        }
        num[b] = n_succ;
        den[b] = n_alive;
        fa[b] = n_fa;
        npaths[b] = static_cast<double>(counts[b]);
    });
    return {batch_ratio(num, den), batch_ratio(fa, npaths)};
}

// ---------------------------------------------------------------------------

void EvaluationConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (t_grid.empty()) throw std::invalid_argument("t_grid must not be empty");
    std::int64_t t_max = 0;
    for (auto t : t_grid) {
        if (t < 0) throw std::invalid_argument("t_grid entries must be >= 0");
        t_max = std::max(t_max, t);
    }
    if (horizon < m + t_max + 1) throw std::invalid_argument("horizon must be >= m + max(t_grid) + 1");
    if (alternative != 1 && alternative != 2) throw std::invalid_argument("alternative must be 1 or 2");
    if (transient_d && *transient_d < 1) throw std::invalid_argument("transient_d must be >= 1");
    if (batches < 2) throw std::invalid_argument("need at least 2 batches");
    for (const auto& p : prior_grid) p.validate();
}

HomogeneityTest chi_square_homogeneity(const std::vector<std::int64_t>& successes,
                                       const std::vector<std::int64_t>& trials) {
    if (successes.size() != trials.size() || trials.empty()) {
        throw std::invalid_argument("mismatched homogeneity table");
    }
    HomogeneityTest out;
    out.dof = static_cast<int>(trials.size()) - 1;
    double x = 0.0;
    double n = 0.0;
    for (std::size_t k = 0; k < trials.size(); ++k) {
        x += static_cast<double>(successes[k]);
        n += static_cast<double>(trials[k]);
    }
    const double p = x / n;
    if (out.dof == 0 || p <= 0.0 || p >= 1.0) return out;
    for (std::size_t k = 0; k < trials.size(); ++k) {
        const double nk = static_cast<double>(trials[k]);
        const double e = nk * p;
        const double dx = static_cast<double>(successes[k]) - e;
        out.stat += dx * dx / (e * (1.0 - p));
    }
    boost::math::chi_squared dist(out.dof);
    out.pvalue = boost::math::cdf(boost::math::complement(dist, out.stat));
    return out;
}

EvaluationReport modified_measures_mc(const Policy& policy, const LikelihoodRatioModel& model,
                                      const EvaluationConfig& config) {
    config.validate();
    policy.validate();
    EvaluationReport r;
    McConfig mc{config.seed, config.threads, config.batches};
    const bool memoryless = Detector(policy).memoryless();

    // Analytic run lengths where closed forms exist.
    try {
        if (policy.kind == RuleKind::StopAtZero) {
            r.arl_inf_analytic = 0.0;
            r.arl_post_analytic = 0.0;
        } else if (policy.kind == RuleKind::Shewhart && !model.time_varying()) {
            const auto a = arl_analytic(model, policy.nu);
            r.arl_inf_analytic = (1.0 - policy.varpi) * a.e_inf;
            r.arl_post_analytic = (1.0 - policy.varpi) * a.e_post;
            r.classical_delay = classical_lorden_shewhart(model, policy.nu);
        } else if (policy.kind == RuleKind::MixtureShewhart) {
            const auto& m2 = dynamic_cast<const TwoAlternativeModel&>(model);
            r.arl_inf_analytic = (1.0 - policy.varpi) /
                                 mixture_survival(m2, Measure::Nominal, policy.q, policy.nu);
            r.classical_delay = classical_lorden_mixture(m2, policy.q, policy.nu);
        } else if (policy.kind == RuleKind::FixedSample) {
            r.arl_inf_analytic = (1.0 - policy.varpi) * static_cast<double>(policy.fixed_n);
        }
    } catch (const ZeroSurvival& e) {
        r.caveats.push_back(std::string("no analytic run length: ") + e.what());
    } catch (const std::bad_cast&) {
        throw std::invalid_argument("mixture policy needs a two-alternative model");
    }

    if (config.estimate_arl) {
        const auto rl = mc_run_length(policy, model, RegimeSpec{}, config.n_paths, config.horizon, mc);
        r.arl_inf_mc = rl.mean_T;
        r.truncation_count = rl.truncated;
        r.truncation_bias = rl.truncated > 0;
        if (r.truncation_bias) {
            r.caveats.push_back("run-length estimate is biased low: " +
                                std::to_string(rl.truncated) + " paths hit the horizon");
        }
    }

    ConditionalOptions co;
    co.m = config.m;
    co.alternative = config.alternative;
    co.transient_d = config.transient_d;
    co.renewal_min_t = config.renewal_min_t;
    std::vector<std::int64_t> succ;
    std::vector<std::int64_t> trials;
    for (auto t : config.t_grid) {
        r.per_t.push_back(mc_conditional_detection(policy, model, t, config.n_paths, co, mc));
        const auto& row = r.per_t.back();
        succ.push_back(row.successes);
        trials.push_back(row.survivors);
        if (!(row.detection.value >= r.pollak_grid_inf.value)) {
            r.pollak_grid_inf = row.detection;
            r.pollak_argmin_t = t;
        }
        if (config.m == 1) {
            r.lorden_grid_inf = std::isnan(r.lorden_grid_inf)
                                    ? row.state_min
                                    : std::min(r.lorden_grid_inf, row.state_min);
        }
    }
    r.essinf_is_unconditional = memoryless && config.m == 1;
    if (config.m == 1) {
        r.lorden_label = r.essinf_is_unconditional ? "ess-inf (conditional law does not depend on the past)"
                                                   : "grid infimum, not ess-inf";
    } else {
        r.lorden_label = "not computed for m > 1";
    }
    const auto chi = chi_square_homogeneity(succ, trials);
    r.chi2_stat = chi.stat;
    r.chi2_dof = chi.dof;
    r.chi2_pvalue = chi.pvalue;
    r.time_equalizer = chi.pvalue >= 0.01;

    for (std::size_t k = 0; k < config.prior_grid.size(); ++k) {
        const auto& prior = config.prior_grid[k];
        PriorRow row;
        row.prior = prior;
        McConfig mck = mc;
        mck.seed = mc.seed + 7919 * (k + 1);
        const auto b = mc_bayes(policy, model, prior, config.m, config.alternative, config.n_paths, mck);
        row.shiryaev_mc = b.shiryaev;
        row.false_alarm_mc = b.false_alarm;
        if (constant_threshold(policy) && (policy.varpi >= 1.0 || !model.time_varying())) {
            row.false_alarm_analytic = false_alarm_prob_analytic(policy, model, prior);
            if (config.m == 1 && config.alternative == 1) {
                row.shiryaev_analytic = shiryaev_measure_analytic(policy, model, prior);
            }
        }
        r.bayes.push_back(row);
    }
    return r;
}

}  // namespace shewhart
