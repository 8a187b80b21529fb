// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shewhart/calibration.hpp"
#include "shewhart/detectors.hpp"
#include "shewhart/evaluation.hpp"
#include "shewhart/jobs.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/monte_carlo.hpp"
#include "shewhart/oracle.hpp"
#include "shewhart/rng.hpp"

using namespace shewhart;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << " [exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("[%s] %d %s:%s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
                out.detail.str().c_str(), secs);
    std::fflush(stdout);
}

// Folds the checks of a job result into an outcome.
void absorb(Outcome& out, const JobResult& r) {
    int n = 0;
    for (const auto& c : r.checks) {
        ++n;
        out.require(c.pass, c.name + " " + c.detail);
    }
    out.detail << " " << n << " checks";
}

}  // namespace

int main() {
    const JobContext ctx{1, 0};

    criterion(1, "single-alternative classical range at mu=6.1805", [&](Outcome& out) {
        const auto r = run_reproduce(1, Json::object(), ctx);
        absorb(out, r);
        out.detail << ", gamma_max=" << r.report.at("gamma_max_4sig").get<double>();
    });

    criterion(2, "two-sided mixture classical range at mu=6.1805", [&](Outcome& out) {
        const auto r = run_reproduce(3, Json::object(), ctx);
        absorb(out, r);
    });

    criterion(3, "max-min Bayesian equalizer on mu=1", [&](Outcome& out) {
        const GaussianMeanShiftModel model(1.0);
        const double pis[] = {0.0, 0.1, 0.3, 0.5, 0.8};
        const double ps[] = {0.01, 0.05, 0.2, 0.5, 0.9};
        for (double gamma : {2.0, 10.0, 100.0}) {
            const auto cal = calibrate_shiryaev_maxmin(model, gamma);
            double lo = 1e300;
            double hi = -1e300;
            for (double pi : pis) {
                for (double p : ps) {
                    const double j = shiryaev_measure_analytic(cal.policy, model, {pi, p});
                    lo = std::min(lo, j);
                    hi = std::max(hi, j);
                }
            }
            const double arl = (1.0 - cal.policy.varpi) / survival_inf(model, 1, cal.policy.nu);
            out.detail << " gamma=" << gamma << ": spread " << hi - lo << ", arl " << arl << ";";
            out.require(hi - lo <= 1e-12, "spread at gamma=" + std::to_string(gamma));
            out.require(std::abs(arl - gamma) <= 1e-12 * gamma, "arl at gamma=" + std::to_string(gamma));
        }
    });

    criterion(4, "time-varying reduction and time equalizer", [&](Outcome& out) {
        for (double mu : {0.5, 1.0, 3.0}) {
            const GaussianMeanShiftModel model(mu);
            for (double gamma : {2.0, 10.0, 100.0}) {
                const double b_tv = calibrate_time_varying(model, gamma).value;
                const double b_c = calibrate_lorden_pollak(model, gamma).value;
                out.require(std::abs(b_tv - b_c) < 1e-8, "constant reduction mu=" + std::to_string(mu));
            }
        }
        const GaussianMeanShiftModel alt(std::vector<double>{1.0, 2.0});
        const auto cal = calibrate_time_varying(alt, 10.0);
        EvaluationConfig cfg;
        cfg.n_paths = 100000;
        cfg.t_grid.clear();
        for (std::int64_t t = 0; t <= 20; ++t) cfg.t_grid.push_back(t);
        cfg.estimate_arl = false;
        cfg.seed = ctx.seed;
        const auto rep = modified_measures_mc(cal.policy, alt, cfg);
        out.detail << " beta=" << cal.value << ", chi2=" << rep.chi2_stat << " (dof " << rep.chi2_dof
                   << "), p=" << rep.chi2_pvalue;
        out.require(rep.chi2_pvalue >= 0.01, "chi-square p-value");
    });

    criterion(5, "mixture case exclusivity", [&](Outcome& out) {
        const TwoAlternativeGaussianModel model(1.0, 2.0);
        int bad = 0;
        for (int k = 0; k < 20; ++k) {
            const double gamma = std::pow(10.0, 0.1 + 2.9 * k / 19.0);
            if (mixture_case_conditions(model, gamma).count() != 1) ++bad;
        }
        out.detail << " (1,2): " << bad << " of 20 grid points without a unique case;";
        out.require(bad == 0, "exclusivity on (1,2)");
        // (1, 2) never reaches the equalizing case, so the residual is taken on (1, -2).
        const TwoAlternativeGaussianModel opposite(1.0, -2.0);
        const auto cal = calibrate_mixture(opposite, 10.0);
        const double d = std::abs(mixture_gap(opposite, cal.policy.q, 10.0));
        out.detail << " (1,-2) case " << cal.policy.case_label << ", |D(q)|=" << d;
        out.require(cal.policy.case_label == "iii", "equalizing case on (1,-2)");
        out.require(d < 1e-9, "D(q) residual");
    });

    criterion(6, "oracle certification", [&](Outcome& out) {
        const GaussianMeanShiftModel model(1.0);
        for (double gamma : {1.0, 10.0}) {
            const auto c = lagrangian_check(model, gamma, 200, 2001, false);
            out.require(c.pass, "lagrangian gamma=" + std::to_string(gamma));
            out.detail << " lagrangian(" << gamma << ") id " << c.identity_residual << " dp "
                       << c.dp_residual << ";";
        }
        const std::vector<std::vector<double>> battery{{1.0}, {0.5}, {3.0}, {1.0, 2.0}, {0.5, 1.0, 1.5, 2.0}};
        double worst = -1e300;
        for (const auto& mus : battery) {
            const GaussianMeanShiftModel m(mus);
            for (double gamma : {2.0, 10.0, 50.0}) {
                const auto cal = calibrate_time_varying(m, gamma);
                const auto d = dp_bound(m, cal.policy, gamma, 200, 2001, 1e-4, false);
                worst = std::max(worst, d.V0 - gamma);
                out.require(d.pass, "dp_bound gamma=" + std::to_string(gamma));
            }
        }
        out.detail << " max V0-gamma " << worst << ";";
        const std::pair<double, double> cases[] = {{6.1805, 500.0}, {2.0, 2.0}};
        for (const auto& [mu, gamma] : cases) {
            const auto tm = TwoAlternativeGaussianModel::two_sided(mu);
            const auto cal = calibrate_mixture(tm, gamma);
            const auto c = mixture_bound_check(tm, cal.policy, gamma, 1000000, {ctx.seed, 0, 100}, false);
            out.detail << " mixture bound z " << std::max({c.z1, c.z2, c.z_bound}) << ";";
            out.require(c.pass, "mixture bound mu=" + std::to_string(mu));
        }
    });

    criterion(7, "competitor dominance at gamma=10, mu=1", [&](Outcome& out) {
        const GaussianMeanShiftModel model(1.0);
        DominanceConfig cfg;
        cfg.paths_per_t = 100000;
        cfg.arl_paths = 100000;
        cfg.seed = ctx.seed;
        cfg.strict = false;
        const auto table = dominance_sweep(model, 10.0, default_competitors(), cfg);
        out.detail << " beta=" << table.beta << ";";
        for (const auto& row : table.rows) {
            out.detail << " " << row.rule << " " << row.pollak.value << ";";
            out.require(row.dominated, row.rule);
        }
    });

    criterion(8, "CUSUM reduces to Shewhart below one", [&](Outcome& out) {
        const GaussianMeanShiftModel model(1.0);
        const std::int64_t n = 10000;
        const std::int64_t len = 400;
        std::int64_t mismatch = 0;
        std::int64_t classical_late = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            Rng rng = make_stream(ctx.seed + 8, static_cast<std::uint64_t>(i));
            // Half the paths change at a random time, half never change.
            RegimeSpec regime;
            if (i % 2 == 1) regime.tau = static_cast<std::int64_t>(i % 37);
            const auto path = sample_path(model, regime, len, rng);
            for (double nu : {0.1, 0.5, 1.0}) {
                const auto s = run_to_stop(Policy::shewhart(nu), path, StartDecision::RunDetector);
                const auto c = run_to_stop(Policy::cusum(nu), path, StartDecision::RunDetector);
                const auto k = run_to_stop(Policy::classical_cusum(nu), path, StartDecision::RunDetector);
                if (s.T != c.T || s.truncated != c.truncated) ++mismatch;
                if (k.T != 1) ++classical_late;
            }
        }
        out.detail << " " << mismatch << " mismatches, " << classical_late
                   << " classical stops after 1 over " << 3 * n << " runs";
        out.require(mismatch == 0, "CUSUM vs Shewhart");
        out.require(classical_late == 0, "classical CUSUM at T=1");
    });

    std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
