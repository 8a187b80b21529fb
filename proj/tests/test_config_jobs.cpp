#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "shewhart/errors.hpp"
#include "shewhart/jobs.hpp"

using namespace shewhart;

namespace {

Json parse(const char* text) { return Json::parse(text); }

}  // namespace

TEST(Config, ModelsFromJson) {
    EXPECT_EQ(model_from_json(parse(R"({"type":"gaussian_shift","mu":1.0})"))->type_name(), "gaussian_shift");
    EXPECT_TRUE(model_from_json(parse(R"({"type":"gaussian_shift","mu_seq":[1,2]})"))->time_varying());
    EXPECT_EQ(model_from_json(parse(R"({"type":"gaussian_two_sided","mu":2})"))->num_alternatives(), 2);
    EXPECT_EQ(model_from_json(parse(R"({"type":"gaussian_two_alternative","mu1":1,"mu2":-2})"))->num_alternatives(), 2);
    const std::string tab = R"({"type":"tabulated","csv":")" + std::string(TEST_DATA_DIR) + R"(/gauss_mu1.csv"})";
    EXPECT_EQ(model_from_json(Json::parse(tab))->type_name(), "tabulated");
}

TEST(Config, RejectsMalformedModels) {
    EXPECT_THROW(model_from_json(parse(R"({"type":"gaussian_shift","mu":1,"mu_seq":[1]})")), InvalidJob);
    EXPECT_THROW(model_from_json(parse(R"({"type":"gaussian_shift","sigma":1})")), InvalidJob);
    EXPECT_THROW(model_from_json(parse(R"({"type":"poisson","mu":1})")), InvalidJob);
    EXPECT_THROW(model_from_json(parse(R"({"type":"gaussian_shift","mu":"one"})")), InvalidJob);
    EXPECT_THROW(model_from_json(parse(R"([1,2])")), InvalidJob);
}

TEST(Config, PolicyRoundTrip) {
    for (const auto& p : {Policy::shewhart(1.5, 0.2), Policy::mixture(0.3, 0.4), Policy::poor_cusum(2.0, 0.9),
                          Policy::fixed_sample(4), Policy::stop_at_zero(), Policy::classical_cusum(3.0)}) {
        const Json j = policy_to_json(p);
        const Policy back = policy_from_json(j);
        EXPECT_EQ(policy_to_json(back), j);
    }
    ThresholdSchedule s;
    s.beta = 0.4;
    s.log_nu = {0.1, 0.7};
    const Json j = policy_to_json(Policy::time_varying(s));
    EXPECT_EQ(policy_to_json(policy_from_json(j)), j);
    EXPECT_THROW(policy_from_json(parse(R"({"kind":"shewhart","nu":1,"extra":2})")), InvalidJob);
    EXPECT_THROW(policy_from_json(parse(R"({"kind":"shewhart","nu":1,"varpi":2})")), InvalidJob);
}

TEST(Config, NumbersUseTwelveDigits) {
    EXPECT_EQ(num(1.0 / 3.0).dump(), "0.333333333333");
    EXPECT_EQ(num(NAN), "nan");
    EXPECT_EQ(num(-INFINITY), "-inf");
    const Json j = round_numbers(Json{{"a", {2.0 / 3.0, 5}}, {"b", "x"}});
    EXPECT_EQ(j.dump(), R"({"a":[0.666666666667,5],"b":"x"})");
}

TEST(Config, EvaluationDefaultsAndOverrides) {
    const auto c = evaluation_from_json(parse(R"({"n_paths":500,"t_grid":[0,4],"prior_grid":[{"pi":0.1,"p":0.2}]})"),
                                        {9, 2, 100});
    EXPECT_EQ(c.n_paths, 500);
    EXPECT_EQ(c.t_grid, (std::vector<std::int64_t>{0, 4}));
    EXPECT_EQ(c.seed, 9u);
    ASSERT_EQ(c.prior_grid.size(), 1u);
    EXPECT_THROW(evaluation_from_json(parse(R"({"paths":5})"), {}), InvalidJob);
}

TEST(Jobs, HashIsStableAndSensitive) {
    const Json a = parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"lorden_pollak"})");
    const Json b = parse(R"({"criterion":"lorden_pollak","model":{"mu":1,"type":"gaussian_shift"}})");
    EXPECT_EQ(job_hash("calibrate", a), job_hash("calibrate", b));  // key order is irrelevant
    EXPECT_NE(job_hash("calibrate", a), job_hash("simulate", a));
}

TEST(Jobs, Calibrate) {
    const Json job = parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"lorden_pollak",
                               "params":{"gamma":10}})");
    const auto r = run_calibrate(job, {});
    EXPECT_TRUE(r.ok());
    EXPECT_NEAR(r.report["policy"]["nu"].get<double>(), 2.1848595898501846, 1e-9);
    const Json out = finalize_report(r, "calibrate", job, {});
    EXPECT_EQ(out["version"], SHEWHART_VERSION);
    EXPECT_EQ(out["job_hash"].get<std::string>().size(), 16u);
    EXPECT_TRUE(out["pass"].get<bool>());
    EXPECT_TRUE(out["classical_range"].is_object());
}

TEST(Jobs, CalibrateEveryCriterion) {
    const char* jobs[] = {
        R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"shiryaev","params":{"alpha":0.05,"pi":0.2,"p":0.1}})",
        R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"shiryaev_maxmin","params":{"gamma":10}})",
        R"({"model":{"type":"gaussian_shift","mu_seq":[1,2]},"criterion":"time_varying","params":{"gamma":10,"trunc_eps":1e-13}})",
        R"({"model":{"type":"gaussian_two_alternative","mu1":1,"mu2":-2},"criterion":"mixture","params":{"gamma":10}})",
    };
    for (const char* text : jobs) {
        const auto r = run_calibrate(Json::parse(text), {});
        EXPECT_TRUE(r.ok()) << text;
    }
}

TEST(Jobs, CalibrateRejectsBadJobs) {
    EXPECT_THROW(run_calibrate(parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"x","params":{}})"), {}),
                 InvalidJob);
    EXPECT_THROW(run_calibrate(parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"lorden_pollak",
                                       "params":{"gamma":10,"alpha":1}})"), {}),
                 InvalidJob);
    EXPECT_THROW(run_calibrate(parse(R"({"criterion":"lorden_pollak"})"), {}), InvalidJob);
    EXPECT_THROW(run_calibrate(parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"mixture",
                                       "params":{"gamma":10}})"), {}),
                 InvalidJob);
}

TEST(Jobs, SimulateIsDeterministic) {
    const Json job = parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"lorden_pollak",
                               "params":{"gamma":10},
                               "evaluation":{"n_paths":3000,"t_grid":[0,1,2],"prior_grid":[{"pi":0.3,"p":0.2}]}})");
    const auto a = finalize_report(run_simulate(job, {7, 1}), "simulate", job, {7, 1}).dump(2);
    const auto b = finalize_report(run_simulate(job, {7, 2}), "simulate", job, {7, 2}).dump(2);
    EXPECT_EQ(a, b);
    const auto c = finalize_report(run_simulate(job, {8, 1}), "simulate", job, {8, 1}).dump(2);
    EXPECT_NE(a, c);
    EXPECT_TRUE(Json::parse(a)["pass"].get<bool>());
}

TEST(Jobs, SimulateExplicitPolicy) {
    const Json job = parse(R"({"model":{"type":"gaussian_shift","mu":1},"policy":{"kind":"cusum","nu":3},
                               "evaluation":{"n_paths":2000,"t_grid":[0,3]}})");
    const auto r = run_simulate(job, {3, 1});
    EXPECT_EQ(r.report["policy"]["kind"], "cusum");
    EXPECT_FALSE(r.report["report"]["essinf_is_unconditional"].get<bool>());
}

TEST(Jobs, SweepWritesCsv) {
    const Json job = parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"lorden_pollak",
                               "gamma_grid":[2,10,50],"evaluation":{"n_paths":2000,"t_grid":[0,2]}})");
    const auto r = run_sweep(job, {1, 1});
    std::istringstream in(r.csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "gamma,nu,beta,varpi,q,arl_analytic,arl_mc,arl_se,jp_inf,jp_inf_se,jl_grid_inf,chi2_pvalue,truncated");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 3);
    EXPECT_THROW(run_sweep(parse(R"({"model":{"type":"gaussian_shift","mu":1},"criterion":"lorden_pollak",
                                     "gamma_grid":[]})"), {}),
                 InvalidJob);
}

TEST(Jobs, ReproduceTwoAndThree) {
    const auto two = run_reproduce(2, Json::object(), {});
    EXPECT_TRUE(two.ok());
    EXPECT_NEAR(two.report["beta"].get<double>(), 0.5081717768978057, 1e-10);
    const auto constant = run_reproduce(2, parse(R"({"mu_seq":[1.0]})"), {});
    EXPECT_TRUE(constant.ok());
    const auto three = run_reproduce(3, parse(R"({"n_paths":20000})"), {});
    EXPECT_TRUE(three.ok());
    EXPECT_NEAR(three.report["mu_threshold"].get<double>(), 1.1774100225154747, 1e-15);
    EXPECT_THROW(run_reproduce(4, Json::object(), {}), UnknownExample);
    EXPECT_THROW(run_reproduce(2, parse(R"({"nonsense":1})"), {}), InvalidJob);
}

TEST(Jobs, FirstFailureIsNamed) {
    JobResult r;
    r.checks = {{"a", true, ""}, {"b", false, "x"}, {"c", false, ""}};
    ASSERT_NE(r.first_failure(), nullptr);
    EXPECT_EQ(r.first_failure()->name, "b");
    EXPECT_FALSE(r.ok());
}
