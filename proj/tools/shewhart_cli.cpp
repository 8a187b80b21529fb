#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "shewhart/errors.hpp"
#include "shewhart/jobs.hpp"

using namespace shewhart;

namespace {

Json read_job(const std::string& path) {
    if (path.empty()) return Json::object();
    std::ifstream in(path);
    if (!in) throw InvalidJob("cannot open job file '" + path + "'");
    try {
        Json j = Json::parse(in);
        if (!j.is_object()) throw InvalidJob("job must be a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidJob(std::string("job is not valid JSON: ") + e.what());
    }
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidJob("cannot write '" + path + "'");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shewhart-type change detection: calibration, simulation and certification"};
    app.set_version_flag("--version", std::string(SHEWHART_VERSION));
    app.require_subcommand(1);

    std::string job_path;
    std::string out_path;
    std::uint64_t seed = 0;
    int threads = 0;
    int example = 0;

    auto add_common = [&](CLI::App* sub, bool job_required) {
        auto* opt = sub->add_option("--job", job_path, "JSON job file")->check(CLI::ExistingFile);
        if (job_required) opt->required();
        sub->add_option("--seed", seed, "64-bit RNG seed (overrides the job)");
        sub->add_option("--threads", threads, "worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out_path, "write output here instead of stdout");
    };
    auto* calibrate = app.add_subcommand("calibrate", "calibrate a stopping rule");
    auto* simulate = app.add_subcommand("simulate", "evaluate a rule by Monte Carlo");
    auto* sweep = app.add_subcommand("sweep", "calibrate and evaluate over a gamma grid");
    auto* oracle = app.add_subcommand("oracle", "run the certification battery");
    auto* reproduce = app.add_subcommand("reproduce", "reproduce a worked example");
    add_common(calibrate, true);
    add_common(simulate, true);
    add_common(sweep, true);
    add_common(oracle, false);
    add_common(reproduce, false);
    reproduce->add_option("example", example, "example id")->required();

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Json job = read_job(job_path);
        if (job.contains("command") && job.at("command") != command) {
            throw InvalidJob("job command '" + job.at("command").dump() + "' does not match '" + command + "'");
        }
        JobContext ctx;
        ctx.threads = threads;
        if (job.contains("seed")) ctx.seed = job.at("seed").get<std::uint64_t>();
        if (app.get_subcommands().front()->count("--seed") > 0) ctx.seed = seed;

        std::string format = job.value("output", command == "sweep" ? "csv" : "json");
        if (format != "json" && format != "csv") throw InvalidJob("output must be 'json' or 'csv'");
        if (format == "csv" && command != "sweep") throw InvalidJob("csv output is only available for sweep");

        JobResult result;
        if (command == "calibrate") result = run_calibrate(job, ctx);
        else if (command == "simulate") result = run_simulate(job, ctx);
        else if (command == "sweep") result = run_sweep(job, ctx);
        else if (command == "oracle") result = run_oracle(job, ctx);
        else {
            if (job.contains("example") && job.at("example") != example) {
                throw InvalidJob("job example does not match the command line");
            }
            result = run_reproduce(example, job, ctx);
        }

        if (format == "csv") {
            write_output(out_path, result.csv);
        } else {
            write_output(out_path, finalize_report(result, command, job, ctx).dump(2) + "\n");
        }
        if (const Check* bad = result.first_failure()) {
            std::cerr << "FAILED: " << bad->name;
            if (!bad->detail.empty()) std::cerr << " (" << bad->detail << ")";
            std::cerr << "\n";
            return 1;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed job: " << e.what() << "\n";
        return 2;
    }
}
