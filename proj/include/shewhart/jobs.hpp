#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shewhart/config.hpp"

namespace shewhart {

struct JobContext {
    std::uint64_t seed = 1;
    int threads = 0;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct JobResult {
    Json report = Json::object();
    std::string csv;  // sweep output
    std::vector<Check> checks;

    bool ok() const;
    const Check* first_failure() const;
};

std::uint64_t job_hash(const std::string& command, const Json& job);

JobResult run_calibrate(const Json& job, const JobContext& ctx);
JobResult run_simulate(const Json& job, const JobContext& ctx);
JobResult run_sweep(const Json& job, const JobContext& ctx);
JobResult run_oracle(const Json& job, const JobContext& ctx);
JobResult run_reproduce(int example, const Json& job, const JobContext& ctx);

// Adds version, job hash, seed and the check list to the report and rounds
// every number to 12 significant digits.
Json finalize_report(const JobResult& result, const std::string& command, const Json& job,
                     const JobContext& ctx);

}  // namespace shewhart
