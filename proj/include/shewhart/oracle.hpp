#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shewhart/calibration.hpp"
#include "shewhart/evaluation.hpp"
#include "shewhart/lr_models.hpp"

namespace shewhart {

// Piecewise-linear function of ℓ ≥ 0 on increasing nodes x[0] = 0 < x[1] < ...,
// extended linearly beyond the last node.
struct PiecewiseLinear {
    std::vector<double> x;
    std::vector<double> g;

    double operator()(double l) const;
};

// E∞,t[g(ℓ_t)] computed exactly for piecewise-linear g from the survival
// functions, using E∞[ℓ 1{ℓ ≥ a}] = P₀(ℓ ≥ a) on every cell.
double expect_nominal(const LikelihoodRatioModel& model, std::int64_t t, const PiecewiseLinear& g);

// Log-spaced ℓ-grid covering the bulk of the nominal and post-change laws at
// time t, with 0 prepended and the given extra points merged in.
std::vector<double> lr_grid(const LikelihoodRatioModel& model, std::int64_t t, int points,
                            const std::vector<double>& extra = {});

struct LagrangianCheck {
    double gamma = 0.0;
    double nu = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    double identity_residual = 0.0;    // |E∞[ℓ_S] − λE∞[S] − ν|
    double dp_value = 0.0;             // optimal E∞[ℓ_T − λT] over T ≤ M
    double dp_residual = 0.0;          // |dp_value − ν|
    double region_residual = 0.0;      // |continuation threshold at t = 1 − ν|
    double refinement_delta = 0.0;     // |dp_value(2 × grid) − dp_value|
    std::vector<std::int64_t> horizons;
    std::vector<double> dp_by_horizon;
    std::int64_t M = 0;
    bool pass = false;
};

// Certificate for the constant-threshold detection-probability optimum.
// Throws OracleMismatch on failure when strict.
LagrangianCheck lagrangian_check(const LikelihoodRatioModel& model, double gamma,
                                      std::int64_t M = 200, int grid_points = 2001,
                                      bool strict = true);

struct DpTables {
    std::vector<double> omega;  // ω_0..ω_M
    std::vector<double> c_seq;  // c_0..c_{M−1}
    std::vector<double> rho;    // ρ_1..ρ_{M+1}
    double lambda = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> continuation;  // K_t = 1 − βc_t + E∞[V_{t+1}], t = 0..M−1
    std::int64_t M = 0;
};

struct DpBoundResult {
    double V0 = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    bool pass = false;
    double omega0_residual = 0.0;
    double recursion_residual = 0.0;
    double refinement_delta = 0.0;
    bool bounds_ok = false;      // ω ≤ 1/(1−ρ), c ≤ 1/((1−β)(1−ρ)), K_t ≤ ω_t
    bool monotone = false;       // V_t nondecreasing in ℓ on the grid
    DpTables tables;
};

// Backward induction bounding every stopping rule on horizon M by ω_0 = γ.
DpBoundResult dp_bound(const LikelihoodRatioModel& model, const Policy& policy, double gamma,
                            std::int64_t M, int grid_points = 2001, double tolerance = 1e-4,
                            bool strict = true);

struct CompetitorSpec {
    RuleKind kind = RuleKind::ClassicalCusum;
    double c = std::numeric_limits<double>::quiet_NaN();  // Poor's constant
    std::string label;
};

std::vector<CompetitorSpec> default_competitors();

struct DominanceConfig {
    std::int64_t arl_paths = 20000;
    std::int64_t paths_per_t = 100000;
    std::vector<std::int64_t> t_grid{0, 1, 2, 3, 5, 8, 12, 20};
    std::int64_t horizon = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;
    int batches = 100;
    int max_tune_iterations = 80;
    bool strict = true;
};

struct DominanceRow {
    std::string rule;
    Policy policy;
    Estimate arl;
    bool arl_matched = false;
    Estimate pollak;                 // grid infimum of per-t detection probabilities
    std::int64_t pollak_argmin_t = -1;
    double lorden = std::numeric_limits<double>::quiet_NaN();  // visited-state minimum
    Estimate upper_bound;            // E∞[ℓ_T] / E∞[T]
    bool dominated = false;          // pollak ≤ β + 3 SE
    bool bound_ok = false;           // pollak ≤ upper bound + 3 SE
    bool ordering_ok = false;        // lorden ≤ pollak + 3 SE
    std::vector<std::int64_t> skipped_t;  // change times without survivors
};

struct DominanceTable {
    double gamma = 0.0;
    double nu = 0.0;
    double beta = 0.0;
    std::vector<DominanceRow> rows;
    bool pass = false;
};

DominanceTable dominance_sweep(const LikelihoodRatioModel& model, double gamma,
                               const std::vector<CompetitorSpec>& competitors,
                               const DominanceConfig& config);

struct MixtureBoundCheck {
    double gamma = 0.0;
    double q = 0.0;
    double nu = 0.0;
    Estimate denominator;        // E∞[Σ_{t<S} z_t]
    double target1 = 0.0;        // γ P₀¹(mixture ≥ ν)
    double target2 = 0.0;        // γ P₀²(mixture ≥ ν)
    double z1 = 0.0;             // |denominator − target_i| / SE
    double z2 = 0.0;
    Estimate bound;              // γ / denominator
    double classical_delay = 0.0;
    double z_bound = 0.0;
    bool pass = false;
};

MixtureBoundCheck mixture_bound_check(const TwoAlternativeModel& model, const Policy& policy, double gamma,
                           std::int64_t n_paths, const McConfig& mc, bool strict = true);

}  // namespace shewhart
