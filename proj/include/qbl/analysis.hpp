#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbl/core.hpp"
#include "qbl/envs.hpp"
#include "qbl/policies.hpp"
#include "qbl/rng.hpp"

namespace qbl {

// Analytic quantities of one instance. For independent-arm families the
// variance_gap_bound field carries (1/2n) * sum over strictly suboptimal arms
// of (sigma_i^2 - gap_i)_+, a lower bound on opt_dynamic - opt_static; the
// bound presumes independent arms and is reported as 0 for the correlated
// family.
struct AnalysisReport {
    double opt_static = 0.0;
    double opt_dynamic = 0.0;
    double opt_dynamic_ci = 0.0;  // 95% half-width; 0 for closed forms
    double variance_gap_bound = 0.0;
    std::vector<double> gaps;
    std::vector<double> variances;

    std::string to_json() const;
};

struct RegretSummary {
    std::string policy;
    std::int64_t T = 0;
    std::int64_t k = 0;
    std::int64_t replicates = 0;
    double mean_pseudo_regret = 0.0;
    double std_err = 0.0;
    double ci95_lo = 0.0;  // half-width is 1.96 * std_err
    double ci95_hi = 0.0;
    double mean_realized_regret = 0.0;
    double mean_queries_used = 0.0;
};

struct McEstimate {
    double estimate = 0.0;
    double std_err = 0.0;
};

// Best single-arm mean.
double opt_static(const InstanceSpec& instance);

// E[max] of independent Bernoulli arms: 1 - prod_i (1 - p_i).
double opt_dynamic_bernoulli(std::span<const double> means);

// Monte Carlo E[max] with standard error (samples >= 2).
McEstimate opt_dynamic_mc(const InstanceSpec& instance, std::int64_t samples, Rng& stream);

// (1/2n) * sum over arms with gap > 0 of max(variance - gap, 0).
double variance_gap_bound(std::span<const double> gaps, std::span<const double> variances,
                          int n);

// KL(Be(p) || Be(q)), with 0 ln 0 = 0; returns +infinity when the divergence
// is infinite (p > 0 with q = 0, or p < 1 with q = 1).
double kl_bernoulli(double p, double q);

enum class KlDirection { forward, reverse };

// KL between the tilted densities p+(x) = 1 + ((a+b)/2)(2x-1) and
// p-(x) = 1 + (b/2)(2x-1) on [0,1] (what a single non-query pull of the
// gapped arm reveals under the two correlated variants), by composite
// Simpson integration. Requires a + b < 1/2 so both densities stay >= 3/4.
double kl_density_grid(double a, double b, KlDirection direction, int gridpoints = 4097);

// Bretagnolle-Huber: any test between two distributions at divergence kl has
// summed error probabilities at least (1/2) exp(-kl).
double bh_lower_bound(double kl);

// Mean / standard error / 95% CI of pseudo-regret across replicate runs.
// All runs must come from the same (instance shape, policy, T, k).
RegretSummary aggregate(std::span<const RunResult> runs, const InstanceSpec& instance);

AnalysisReport analyze(const InstanceSpec& instance);

// Checks the query-credit identity
//   R_{T,k}(query-first learner) = R_{T-k,0}(bare learner) - k (OPTd - OPTs)
// empirically: lhs from query_then_ucbv runs at (T, k), rhs from bare ucbv
// runs at (T-k, 0) minus the exact query credit. Requires independent arms.
struct DecompositionResult {
    RegretSummary lhs;        // query_then_ucbv at (T, k)
    RegretSummary bare;       // ucbv at (T-k, 0)
    double query_credit = 0.0;  // k * (opt_dynamic - opt_static)
    double rhs = 0.0;           // bare.mean - query_credit
    double residual = 0.0;      // lhs.mean - rhs
    double combined_ci = 0.0;   // sum of the two 95% half-widths
};

DecompositionResult decomposition_residual(const InstanceSpec& instance, std::int64_t T,
                                           std::int64_t k, std::int64_t replicates,
                                           std::span<const std::uint64_t> seeds,
                                           double zeta = 1.2);

}  // namespace qbl
