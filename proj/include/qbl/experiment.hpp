#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbl/analysis.hpp"
#include "qbl/envs.hpp"
#include "qbl/policies.hpp"

namespace qbl {

struct ExperimentConfig {
    InstanceSpec instance = InstanceSpec::iid({ArmDistribution::bernoulli(0.5),
                                               ArmDistribution::bernoulli(0.5)});
    std::vector<PolicySpec> policies;
    std::int64_t T = 1;
    std::vector<std::int64_t> k_grid;
    std::int64_t replicates = 1;
    std::uint64_t root_seed = 0;
    int parallelism = 1;
    std::string output_dir = ".";

    // Throws ConfigError naming the violated field.
    void validate() const;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
};

struct SweepRow {
    std::string policy;
    std::int64_t k = 0;
    double mean_pseudo_regret = 0.0;
    double std_err = 0.0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    double mean_realized_regret = 0.0;
    double queries_used_mean = 0.0;
};

// One row per (policy, k). Replicate r runs with seed root_seed + r; the
// worker pool only partitions work, so results are independent of the
// parallelism degree. QBL_THREADS overrides config.parallelism.
std::vector<SweepRow> run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader =
    "policy,k,mean_pseudo_regret,std_err,ci95_lo,ci95_hi,mean_realized_regret,"
    "queries_used_mean";

std::string csv_from_rows(std::span<const SweepRow> rows);

// Writes via a temp file in the target directory plus rename, so a failed or
// interrupted write never leaves a partial file at the final path.
void write_file_atomic(const std::string& path, const std::string& content);

int effective_parallelism(const ExperimentConfig& config);

// Worst-case regret envelope min{nT log T / k, sqrt(nT log T)} (the k = 0
// column falls back to the square-root branch).
double regret_envelope(double n, double T, double k);

// Least-squares scale fit of y ~ c * envelope(k) over the given rows.
double fit_envelope_constant(std::span<const SweepRow> rows, double n, double T);

}  // namespace qbl
