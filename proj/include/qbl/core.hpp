#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbl/envs.hpp"
#include "qbl/policies.hpp"

namespace qbl {

// Hard cap on oracle queries within a run. `used` never exceeds `limit` and
// never decreases.
struct QueryBudget {
    std::int64_t limit = 0;
    std::int64_t used = 0;
};

// The protocol's clamp: grants the query iff it was requested and budget
// remains, incrementing `used` on a grant. Exhausted budgets clamp silently.
bool enforce_budget(bool requested, QueryBudget& budget);

struct RoundRecord {
    std::int64_t round = 0;   // 1-based
    bool queried = false;
    int arm = 0;              // 0-based
    double reward = 0.0;
    // Conditional mean of the action taken: the arm's mean on ordinary
    // rounds, E[max] on queried rounds.
    double chosen_mean = 0.0;

    bool operator==(const RoundRecord&) const = default;
};

struct RunResult {
    std::vector<RoundRecord> records;  // empty when run with keep_records=false
    double total_reward = 0.0;
    double pseudo_regret = 0.0;
    double realized_regret = 0.0;
    std::int64_t queries_used = 0;

    // Engine-side extras the policy never sees: per-round max of the full
    // reward vector (traced runs only), per-arm sums of the realized vectors
    // (the realized-regret baseline), and per-arm pull counts.
    std::vector<double> round_max;
    std::vector<double> arm_reward_sums;
    std::vector<std::int64_t> arm_pulls;

    // Run identity, used to reject mixed aggregation batches.
    std::int64_t T = 0;
    std::int64_t k = 0;
    std::string policy_name;

    bool operator==(const RunResult&) const = default;
};

// Runs the full interaction for T rounds with query budget k. On granted
// query rounds the oracle's argmax (under the instance tie-break order) is
// played; otherwise the policy chooses and observes only its own reward.
// Equal (instance, policy, T, k, seed) give bit-identical results. The root
// seed is split into an environment stream and a policy stream, so policy
// randomness never perturbs the environment's sample path.
RunResult simulate_run(const InstanceSpec& instance, const PolicySpec& policy, std::int64_t T,
                       std::int64_t k, std::uint64_t seed, bool keep_records = true);

// Same engine with a caller-supplied learner (tests drive scripted policies
// through this).
RunResult simulate_run_with(const InstanceSpec& instance, Policy& policy, std::int64_t T,
                            std::int64_t k, std::uint64_t seed, bool keep_records = true);

// Sum over rounds of (best arm mean - chosen_mean); queried rounds contribute
// opt_static - opt_dynamic <= 0. Requires a traced run.
double pseudo_regret(const RunResult& run, const InstanceSpec& instance);

}  // namespace qbl
