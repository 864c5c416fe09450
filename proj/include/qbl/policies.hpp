#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qbl/rng.hpp"

namespace qbl {

// Streaming sufficient statistics for one arm. var_est uses the biased 1/N
// convention; both estimates match the batch statistics of the observed
// rewards to within accumulation error.
struct ArmStats {
    std::int64_t pulls = 0;
    double mean_est = 0.0;
    double var_est = 0.0;
    double m2 = 0.0;  // running sum of squared deviations

    void add(double reward) {
        pulls += 1;
        const double d = reward - mean_est;
        mean_est += d / static_cast<double>(pulls);
        m2 += d * (reward - mean_est);
        var_est = m2 / static_cast<double>(pulls);
    }

    bool operator==(const ArmStats&) const = default;
};

enum class PolicyKind { ucb1, ucbv, query_then_ucbv, spread_query_ucbv, exp3_with_queries };

struct PolicySpec {
    PolicyKind kind = PolicyKind::ucbv;
    double zeta = 1.2;  // UCB-V exploration constant
    // Exp3 learning rate; unset means sqrt(2 ln n / (n (T - k))).
    std::optional<double> learning_rate;
    // Ablation switch: keep query-phase observations instead of discarding
    // them (query_then_ucbv only).
    bool retain_query_feedback = false;

    std::string name() const;
    void validate() const;

    bool operator==(const PolicySpec&) const = default;
};

PolicyKind policy_kind_from_name(const std::string& name);

// Optimistic indices. Unpulled arms rank above everything (+infinity).
double ucb1_index(const ArmStats& stats, double t);
double ucbv_index(const ArmStats& stats, double t, double zeta, double range);

// Deterministic query schedules (1 <= t <= T):
//   query_then_ucbv, exp3_with_queries: request on t <= k;
//   spread_query_ucbv: request on an evenly spaced grid of k rounds;
//   ucb1, ucbv: never request.
bool query_schedule(PolicyKind kind, std::int64_t t, std::int64_t k, std::int64_t T);

double exp3_auto_learning_rate(int n, std::int64_t T, std::int64_t k);

// Learner interface consumed by the protocol engine. Policies see only the
// tuples (arm, reward, was_query) fed to observe(); each run gets a fresh
// instance.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    // Query request for round t; the engine clamps it against the budget.
    virtual bool wants_query(std::int64_t t) const { (void)t; return false; }
    // Arm choice on a non-query round.
    virtual int step(Rng& policy_stream) = 0;
    virtual void observe(int arm, double reward, bool was_query) = 0;
};

// UCB1 / UCB-V and their query-scheduled variants. Each arm is pulled once
// (in index order) before any index comparison; index time is the policy's
// own count of incorporated observations, so a query-first variant restarts
// its clock when the bandit phase begins.
class IndexPolicy : public Policy {
public:
    IndexPolicy(const PolicySpec& spec, int n, std::int64_t T, std::int64_t k);

    std::string name() const override { return spec_.name(); }
    bool wants_query(std::int64_t t) const override;
    int step(Rng& policy_stream) override;
    void observe(int arm, double reward, bool was_query) override;

    const std::vector<ArmStats>& stats() const { return stats_; }
    std::int64_t rounds_incorporated() const { return rounds_; }
    double index(int arm) const;  // at the current internal time

private:
    bool discards_query_feedback() const;

    PolicySpec spec_;
    int n_;
    std::int64_t T_, k_;
    std::vector<ArmStats> stats_;
    std::int64_t rounds_ = 0;
};

// Exponential-weights learner with importance-weighted reward estimates.
// Query-round feedback is ignored entirely: the queried arm was not drawn
// from the policy's distribution, so the estimator would be ill-defined.
class Exp3Policy : public Policy {
public:
    Exp3Policy(const PolicySpec& spec, int n, std::int64_t T, std::int64_t k);

    std::string name() const override { return spec_.name(); }
    bool wants_query(std::int64_t t) const override;
    int step(Rng& policy_stream) override;
    void observe(int arm, double reward, bool was_query) override;

    std::vector<double> probabilities() const;
    double learning_rate() const { return learning_rate_; }

private:
    PolicySpec spec_;
    int n_;
    std::int64_t T_, k_;
    double learning_rate_;
    std::vector<double> log_weights_;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, int n, std::int64_t T,
                                    std::int64_t k);

}  // namespace qbl
