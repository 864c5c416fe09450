#include "qbl/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbl/errors.hpp"

namespace qbl {

std::string PolicySpec::name() const {
    switch (kind) {
        case PolicyKind::ucb1: return "ucb1";
        case PolicyKind::ucbv: return "ucbv";
        case PolicyKind::query_then_ucbv: return "query_then_ucbv";
        case PolicyKind::spread_query_ucbv: return "spread_query_ucbv";
        case PolicyKind::exp3_with_queries: return "exp3_with_queries";
    }
    return "?";
}

void PolicySpec::validate() const {
    if (!(zeta > 0.0)) throw ConfigError("policy: zeta must be positive");
    if (learning_rate && !(*learning_rate > 0.0))
        throw ConfigError("policy: learning_rate must be positive");
}

PolicyKind policy_kind_from_name(const std::string& name) {
    if (name == "ucb1") return PolicyKind::ucb1;
    if (name == "ucbv") return PolicyKind::ucbv;
    if (name == "query_then_ucbv") return PolicyKind::query_then_ucbv;
    if (name == "spread_query_ucbv") return PolicyKind::spread_query_ucbv;
    if (name == "exp3_with_queries") return PolicyKind::exp3_with_queries;
    throw ConfigError("policy: unknown kind '" + name + "'");
}

double ucb1_index(const ArmStats& stats, double t) {
    if (stats.pulls == 0) return std::numeric_limits<double>::infinity();
    return stats.mean_est + std::sqrt(2.0 * std::log(t) / static_cast<double>(stats.pulls));
}

double ucbv_index(const ArmStats& stats, double t, double zeta, double range) {
    if (stats.pulls == 0) return std::numeric_limits<double>::infinity();
    const double pulls = static_cast<double>(stats.pulls);
    const double explore = zeta * std::log(t);
    return stats.mean_est + std::sqrt(2.0 * stats.var_est * explore / pulls) +
           3.0 * range * explore / pulls;
}

bool query_schedule(PolicyKind kind, std::int64_t t, std::int64_t k, std::int64_t T) {
    if (t < 1 || t > T) throw InputError("query_schedule: t must lie in [1, T]");
    switch (kind) {
        case PolicyKind::ucb1:
        case PolicyKind::ucbv:
            return false;
        case PolicyKind::query_then_ucbv:
        case PolicyKind::exp3_with_queries:
            return t <= k;
        case PolicyKind::spread_query_ucbv:
            // Evenly spaced grid with exactly k requests over [1, T].
            return (t * k) / T != ((t - 1) * k) / T;
    }
    return false;
}

double exp3_auto_learning_rate(int n, std::int64_t T, std::int64_t k) {
    const double horizon = static_cast<double>(T - k);
    if (horizon < 1.0 || n < 2) return 1.0;  // no bandit rounds or nothing to learn
    return std::sqrt(2.0 * std::log(static_cast<double>(n)) /
                     (static_cast<double>(n) * horizon));
}

// ---------------------------------------------------------------------------
// IndexPolicy
// ---------------------------------------------------------------------------

IndexPolicy::IndexPolicy(const PolicySpec& spec, int n, std::int64_t T, std::int64_t k)
    : spec_(spec), n_(n), T_(T), k_(k), stats_(static_cast<std::size_t>(n)) {
    spec_.validate();
}

bool IndexPolicy::wants_query(std::int64_t t) const {
    return query_schedule(spec_.kind, t, k_, T_);
}

bool IndexPolicy::discards_query_feedback() const {
    return spec_.kind == PolicyKind::query_then_ucbv && !spec_.retain_query_feedback;
}

double IndexPolicy::index(int arm) const {
    const ArmStats& stats = stats_[static_cast<std::size_t>(arm)];
    const double t = static_cast<double>(rounds_ + 1);
    if (spec_.kind == PolicyKind::ucb1) return ucb1_index(stats, t);
    return ucbv_index(stats, t, spec_.zeta, 1.0);
}

int IndexPolicy::step(Rng&) {
    // Initialization sweep: pull each arm once, in index order.
    for (int arm = 0; arm < n_; ++arm)
        if (stats_[static_cast<std::size_t>(arm)].pulls == 0) return arm;
    int best = 0;
    double best_index = index(0);
    for (int arm = 1; arm < n_; ++arm) {
        const double value = index(arm);
        if (value > best_index) {  // ties stay with the lowest arm index
            best = arm;
            best_index = value;
        }
    }
    return best;
}

void IndexPolicy::observe(int arm, double reward, bool was_query) {
    if (arm < 0 || arm >= n_) throw InputError("observe: arm out of range");
    if (!(reward >= 0.0 && reward <= 1.0)) throw InputError("observe: reward outside [0,1]");
    if (was_query && discards_query_feedback()) return;
    stats_[static_cast<std::size_t>(arm)].add(reward);
    rounds_ += 1;
}

// ---------------------------------------------------------------------------
// Exp3Policy
// ---------------------------------------------------------------------------

Exp3Policy::Exp3Policy(const PolicySpec& spec, int n, std::int64_t T, std::int64_t k)
    : spec_(spec),
      n_(n),
      T_(T),
      k_(k),
      learning_rate_(spec.learning_rate ? *spec.learning_rate
                                        : exp3_auto_learning_rate(n, T, k)),
      log_weights_(static_cast<std::size_t>(n), 0.0) {
    spec_.validate();
}

bool Exp3Policy::wants_query(std::int64_t t) const {
    return query_schedule(spec_.kind, t, k_, T_);
}

std::vector<double> Exp3Policy::probabilities() const {
    const double shift = *std::max_element(log_weights_.begin(), log_weights_.end());
    std::vector<double> probs(log_weights_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < log_weights_.size(); ++i) {
        probs[i] = std::exp(log_weights_[i] - shift);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

int Exp3Policy::step(Rng& policy_stream) {
    const std::vector<double> probs = probabilities();
    const double u = policy_stream.uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return n_ - 1;
}

void Exp3Policy::observe(int arm, double reward, bool was_query) {
    if (arm < 0 || arm >= n_) throw InputError("observe: arm out of range");
    if (!(reward >= 0.0 && reward <= 1.0)) throw InputError("observe: reward outside [0,1]");
    if (was_query) return;  // arm was not drawn from our distribution
    const double p = probabilities()[static_cast<std::size_t>(arm)];
    log_weights_[static_cast<std::size_t>(arm)] += learning_rate_ * reward / p;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, int n, std::int64_t T,
                                    std::int64_t k) {
    if (spec.kind == PolicyKind::exp3_with_queries)
        return std::make_unique<Exp3Policy>(spec, n, T, k);
    return std::make_unique<IndexPolicy>(spec, n, T, k);
}

}  // namespace qbl
