#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbl/rng.hpp"

namespace qbl {

// ---------------------------------------------------------------------------
// Arm reward distributions (support contained in [0,1])
// ---------------------------------------------------------------------------

enum class ArmKind { bernoulli, discrete, uniform01 };

class ArmDistribution {
public:
    static ArmDistribution bernoulli(double p);
    // Finite support in [0,1]; probabilities must sum to 1 within 1e-12.
    // Stored sorted by support value (samples are drawn by inverse CDF).
    static ArmDistribution discrete(std::vector<double> support, std::vector<double> probs);
    static ArmDistribution uniform01();

    ArmKind kind() const { return kind_; }
    double mean() const { return mean_; }
    double variance() const { return variance_; }

    double sample(Rng& rng) const;
    // P(X <= x), right-continuous.
    double cdf(double x) const;

    double bernoulli_p() const;
    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }

    bool operator==(const ArmDistribution&) const = default;

private:
    ArmDistribution() = default;
    ArmKind kind_ = ArmKind::uniform01;
    double mean_ = 0.0;
    double variance_ = 0.0;
    double p_ = 0.0;                 // bernoulli only
    std::vector<double> support_;    // discrete only
    std::vector<double> probs_;      // discrete only
};

// ---------------------------------------------------------------------------
// Tie-breaking
// ---------------------------------------------------------------------------

// `priority` lists arm indices from highest to lowest priority; ties in
// `values` go to the earliest listed arm. Arm indices are 0-based.
int argmax_tiebreak(std::span<const double> values, std::span<const int> priority);

std::vector<int> default_priority(int n);

// ---------------------------------------------------------------------------
// I.i.d. sampling
// ---------------------------------------------------------------------------

struct IidDraw {
    std::vector<double> rewards;
    int best = 0;
};

// Draws one coordinate per arm, in arm order, then resolves the argmax under
// the priority order.
IidDraw sample_iid_round(std::span<const ArmDistribution> arms, std::span<const int> priority,
                         Rng& env_stream);

// Allocation-free variant used by the simulation loop.
int sample_iid_round_into(std::span<const ArmDistribution> arms, std::span<const int> priority,
                          Rng& env_stream, std::span<double> rewards);

// ---------------------------------------------------------------------------
// Correlated two-arm family
// ---------------------------------------------------------------------------

// Distortion map H_c(x) = x - c*x*(1-x); strictly increasing on [0,1] for
// c in [0, 1/2] (derivative 1 + c*(2x-1) >= 1/2).
double h_map(double c, double x);

// Unique x in [0,1] with h_map(c, x) = u. Uses the rationalized root
// 2u / ((1-c) + sqrt((1-c)^2 + 4cu)), which is exact at c = 0 and avoids the
// cancellation in the textbook quadratic formula for small c.
double h_inverse(double c, double u);

enum class CorrelatedVariant : int { nu1 = 1, nu2 = 2 };

struct CorrelatedSpec {
    CorrelatedVariant variant = CorrelatedVariant::nu1;
    double a = 0.0;    // in (0, 1/4)
    double eta = 0.0;  // in (0, 1/4 - a)

    double b() const { return a + eta; }
    void validate() const;  // throws ConfigError

    // Analytic per-arm means and the static/dynamic optima.
    double arm_mean(int arm) const;
    double arm_variance(int arm) const;
    double opt_static() const;   // 1/2 + (a+b)/12
    double opt_dynamic() const;  // E[Z+] = 1/2 + b/6

    bool operator==(const CorrelatedSpec&) const = default;
};

struct CorrelatedDraw {
    double rewards[2];
    int best = 0;  // 0-based; always the arm holding Z+
    int w = 1;     // the correlating coin, in {1,2}
    double y = 0.0, z_minus = 0.0, z_plus = 0.0;
};

// Draws U ~ Unif[0,1) then W ~ Unif{1,2}; Y = U, Z- = h_inverse(a, U),
// Z+ = h_inverse(b, U). Reward assembly per variant:
//   nu1: W=1 -> (Z+, Y),  W=2 -> (Z-, Z+)
//   nu2: W=1 -> (Z+, Z-), W=2 -> (Y,  Z+)
// Arm W carries Z+ in all four cells, so best = W - 1.
CorrelatedDraw sample_correlated_round(const CorrelatedSpec& spec, Rng& env_stream);

// Canonical hard-instance parameters for horizon T and query budget k
// (requires 1 <= k <= T-1): with m = T - k,
//   a = min(1/8, 1/sqrt(m)),  eta = a / (24(k+1)).
// Returns the two variants sharing those parameters.
std::pair<CorrelatedSpec, CorrelatedSpec> correlated_params(std::int64_t T, std::int64_t k);

// ---------------------------------------------------------------------------
// Bernoulli lower-bound family (near-one means, tie-break sensitive)
// ---------------------------------------------------------------------------

struct LBStochasticSpec {
    int n = 2;
    std::int64_t T = 0;
    std::int64_t k = 0;
    int j = 1;  // perturbed arm, 0-based; must sit in the low-priority half
    double delta = 0.0;    // n / (1000 k)
    double epsilon = 0.0;  // (T - k) * delta / (50 k)
    double p = 0.0;        // 2 * delta + epsilon

    bool operator==(const LBStochasticSpec&) const = default;
};

struct LBInstancePair {
    std::vector<ArmDistribution> nu1;  // arm 0 at Be(1-p+delta), rest Be(1-p)
    std::vector<ArmDistribution> nu2;  // same, but arm j at Be(1-p+2*delta)
    LBStochasticSpec spec;
};

// Valid regime: sqrt(nT) <= k <= T/100, j in the lower-priority half of the
// default ascending order. Violations throw ConfigError naming the constraint.
LBInstancePair build_lb_instances(int n, std::int64_t T, std::int64_t k, int j);

// Small-budget variant of the construction: one arm raised to Be(1-p+delta),
// the rest at Be(1-p). delta and p are implementation defaults
// (delta = sqrt(n/(T-k))/4, p = 1/8), not derived constants.
std::vector<ArmDistribution> build_lb_case1_instance(int n, std::int64_t T, std::int64_t k,
                                                     int best_arm, double delta = -1.0,
                                                     double p = -1.0);

// ---------------------------------------------------------------------------
// InstanceSpec: declarative environment description
// ---------------------------------------------------------------------------

enum class Family { iid, correlated, lb_stochastic };

class InstanceSpec {
public:
    static InstanceSpec iid(std::vector<ArmDistribution> arms, std::vector<int> tie_break = {});
    static InstanceSpec correlated(CorrelatedSpec spec);
    static InstanceSpec lb_stochastic(int n, std::int64_t T, std::int64_t k, int j,
                                      CorrelatedVariant variant,
                                      std::vector<int> tie_break = {});

    Family family() const { return family_; }
    int n_arms() const;
    const std::vector<ArmDistribution>& arms() const { return arms_; }
    const CorrelatedSpec& correlated_spec() const;
    const LBStochasticSpec& lb_spec() const;
    CorrelatedVariant lb_variant() const { return lb_variant_; }
    const std::vector<int>& tie_break() const { return tie_break_; }

    double arm_mean(int arm) const;
    double arm_variance(int arm) const;
    // Best single-arm mean.
    double opt_static() const;
    // E[max over arms], closed form: piecewise CDF-product integration for
    // independent arms, E[Z+] for the correlated family.
    double opt_dynamic() const;
    bool has_independent_arms() const { return family_ != Family::correlated; }

    // JSON round trip; bit-exact for doubles.
    std::string to_json() const;
    static InstanceSpec from_json(const std::string& text);

    bool operator==(const InstanceSpec&) const = default;

private:
    InstanceSpec() = default;
    Family family_ = Family::iid;
    std::vector<ArmDistribution> arms_;  // iid and lb (materialized)
    CorrelatedSpec correlated_{};
    LBStochasticSpec lb_{};
    CorrelatedVariant lb_variant_ = CorrelatedVariant::nu1;
    std::vector<int> tie_break_;  // priority order, 0-based
};

// E[max of independent arms] via exact piecewise integration of the CDF
// product (breakpoints at the discrete support values).
double expected_max_independent(std::span<const ArmDistribution> arms);

// ---------------------------------------------------------------------------
// Environment: per-round sampler over an InstanceSpec
// ---------------------------------------------------------------------------

class Environment {
public:
    explicit Environment(const InstanceSpec& spec);

    int n_arms() const { return n_; }
    // Fills `rewards` (size n) and returns the oracle arm for the round.
    int sample_round(Rng& env_stream, std::span<double> rewards) const;
    double arm_mean(int arm) const { return means_[static_cast<std::size_t>(arm)]; }
    double opt_static() const { return opt_static_; }
    double opt_dynamic() const { return opt_dynamic_; }

private:
    const InstanceSpec spec_;
    int n_;
    std::vector<double> means_;
    double opt_static_;
    double opt_dynamic_;
};

}  // namespace qbl
