#include "qbl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "qbl/errors.hpp"
#include "qbl/stats.hpp"

namespace qbl {

double opt_static(const InstanceSpec& instance) { return instance.opt_static(); }

double opt_dynamic_bernoulli(std::span<const double> means) {
    if (means.empty()) throw InputError("opt_dynamic_bernoulli: no arms");
    double none_succeeds = 1.0;
    for (double p : means) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InputError("opt_dynamic_bernoulli: means must lie in [0,1]");
        none_succeeds *= 1.0 - p;
    }
    return 1.0 - none_succeeds;
}

McEstimate opt_dynamic_mc(const InstanceSpec& instance, std::int64_t samples, Rng& stream) {
    if (samples < 2) throw InputError("opt_dynamic_mc: samples must be at least 2");
    const Environment env(instance);
    std::vector<double> rewards(static_cast<std::size_t>(env.n_arms()));
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t s = 0; s < samples; ++s) {
        env.sample_round(stream, rewards);
        const double mx = *std::max_element(rewards.begin(), rewards.end());
        sum += mx;
        sum_sq += mx * mx;
    }
    const double ns = static_cast<double>(samples);
    McEstimate out;
    out.estimate = sum / ns;
    const double var = std::max(0.0, (sum_sq - ns * out.estimate * out.estimate) / (ns - 1.0));
    out.std_err = std::sqrt(var / ns);
    return out;
}

double variance_gap_bound(std::span<const double> gaps, std::span<const double> variances,
                          int n) {
    if (gaps.size() != variances.size() || n < 1)
        throw InputError("variance_gap_bound: mismatched inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (gaps[i] > 0.0)  // strictly suboptimal arms only
            total += std::max(variances[i] - gaps[i], 0.0);
    }
    return total / (2.0 * static_cast<double>(n));
}

double kl_bernoulli(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw InputError("kl_bernoulli: arguments must lie in [0,1]");
    if (p == q) return 0.0;
    if (q == 0.0 || q == 1.0) return std::numeric_limits<double>::infinity();
    double kl = 0.0;
    if (p > 0.0) kl += p * std::log(p / q);
    if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return kl;
}

double kl_density_grid(double a, double b, KlDirection direction, int gridpoints) {
    if (gridpoints < 3 || gridpoints % 2 == 0)
        throw InputError("kl_density_grid: gridpoints must be odd and >= 3");
    if (!(a >= 0.0 && b >= 0.0 && a + b < 0.5))
        throw AnalysisError("kl_density_grid: requires a, b >= 0 and a + b < 1/2");
    const double cp = 0.5 * (a + b);  // density slope of the informative arm
    const double cm = 0.5 * b;
    const auto density = [](double c, double x) { return 1.0 + c * (2.0 * x - 1.0); };
    const auto integrand = [&](double x) {
        const double plus = density(cp, x);
        const double minus = density(cm, x);
        if (!(plus > 0.0 && minus > 0.0))
            throw AnalysisError("kl_density_grid: density not positive on [0,1]");
        return direction == KlDirection::forward ? plus * std::log(plus / minus)
                                                 : minus * std::log(minus / plus);
    };
    const double h = 1.0 / static_cast<double>(gridpoints - 1);
    double total = integrand(0.0) + integrand(1.0);
    for (int i = 1; i < gridpoints - 1; ++i)
        total += integrand(static_cast<double>(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return total * h / 3.0;
}

double bh_lower_bound(double kl) {
    if (!(kl >= 0.0)) throw InputError("bh_lower_bound: kl must be nonnegative");
    return 0.5 * std::exp(-kl);
}

RegretSummary aggregate(std::span<const RunResult> runs, const InstanceSpec& instance) {
    (void)instance;
    if (runs.empty()) throw InputError("aggregate: no runs");
    const RunResult& first = runs.front();
    std::vector<double> pseudo, realized, queries;
    pseudo.reserve(runs.size());
    for (const RunResult& run : runs) {
        if (run.T != first.T || run.k != first.k || run.policy_name != first.policy_name)
            throw AggregationError("aggregate: runs come from mixed configurations");
        pseudo.push_back(run.pseudo_regret);
        realized.push_back(run.realized_regret);
        queries.push_back(static_cast<double>(run.queries_used));
    }
    const SampleStats stats = sample_stats(pseudo);
    RegretSummary out;
    out.policy = first.policy_name;
    out.T = first.T;
    out.k = first.k;
    out.replicates = static_cast<std::int64_t>(runs.size());
    out.mean_pseudo_regret = stats.mean;
    out.std_err = stats.std_err;
    out.ci95_lo = stats.mean - 1.96 * stats.std_err;
    out.ci95_hi = stats.mean + 1.96 * stats.std_err;
    out.mean_realized_regret = sample_stats(realized).mean;
    out.mean_queries_used = sample_stats(queries).mean;
    return out;
}

AnalysisReport analyze(const InstanceSpec& instance) {
    AnalysisReport report;
    report.opt_static = instance.opt_static();
    report.opt_dynamic = instance.opt_dynamic();
    report.opt_dynamic_ci = 0.0;
    const int n = instance.n_arms();
    report.gaps.reserve(static_cast<std::size_t>(n));
    report.variances.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        report.gaps.push_back(report.opt_static - instance.arm_mean(i));
        report.variances.push_back(instance.arm_variance(i));
    }
    if (instance.has_independent_arms())
        report.variance_gap_bound = variance_gap_bound(report.gaps, report.variances, n);
    return report;
}

std::string AnalysisReport::to_json() const {
    nlohmann::json j;
    j["opt_static"] = opt_static;
    j["opt_dynamic"] = opt_dynamic;
    j["opt_dynamic_ci"] = opt_dynamic_ci;
    j["variance_gap_bound"] = variance_gap_bound;
    j["gaps"] = gaps;
    j["variances"] = variances;
    return j.dump(2);
}

DecompositionResult decomposition_residual(const InstanceSpec& instance, std::int64_t T,
                                           std::int64_t k, std::int64_t replicates,
                                           std::span<const std::uint64_t> seeds, double zeta) {
    if (!instance.has_independent_arms())
        throw AnalysisError("decomposition_residual: identity requires independent arms");
    if (replicates < 1 || static_cast<std::int64_t>(seeds.size()) < replicates)
        throw InputError("decomposition_residual: need one seed per replicate");
    if (k < 0 || k > T)
        throw ConfigError("decomposition_residual: requires 0 <= k <= T");

    PolicySpec query_first{.kind = PolicyKind::query_then_ucbv, .zeta = zeta};
    PolicySpec bare{.kind = PolicyKind::ucbv, .zeta = zeta};

    std::vector<RunResult> lhs_runs, bare_runs;
    lhs_runs.reserve(static_cast<std::size_t>(replicates));
    bare_runs.reserve(static_cast<std::size_t>(replicates));
    for (std::int64_t r = 0; r < replicates; ++r) {
        const std::uint64_t seed = seeds[static_cast<std::size_t>(r)];
        lhs_runs.push_back(simulate_run(instance, query_first, T, k, seed, false));
        // The bare side uses an independent seed so both estimates are
        // independent samples of their expectations. k = T leaves it no
        // rounds at all, and a zero-round run has zero regret.
        if (k < T)
            bare_runs.push_back(simulate_run(instance, bare, T - k, 0, mix64(seed), false));
    }

    DecompositionResult out;
    out.lhs = aggregate(lhs_runs, instance);
    if (!bare_runs.empty()) {
        out.bare = aggregate(bare_runs, instance);
    } else {
        out.bare.policy = bare.name();
        out.bare.replicates = replicates;
    }
    out.query_credit =
        static_cast<double>(k) * (instance.opt_dynamic() - instance.opt_static());
    out.rhs = out.bare.mean_pseudo_regret - out.query_credit;
    out.residual = out.lhs.mean_pseudo_regret - out.rhs;
    out.combined_ci = 1.96 * (out.lhs.std_err + out.bare.std_err);
    return out;
}

}  // namespace qbl
