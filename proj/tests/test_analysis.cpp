#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "qbl/analysis.hpp"
#include "qbl/errors.hpp"

using namespace qbl;

namespace {

InstanceSpec coins(std::initializer_list<double> ps) {
    std::vector<ArmDistribution> arms;
    for (double p : ps) arms.push_back(ArmDistribution::bernoulli(p));
    return InstanceSpec::iid(std::move(arms));
}

RunResult stub_run(double pseudo, std::int64_t T, std::int64_t k, const std::string& policy) {
    RunResult run;
    run.pseudo_regret = pseudo;
    run.T = T;
    run.k = k;
    run.policy_name = policy;
    return run;
}

}  // namespace

TEST_CASE("opt_static") {
    CHECK(opt_static(coins({0.3, 0.7})) == doctest::Approx(0.7));
    CHECK(opt_static(coins({0.4})) == doctest::Approx(0.4));
    const auto corr =
        InstanceSpec::correlated(CorrelatedSpec{CorrelatedVariant::nu1, 0.1, 0.01});
    CHECK(opt_static(corr) == doctest::Approx(0.5 + 0.21 / 12.0).epsilon(1e-14));
}

TEST_CASE("opt_dynamic_bernoulli") {
    CHECK(opt_dynamic_bernoulli(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.75));
    CHECK(opt_dynamic_bernoulli(std::vector<double>{0.37}) == doctest::Approx(0.37));
    CHECK(opt_dynamic_bernoulli(std::vector<double>{1.0, 0.2, 0.9}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(opt_dynamic_bernoulli(std::vector<double>{}), InputError);
    CHECK_THROWS_AS(opt_dynamic_bernoulli(std::vector<double>{1.2}), InputError);
}

TEST_CASE("opt_dynamic_mc agrees with closed forms") {
    Rng stream(42);
    const auto fair = coins({0.5, 0.5});
    const McEstimate mc = opt_dynamic_mc(fair, 200000, stream);
    CHECK(std::abs(mc.estimate - 0.75) <= 4.0 * mc.std_err);

    const auto corr =
        InstanceSpec::correlated(CorrelatedSpec{CorrelatedVariant::nu1, 0.1, 0.01});
    Rng stream2(43);
    const McEstimate mc2 = opt_dynamic_mc(corr, 200000, stream2);
    CHECK(std::abs(mc2.estimate - (0.5 + corr.correlated_spec().b() / 6.0)) <=
          4.0 * mc2.std_err);

    // Degenerate pair: the max is always 1.
    Rng stream3(44);
    const McEstimate mc3 = opt_dynamic_mc(coins({1.0, 0.0}), 100, stream3);
    CHECK(mc3.estimate == 1.0);
    CHECK(mc3.std_err == 0.0);

    Rng stream4(45);
    CHECK_THROWS_AS(opt_dynamic_mc(fair, 1, stream4), InputError);
}

TEST_CASE("variance_gap_bound") {
    // No strictly suboptimal arms.
    CHECK(variance_gap_bound(std::vector<double>{0.0, 0.0},
                             std::vector<double>{0.25, 0.25}, 2) == 0.0);
    // Worked value: (1/4)(0.25 - 0.01) = 0.06.
    CHECK(variance_gap_bound(std::vector<double>{0.0, 0.01},
                             std::vector<double>{0.2, 0.25}, 2) ==
          doctest::Approx(0.06).epsilon(1e-14));
    // Clamped when gaps dominate variances.
    CHECK(variance_gap_bound(std::vector<double>{0.0, 0.5, 0.4},
                             std::vector<double>{0.1, 0.2, 0.25}, 3) == 0.0);
}

TEST_CASE("variance-gap bound holds exactly on random Bernoulli instances") {
    Rng rng(1400);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(7));
        std::vector<double> means, gaps, variances;
        for (int i = 0; i < n; ++i) means.push_back(rng.uniform01());
        const double opt_s = *std::max_element(means.begin(), means.end());
        for (double p : means) {
            gaps.push_back(opt_s - p);
            variances.push_back(p * (1.0 - p));
        }
        REQUIRE(opt_dynamic_bernoulli(means) - opt_s >=
                variance_gap_bound(gaps, variances, n));
    }
}

TEST_CASE("kl_bernoulli") {
    for (double p : {0.0, 0.3, 1.0}) CHECK(kl_bernoulli(p, p) == 0.0);
    CHECK(kl_bernoulli(0.5, 0.25) == doctest::Approx(0.14384).epsilon(1e-4));
    CHECK(kl_bernoulli(0.5, 0.25) ==
          doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-14));
    CHECK(kl_bernoulli(0.5, 0.0) == std::numeric_limits<double>::infinity());
    CHECK(kl_bernoulli(0.5, 1.0) == std::numeric_limits<double>::infinity());
    CHECK(kl_bernoulli(0.0, 0.3) == doctest::Approx(-std::log(0.7)).epsilon(1e-12));
    CHECK(kl_bernoulli(0.3, 0.3) == 0.0);
    CHECK(kl_bernoulli(0.2, 0.4) > 0.0);
    CHECK_THROWS_AS(kl_bernoulli(1.2, 0.5), InputError);
    CHECK_THROWS_AS(kl_bernoulli(0.5, -0.1), InputError);
    // Infinite divergence flows through Bretagnolle-Huber as a zero bound.
    CHECK(bh_lower_bound(kl_bernoulli(0.5, 0.0)) == 0.0);
}

TEST_CASE("kl_density_grid") {
    // Identical densities at a = 0.
    CHECK(kl_density_grid(0.0, 0.1, KlDirection::forward) ==
          doctest::Approx(0.0).epsilon(1e-15));
    CHECK(kl_density_grid(0.0, 0.1, KlDirection::reverse) ==
          doctest::Approx(0.0).epsilon(1e-15));

    const double a = 0.1, b = 0.11;
    const double fwd = kl_density_grid(a, b, KlDirection::forward);
    const double rev = kl_density_grid(a, b, KlDirection::reverse);
    CHECK(fwd > 0.0);
    CHECK(fwd <= a * a / 9.0 + 1e-9);
    CHECK(rev <= a * a / 9.0 + 1e-9);
    // First-order symmetry of the divergence pair.
    CHECK(std::abs(fwd - rev) <= a * a * a);

    // Simpson convergence: doubling the grid barely moves the value.
    CHECK(std::abs(kl_density_grid(a, b, KlDirection::forward, 8193) - fwd) < 1e-10);

    CHECK_THROWS_AS(kl_density_grid(a, b, KlDirection::forward, 100), InputError);
    CHECK_THROWS_AS(kl_density_grid(a, b, KlDirection::forward, 2), InputError);
    CHECK_THROWS_AS(kl_density_grid(0.3, 0.3, KlDirection::forward), AnalysisError);
}

TEST_CASE("one-round KL budget across horizons") {
    for (auto [T, k] : {std::pair<std::int64_t, std::int64_t>{65, 1},
                        {101, 1},
                        {10001, 1},
                        {10001, 5000},
                        {1000001, 1}}) {
        const auto [nu1, nu2] = correlated_params(T, k);
        const double m = static_cast<double>(T - k);
        const double kl = std::max(kl_density_grid(nu1.a, nu1.b(), KlDirection::forward),
                                   kl_density_grid(nu1.a, nu1.b(), KlDirection::reverse));
        CHECK(m * kl <= 1.0 / 9.0 + 1e-9);
    }
}

TEST_CASE("bh_lower_bound") {
    CHECK(bh_lower_bound(0.0) == 0.5);
    CHECK(bh_lower_bound(1.0 / 9.0) == doctest::Approx(0.44737).epsilon(1e-4));
    CHECK(bh_lower_bound(1.0) < bh_lower_bound(0.5));
    CHECK(bh_lower_bound(0.5) < bh_lower_bound(0.1));
    CHECK_THROWS_AS(bh_lower_bound(-0.1), InputError);
}

TEST_CASE("aggregate") {
    const auto instance = coins({0.5, 0.5});
    // Identical deterministic runs: zero spread.
    std::vector<RunResult> same = {stub_run(3.0, 10, 0, "ucbv"), stub_run(3.0, 10, 0, "ucbv")};
    const RegretSummary flat = aggregate(same, instance);
    CHECK(flat.mean_pseudo_regret == 3.0);
    CHECK(flat.std_err == 0.0);

    // Two-point sample: mean 1, std err 1.
    std::vector<RunResult> two = {stub_run(0.0, 10, 0, "ucbv"), stub_run(2.0, 10, 0, "ucbv")};
    const RegretSummary summary = aggregate(two, instance);
    CHECK(summary.mean_pseudo_regret == doctest::Approx(1.0));
    CHECK(summary.std_err == doctest::Approx(1.0));
    CHECK(summary.ci95_hi - summary.mean_pseudo_regret == doctest::Approx(1.96));
    CHECK(summary.mean_pseudo_regret - summary.ci95_lo == doctest::Approx(1.96));

    // Mixed configurations are rejected.
    std::vector<RunResult> mixed = {stub_run(0.0, 10, 0, "ucbv"), stub_run(1.0, 20, 0, "ucbv")};
    CHECK_THROWS_AS(aggregate(mixed, instance), AggregationError);
    std::vector<RunResult> mixed_policy = {stub_run(0.0, 10, 0, "ucbv"),
                                           stub_run(1.0, 10, 0, "ucb1")};
    CHECK_THROWS_AS(aggregate(mixed_policy, instance), AggregationError);
    CHECK_THROWS_AS(aggregate(std::vector<RunResult>{}, instance), InputError);
}

TEST_CASE("analyze report") {
    const AnalysisReport fair = analyze(coins({0.5, 0.5}));
    CHECK(fair.opt_static == doctest::Approx(0.5));
    CHECK(fair.opt_dynamic == doctest::Approx(0.75));
    CHECK(fair.opt_dynamic - fair.opt_static == doctest::Approx(0.25));
    CHECK(fair.variance_gap_bound == 0.0);  // both arms optimal, S is empty
    CHECK(fair.gaps == std::vector<double>{0.0, 0.0});

    const AnalysisReport skew = analyze(coins({0.5, 0.45}));
    CHECK(skew.variance_gap_bound ==
          doctest::Approx(0.25 * std::max(0.45 * 0.55 - 0.05, 0.0)).epsilon(1e-12));
    CHECK(skew.opt_dynamic - skew.opt_static >= skew.variance_gap_bound);

    const auto corr =
        InstanceSpec::correlated(CorrelatedSpec{CorrelatedVariant::nu1, 0.1, 0.01});
    const AnalysisReport report = analyze(corr);
    CHECK(report.opt_static == doctest::Approx(0.5 + 0.21 / 12.0));
    CHECK(report.opt_dynamic == doctest::Approx(0.5 + 0.11 / 6.0));
    CHECK(report.variance_gap_bound == 0.0);  // bound presumes independence
    CHECK(report.gaps[1] == doctest::Approx(0.1 / 12.0).epsilon(1e-12));
    CHECK(report.to_json().find("opt_dynamic") != std::string::npos);

    const AnalysisReport single = analyze(coins({0.4}));
    CHECK(single.variance_gap_bound == 0.0);
}

TEST_CASE("decomposition residual at small scale") {
    const auto instance = coins({0.5, 0.45});
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < 40; ++r) seeds.push_back(500 + r);
    const DecompositionResult res = decomposition_residual(instance, 3000, 800, 40, seeds);
    CHECK(res.query_credit == doctest::Approx(800.0 * 0.225).epsilon(1e-12));
    CHECK(std::abs(res.residual) <= res.combined_ci);
    CHECK(res.lhs.replicates == 40);

    // k = 0 degenerates to comparing bare runs with themselves in law.
    const DecompositionResult none = decomposition_residual(instance, 500, 0, 10, seeds);
    CHECK(none.query_credit == 0.0);
    CHECK(none.rhs == doctest::Approx(none.bare.mean_pseudo_regret));

    // k = T: the lhs is exactly -T * (OPTd - OPTs) every run.
    const DecompositionResult all = decomposition_residual(instance, 200, 200, 5, seeds);
    CHECK(all.lhs.mean_pseudo_regret == doctest::Approx(-200.0 * 0.225).epsilon(1e-10));
    CHECK(all.lhs.std_err == doctest::Approx(0.0));

    const auto corr =
        InstanceSpec::correlated(CorrelatedSpec{CorrelatedVariant::nu1, 0.1, 0.01});
    CHECK_THROWS_AS(decomposition_residual(corr, 100, 10, 5, seeds), AnalysisError);
    CHECK_THROWS_AS(decomposition_residual(instance, 100, 10, 100, seeds), InputError);
}
