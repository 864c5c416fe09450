#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "qbl/errors.hpp"
#include "qbl/policies.hpp"
#include "qbl/rng.hpp"

using namespace qbl;

TEST_CASE("ucb1 index formula") {
    ArmStats one;
    one.add(0.0);
    CHECK(ucb1_index(one, 1.0) == 0.0);  // ln 1 = 0

    ArmStats four;
    for (int i = 0; i < 4; ++i) four.add(0.5);
    CHECK(ucb1_index(four, std::exp(2.0)) == doctest::Approx(1.5).epsilon(1e-12));

    // Nonincreasing in pulls at fixed mean and t.
    ArmStats more = four;
    more.add(0.5);
    CHECK(ucb1_index(more, 100.0) < ucb1_index(four, 100.0));

    ArmStats unpulled;
    CHECK(ucb1_index(unpulled, 10.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("ucbv index formula") {
    ArmStats sure;
    sure.add(1.0);
    CHECK(ucbv_index(sure, 1.0, 1.2, 1.0) == 1.0);  // zero exploration at ln t = 0

    ArmStats stats;
    for (int i = 0; i < 10; ++i) stats.add(i % 2 == 0 ? 1.0 : 0.0);
    CHECK(stats.mean_est == doctest::Approx(0.5));
    CHECK(stats.var_est == doctest::Approx(0.25));
    const double expected = 0.5 + std::sqrt(2.0 * 0.25 * 1.2 / 10.0) + 3.0 * 1.2 / 10.0;
    CHECK(ucbv_index(stats, std::exp(1.0), 1.2, 1.0) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(1.10495).epsilon(1e-4));

    // var = 0 collapses the square-root term.
    ArmStats flat;
    for (int i = 0; i < 5; ++i) flat.add(0.3);
    CHECK(ucbv_index(flat, std::exp(1.0), 2.0, 1.0) ==
          doctest::Approx(0.3 + 3.0 * 2.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("streaming stats match batch statistics") {
    Rng rng(14);
    ArmStats stats;
    std::vector<double> xs;
    for (int i = 0; i < 5000; ++i) {
        const double x = rng.uniform01();
        xs.push_back(x);
        stats.add(x);
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.size();  // biased 1/N convention
    CHECK(std::abs(stats.mean_est - mean) <= 1e-10);
    CHECK(std::abs(stats.var_est - var) <= 1e-10);

    ArmStats first;
    first.add(0.7);
    CHECK(first.mean_est == 0.7);
    CHECK(first.var_est == 0.0);
}

TEST_CASE("initialization sweep and tie-breaking") {
    PolicySpec spec{PolicyKind::ucbv};
    IndexPolicy policy(spec, 3, 100, 0);
    Rng stream(1);
    for (int arm = 0; arm < 3; ++arm) {
        CHECK(policy.step(stream) == arm);
        policy.observe(arm, 0.5, false);
    }
    // Identical statistics: the tie goes to the lowest arm index.
    CHECK(policy.step(stream) == 0);
}

TEST_CASE("index policy separates clearly different arms") {
    PolicySpec spec{PolicyKind::ucb1};
    IndexPolicy policy(spec, 2, 200, 0);
    for (int i = 0; i < 50; ++i) {
        policy.observe(0, 1.0, false);
        policy.observe(1, 0.0, false);
    }
    CHECK(policy.rounds_incorporated() == 100);
    Rng stream(1);
    CHECK(policy.step(stream) == 0);
}

TEST_CASE("query feedback handling per policy kind") {
    Rng stream(2);
    // query_then_ucbv discards query-round observations entirely.
    IndexPolicy fresh(PolicySpec{PolicyKind::query_then_ucbv}, 2, 100, 10);
    fresh.observe(0, 1.0, true);
    CHECK(fresh.stats()[0].pulls == 0);
    CHECK(fresh.rounds_incorporated() == 0);
    fresh.observe(0, 1.0, false);
    CHECK(fresh.stats()[0].pulls == 1);

    // The ablation flag retains them.
    PolicySpec keep{PolicyKind::query_then_ucbv};
    keep.retain_query_feedback = true;
    IndexPolicy keeper(keep, 2, 100, 10);
    keeper.observe(0, 1.0, true);
    CHECK(keeper.stats()[0].pulls == 1);

    // The spread variant incorporates query feedback.
    IndexPolicy spread(PolicySpec{PolicyKind::spread_query_ucbv}, 2, 100, 10);
    spread.observe(1, 0.5, true);
    CHECK(spread.stats()[1].pulls == 1);
}

TEST_CASE("query schedules") {
    // Query-first threshold rule.
    CHECK(query_schedule(PolicyKind::query_then_ucbv, 5, 5, 20));
    CHECK_FALSE(query_schedule(PolicyKind::query_then_ucbv, 6, 5, 20));
    CHECK(query_schedule(PolicyKind::exp3_with_queries, 1, 5, 20));

    // Spread with k = T requests every round.
    for (std::int64_t t = 1; t <= 12; ++t)
        CHECK(query_schedule(PolicyKind::spread_query_ucbv, t, 12, 12));

    // Exact budgets for all querying kinds; never for the bare ones.
    for (PolicyKind kind : {PolicyKind::query_then_ucbv, PolicyKind::spread_query_ucbv,
                            PolicyKind::exp3_with_queries}) {
        for (std::int64_t k : {0LL, 1LL, 7LL, 50LL}) {
            std::int64_t total = 0;
            for (std::int64_t t = 1; t <= 50; ++t) total += query_schedule(kind, t, k, 50);
            CHECK(total == std::min<std::int64_t>(k, 50));
        }
    }
    for (std::int64_t t = 1; t <= 50; ++t) {
        CHECK_FALSE(query_schedule(PolicyKind::ucb1, t, 50, 50));
        CHECK_FALSE(query_schedule(PolicyKind::ucbv, t, 50, 50));
    }

    // Spread requests are actually spread out: no two adjacent when k << T.
    int adjacent = 0;
    bool prev = false;
    for (std::int64_t t = 1; t <= 100; ++t) {
        const bool q = query_schedule(PolicyKind::spread_query_ucbv, t, 10, 100);
        adjacent += q && prev;
        prev = q;
    }
    CHECK(adjacent == 0);

    CHECK_THROWS_AS(query_schedule(PolicyKind::ucb1, 0, 5, 20), InputError);
    CHECK_THROWS_AS(query_schedule(PolicyKind::ucb1, 21, 5, 20), InputError);
}

TEST_CASE("exp3 probabilities and updates") {
    PolicySpec spec{PolicyKind::exp3_with_queries};
    spec.learning_rate = 0.5;
    Exp3Policy policy(spec, 2, 100, 0);

    auto probs = policy.probabilities();
    CHECK(probs[0] == doctest::Approx(0.5));
    CHECK(probs[1] == doctest::Approx(0.5));

    // Importance-weighted update: log-weight grows by eta * r / p = 1.
    policy.observe(0, 1.0, false);
    probs = policy.probabilities();
    CHECK(probs[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-12));
    CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-12));

    // Query rounds leave the weights untouched.
    const auto before = policy.probabilities();
    policy.observe(1, 1.0, true);
    CHECK(policy.probabilities() == before);

    // Normalization after many updates.
    Rng actions(3), rewards(4);
    double max_dev = 0.0;
    for (int i = 0; i < 500; ++i) {
        const int arm = policy.step(actions);
        policy.observe(arm, rewards.uniform01(), false);
        const auto p = policy.probabilities();
        max_dev = std::max(max_dev, std::abs(p[0] + p[1] - 1.0));
    }
    CHECK(max_dev <= 1e-12);
}

TEST_CASE("exp3 samples from its stated distribution") {
    PolicySpec spec{PolicyKind::exp3_with_queries};
    spec.learning_rate = 0.3;
    Exp3Policy policy(spec, 3, 100, 0);
    // Skew the weights, then compare sampling frequencies to probabilities.
    policy.observe(0, 1.0, false);
    policy.observe(0, 1.0, false);
    policy.observe(2, 0.5, false);
    const auto probs = policy.probabilities();
    Rng stream(77);
    const int n = 200000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) counts[policy.step(stream)] += 1;
    for (int arm = 0; arm < 3; ++arm) {
        const double freq = counts[arm] / static_cast<double>(n);
        const double se = std::sqrt(probs[arm] * (1.0 - probs[arm]) / n);
        CHECK(std::abs(freq - probs[arm]) < 4.0 * se + 1e-9);
    }
}

TEST_CASE("exp3 auto learning rate") {
    PolicySpec spec{PolicyKind::exp3_with_queries};
    Exp3Policy policy(spec, 3, 1000, 100);
    CHECK(policy.learning_rate() ==
          doctest::Approx(std::sqrt(2.0 * std::log(3.0) / (3.0 * 900.0))).epsilon(1e-12));
    CHECK(exp3_auto_learning_rate(2, 10, 10) == 1.0);  // no bandit rounds
}

TEST_CASE("observation validation") {
    IndexPolicy policy(PolicySpec{PolicyKind::ucbv}, 2, 10, 0);
    CHECK_THROWS_AS(policy.observe(0, 1.5, false), InputError);
    CHECK_THROWS_AS(policy.observe(0, -0.1, false), InputError);
    CHECK_THROWS_AS(policy.observe(5, 0.5, false), InputError);
    Exp3Policy exp3(PolicySpec{PolicyKind::exp3_with_queries}, 2, 10, 0);
    CHECK_THROWS_AS(exp3.observe(0, 2.0, false), InputError);
    PolicySpec negative_zeta{PolicyKind::ucbv};
    negative_zeta.zeta = -1.0;
    CHECK_THROWS_AS(negative_zeta.validate(), ConfigError);
}

TEST_CASE("policy kind names round trip") {
    for (PolicyKind kind : {PolicyKind::ucb1, PolicyKind::ucbv, PolicyKind::query_then_ucbv,
                            PolicyKind::spread_query_ucbv, PolicyKind::exp3_with_queries}) {
        PolicySpec spec{kind};
        CHECK(policy_kind_from_name(spec.name()) == kind);
    }
    CHECK_THROWS_AS(policy_kind_from_name("thompson"), ConfigError);
}
