#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qbl/errors.hpp"
#include "qbl/experiment.hpp"
#include "qbl/svg.hpp"

using namespace qbl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig config;
    config.instance = InstanceSpec::iid(
        {ArmDistribution::bernoulli(0.6), ArmDistribution::bernoulli(0.4)});
    config.policies = {PolicySpec{PolicyKind::ucbv}, PolicySpec{PolicyKind::query_then_ucbv}};
    config.T = 200;
    config.k_grid = {0, 100};
    config.replicates = 3;
    config.root_seed = 11;
    config.parallelism = 1;
    return config;
}

std::vector<double> polyline_ys(const std::string& svg, const std::string& id) {
    const std::string needle = "id=\"" + id + "\"";
    const std::size_t at = svg.find(needle);
    REQUIRE(at != std::string::npos);
    const std::size_t points_at = svg.find("points=\"", at);
    REQUIRE(points_at != std::string::npos);
    const std::size_t end = svg.find('"', points_at + 8);
    std::istringstream stream(svg.substr(points_at + 8, end - points_at - 8));
    std::vector<double> ys;
    std::string token;
    while (stream >> token) {
        const std::size_t comma = token.find(',');
        ys.push_back(std::stod(token.substr(comma + 1)));
    }
    return ys;
}

}  // namespace

TEST_CASE("config validation names the violated field") {
    ExperimentConfig config = tiny_config();
    config.k_grid = {0, 201};
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("k_grid"), ConfigError);
    config = tiny_config();
    config.replicates = 0;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("replicates"), ConfigError);
    config = tiny_config();
    config.parallelism = 0;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("parallelism"), ConfigError);
    config = tiny_config();
    config.policies.clear();
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("policies"), ConfigError);
    config = tiny_config();
    config.T = 0;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("T"), ConfigError);
}

TEST_CASE("config JSON round trip") {
    const ExperimentConfig config = tiny_config();
    const ExperimentConfig parsed = ExperimentConfig::from_json(config.to_json());
    CHECK(parsed.instance == config.instance);
    CHECK(parsed.policies == config.policies);
    CHECK(parsed.T == config.T);
    CHECK(parsed.k_grid == config.k_grid);
    CHECK(parsed.root_seed == config.root_seed);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{oops"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{}"), ConfigError);
}

TEST_CASE("run_experiment layout and determinism") {
    const ExperimentConfig config = tiny_config();
    const auto rows = run_experiment(config);
    REQUIRE(rows.size() == 4);  // 2 policies x 2 budgets
    CHECK(rows[0].policy == "ucbv");
    CHECK(rows[0].k == 0);
    CHECK(rows[1].k == 100);
    CHECK(rows[2].policy == "query_then_ucbv");
    // The bare policy never queries; the query-first one spends its budget.
    CHECK(rows[1].queries_used_mean == 0.0);
    CHECK(rows[3].queries_used_mean == 100.0);
    for (const SweepRow& row : rows) {
        CHECK(row.ci95_lo <= row.mean_pseudo_regret);
        CHECK(row.mean_pseudo_regret <= row.ci95_hi);
    }

    const std::string csv = csv_from_rows(rows);
    CHECK(csv_from_rows(run_experiment(config)) == csv);

    // Thread count must not change results.
    ExperimentConfig wide = config;
    wide.parallelism = 4;
    CHECK(csv_from_rows(run_experiment(wide)) == csv);
}

TEST_CASE("csv schema") {
    const auto rows = run_experiment(tiny_config());
    const std::string csv = csv_from_rows(rows);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "policy,k,mean_pseudo_regret,std_err,ci95_lo,ci95_hi,mean_realized_regret,"
          "queries_used_mean");
    int data_lines = 0;
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) ++data_lines;
    CHECK(data_lines == 4);
}

TEST_CASE("atomic file writes") {
    const fs::path dir = fs::temp_directory_path() / "qbl_test_atomic";
    fs::remove_all(dir);
    const std::string target = (dir / "out.csv").string();
    write_file_atomic(target, "hello\n");
    std::ifstream in(target);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "hello\n");
    CHECK_FALSE(fs::exists(target + ".tmp"));

    // A file in the way of the parent directory makes the write fail without
    // leaving anything at the final path.
    const std::string blocked = (dir / "out.csv" / "sub" / "x.csv").string();
    CHECK_THROWS_AS(write_file_atomic(blocked, "nope"), IoError);
    CHECK_FALSE(fs::exists(blocked));
    fs::remove_all(dir);
}

TEST_CASE("regret envelope and constant fit") {
    const double n = 2, T = 1000;
    const double log_t = std::log(T);
    CHECK(regret_envelope(n, T, 0) == doctest::Approx(std::sqrt(n * T * log_t)));
    // At k = T the first branch binds: n log T <= sqrt(nT log T) here.
    CHECK(regret_envelope(n, T, T) == doctest::Approx(n * log_t));
    CHECK(regret_envelope(n, T, 1) == doctest::Approx(std::sqrt(n * T * log_t)));

    std::vector<SweepRow> rows;
    for (std::int64_t k : {0LL, 10LL, 100LL, 1000LL}) {
        SweepRow row;
        row.policy = "query_then_ucbv";
        row.k = k;
        row.mean_pseudo_regret = 3.0 * regret_envelope(n, T, static_cast<double>(k));
        rows.push_back(row);
    }
    CHECK(fit_envelope_constant(rows, n, T) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sweep svg output") {
    ExperimentConfig config = tiny_config();
    const auto rows = run_experiment(config);
    const std::string svg = render_sweep_svg(config, rows);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("id=\"series-ucbv\"") != std::string::npos);
    CHECK(svg.find("id=\"series-query_then_ucbv\"") != std::string::npos);
    CHECK(svg.find("id=\"reference\"") != std::string::npos);
    CHECK(svg.find("envelope fit") != std::string::npos);
    CHECK(svg.find("http://") == svg.find("http://www.w3.org/2000/svg"));  // no other URLs

    // A strictly decreasing series plots as strictly increasing screen-y.
    std::vector<SweepRow> mono;
    for (int i = 0; i < 5; ++i) {
        SweepRow row;
        row.policy = "ucbv";
        row.k = 10 * i;
        row.mean_pseudo_regret = 100.0 - 20.0 * i;
        row.ci95_lo = row.mean_pseudo_regret - 1;
        row.ci95_hi = row.mean_pseudo_regret + 1;
        mono.push_back(row);
    }
    const std::string mono_svg = render_sweep_svg(config, mono);
    const auto ys = polyline_ys(mono_svg, "series-ucbv");
    REQUIRE(ys.size() == 5);
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) CHECK(ys[i] < ys[i + 1]);
    // No query_then_ucbv series here, so no reference curve either.
    CHECK(mono_svg.find("id=\"reference\"") == std::string::npos);
}

TEST_CASE("QBL_THREADS override") {
    ExperimentConfig config = tiny_config();
    config.parallelism = 2;
    unsetenv("QBL_THREADS");
    CHECK(effective_parallelism(config) == 2);
    setenv("QBL_THREADS", "5", 1);
    CHECK(effective_parallelism(config) == 5);
    setenv("QBL_THREADS", "junk", 1);
    CHECK(effective_parallelism(config) == 2);
    unsetenv("QBL_THREADS");
}
