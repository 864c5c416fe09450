// qbl: simulate, sweep, analyze, and verify budgeted best-action-query
// bandit experiments.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qbl/analysis.hpp"
#include "qbl/envs.hpp"
#include "qbl/errors.hpp"
#include "qbl/experiment.hpp"
#include "qbl/svg.hpp"
#include "qbl/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qbl::IoError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof()) throw qbl::IoError("failed reading " + path);
    return buffer.str();
}

struct Options {
    std::string config_path;
    std::string instance_path;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::string level = "quick";
    std::int64_t mc_samples = 0;
};

qbl::ExperimentConfig load_config(const Options& options) {
    qbl::ExperimentConfig config = qbl::ExperimentConfig::from_json(read_file(options.config_path));
    if (options.output_dir) config.output_dir = *options.output_dir;
    if (options.seed) config.root_seed = *options.seed;
    return config;
}

std::string join_path(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

int cmd_run(const Options& options, bool with_svg) {
    const qbl::ExperimentConfig config = load_config(options);
    if (with_svg && config.k_grid.size() < 2)
        throw qbl::ConfigError("config: k_grid needs at least 2 values for a sweep");
    const std::vector<qbl::SweepRow> rows = qbl::run_experiment(config);
    const std::string csv_path = join_path(config.output_dir, "results.csv");
    qbl::write_file_atomic(csv_path, qbl::csv_from_rows(rows));
    std::cout << "wrote " << csv_path << "\n";
    if (with_svg) {
        const std::string svg_path = join_path(config.output_dir, "sweep.svg");
        qbl::write_file_atomic(svg_path, qbl::render_sweep_svg(config, rows));
        std::cout << "wrote " << svg_path << "\n";
    }
    return 0;
}

int cmd_verify(const Options& options) {
    const qbl::VerifyLevel level =
        options.level == "full" ? qbl::VerifyLevel::full : qbl::VerifyLevel::quick;
    const std::vector<qbl::CheckResult> results = qbl::run_verification(level);
    int failures = 0;
    for (const qbl::CheckResult& result : results) {
        std::cout << qbl::format_check_line(result) << "\n";
        if (!result.pass) {
            if (!result.detail.empty()) std::cout << "# " << result.detail << "\n";
            ++failures;
        }
    }
    if (failures > 0) {
        std::cout << failures << " check(s) failed\n";
        return 1;
    }
    std::cout << "all " << results.size() << " checks passed\n";
    return 0;
}

int cmd_analyze(const Options& options) {
    const qbl::InstanceSpec instance =
        qbl::InstanceSpec::from_json(read_file(options.instance_path));
    qbl::AnalysisReport report = qbl::analyze(instance);
    if (options.mc_samples >= 2) {
        qbl::Rng stream(options.seed.value_or(0), qbl::Stream::analysis);
        const qbl::McEstimate mc = qbl::opt_dynamic_mc(instance, options.mc_samples, stream);
        std::cout << "# monte-carlo opt_dynamic " << mc.estimate << " +/- "
                  << 1.96 * mc.std_err << "\n";
    }
    std::cout << report.to_json() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"budgeted best-action-query bandit simulator"};
    app.require_subcommand(1);
    Options options;

    CLI::App* run = app.add_subcommand("run", "run replicate batches from a config, emit CSV");
    run->add_option("config", options.config_path, "experiment config (JSON)")->required();
    run->add_option("--output-dir", options.output_dir, "override config output_dir");
    run->add_option("--seed", options.seed, "override config root_seed");

    CLI::App* sweep =
        app.add_subcommand("sweep", "run a k sweep, emit CSV plus an SVG chart");
    sweep->add_option("config", options.config_path, "experiment config (JSON)")->required();
    sweep->add_option("--output-dir", options.output_dir, "override config output_dir");
    sweep->add_option("--seed", options.seed, "override config root_seed");

    CLI::App* verify = app.add_subcommand("verify", "run the verification checks");
    verify->add_option("--level", options.level, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}));

    CLI::App* analyze =
        app.add_subcommand("analyze", "report analytic quantities of an instance");
    analyze->add_option("instance", options.instance_path, "instance spec (JSON)")->required();
    analyze->add_option("--mc-samples", options.mc_samples,
                        "additionally estimate opt_dynamic by Monte Carlo");
    analyze->add_option("--seed", options.seed, "Monte Carlo seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(options, false);
        if (sweep->parsed()) return cmd_run(options, true);
        if (verify->parsed()) return cmd_verify(options);
        if (analyze->parsed()) return cmd_analyze(options);
    } catch (const qbl::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qbl::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qbl::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
