#include "qbl/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "qbl/core.hpp"
#include "qbl/errors.hpp"

namespace qbl {

void ExperimentConfig::validate() const {
    if (T < 1) throw ConfigError("config: T must be at least 1");
    if (policies.empty()) throw ConfigError("config: policies must be non-empty");
    for (const PolicySpec& policy : policies) policy.validate();
    if (k_grid.empty()) throw ConfigError("config: k_grid must be non-empty");
    for (std::int64_t k : k_grid)
        if (k < 0 || k > T) throw ConfigError("config: k_grid entries must lie in [0, T]");
    if (replicates < 1) throw ConfigError("config: replicates must be at least 1");
    if (parallelism < 1) throw ConfigError("config: parallelism must be at least 1");
}

namespace {

using nlohmann::json;

json policy_to_json(const PolicySpec& policy) {
    json j;
    j["kind"] = policy.name();
    j["zeta"] = policy.zeta;
    if (policy.learning_rate)
        j["learning_rate"] = *policy.learning_rate;
    else
        j["learning_rate"] = "auto";
    if (policy.retain_query_feedback) j["retain_query_feedback"] = true;
    return j;
}

PolicySpec policy_from_json(const json& j) {
    PolicySpec policy;
    policy.kind = policy_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("zeta")) policy.zeta = j.at("zeta").get<double>();
    if (j.contains("learning_rate") && !j.at("learning_rate").is_string())
        policy.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("retain_query_feedback"))
        policy.retain_query_feedback = j.at("retain_query_feedback").get<bool>();
    policy.validate();
    return policy;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
    json j;
    j["instance"] = json::parse(instance.to_json());
    json policies_json = json::array();
    for (const PolicySpec& policy : policies) policies_json.push_back(policy_to_json(policy));
    j["policies"] = std::move(policies_json);
    j["T"] = T;
    j["k_grid"] = k_grid;
    j["replicates"] = replicates;
    j["root_seed"] = root_seed;
    j["parallelism"] = parallelism;
    j["output_dir"] = output_dir;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig config;
    try {
        config.instance = InstanceSpec::from_json(j.at("instance").dump());
        config.policies.clear();
        for (const auto& policy : j.at("policies"))
            config.policies.push_back(policy_from_json(policy));
        config.T = j.at("T").get<std::int64_t>();
        config.k_grid = j.at("k_grid").get<std::vector<std::int64_t>>();
        config.replicates = j.at("replicates").get<std::int64_t>();
        config.root_seed = j.at("root_seed").get<std::uint64_t>();
        if (j.contains("parallelism")) config.parallelism = j.at("parallelism").get<int>();
        if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

int effective_parallelism(const ExperimentConfig& config) {
    if (const char* env = std::getenv("QBL_THREADS")) {
        const int threads = std::atoi(env);
        if (threads >= 1) return threads;
    }
    return config.parallelism;
}

std::vector<SweepRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::int64_t cells = static_cast<std::int64_t>(config.policies.size()) *
                               static_cast<std::int64_t>(config.k_grid.size());
    const std::int64_t jobs = cells * config.replicates;
    std::vector<RunResult> results(static_cast<std::size_t>(jobs));

    const auto run_job = [&](std::int64_t job) {
        const std::int64_t cell = job / config.replicates;
        const std::int64_t replicate = job % config.replicates;
        const auto& policy =
            config.policies[static_cast<std::size_t>(cell / static_cast<std::int64_t>(
                                config.k_grid.size()))];
        const std::int64_t k =
            config.k_grid[static_cast<std::size_t>(cell % static_cast<std::int64_t>(
                              config.k_grid.size()))];
        // Seed binds to the replicate index, never to the worker.
        const std::uint64_t seed = config.root_seed + static_cast<std::uint64_t>(replicate);
        results[static_cast<std::size_t>(job)] =
            simulate_run(config.instance, policy, config.T, k, seed, false);
    };

    const int threads = std::min<std::int64_t>(effective_parallelism(config), jobs);
    if (threads <= 1) {
        for (std::int64_t job = 0; job < jobs; ++job) run_job(job);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::int64_t job = next.fetch_add(1); job < jobs;
                     job = next.fetch_add(1))
                    run_job(job);
            });
        }
        for (std::thread& worker : pool) worker.join();
    }

    // Single-owner reduction after all workers finish.
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(cells));
    for (std::int64_t cell = 0; cell < cells; ++cell) {
        const std::span<const RunResult> cell_runs(
            results.data() + cell * config.replicates,
            static_cast<std::size_t>(config.replicates));
        const RegretSummary summary = aggregate(cell_runs, config.instance);
        SweepRow row;
        row.policy = summary.policy;
        row.k = summary.k;
        row.mean_pseudo_regret = summary.mean_pseudo_regret;
        row.std_err = summary.std_err;
        row.ci95_lo = summary.ci95_lo;
        row.ci95_hi = summary.ci95_hi;
        row.mean_realized_regret = summary.mean_realized_regret;
        row.queries_used_mean = summary.mean_queries_used;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {
std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}
}  // namespace

std::string csv_from_rows(std::span<const SweepRow> rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const SweepRow& row : rows) {
        out += row.policy;
        out += ',';
        out += std::to_string(row.k);
        for (double value : {row.mean_pseudo_regret, row.std_err, row.ci95_lo, row.ci95_hi,
                             row.mean_realized_regret, row.queries_used_mean}) {
            out += ',';
            out += format_double(value);
        }
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + target.parent_path().string());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("failed moving " + tmp.string() + " to " + target.string());
    }
}

double regret_envelope(double n, double T, double k) {
    const double log_t = std::log(std::max(T, 2.0));
    const double sqrt_branch = std::sqrt(n * T * log_t);
    if (k <= 0.0) return sqrt_branch;
    return std::min(n * T * log_t / k, sqrt_branch);
}

double fit_envelope_constant(std::span<const SweepRow> rows, double n, double T) {
    double num = 0.0, den = 0.0;
    for (const SweepRow& row : rows) {
        const double f = regret_envelope(n, T, static_cast<double>(row.k));
        num += row.mean_pseudo_regret * f;
        den += f * f;
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace qbl
