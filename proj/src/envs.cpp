#include "qbl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "qbl/errors.hpp"

namespace qbl {

// ---------------------------------------------------------------------------
// ArmDistribution
// ---------------------------------------------------------------------------

ArmDistribution ArmDistribution::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bernoulli: p must lie in [0,1]");
    ArmDistribution d;
    d.kind_ = ArmKind::bernoulli;
    d.p_ = p;
    d.mean_ = p;
    d.variance_ = p * (1.0 - p);
    return d;
}

ArmDistribution ArmDistribution::discrete(std::vector<double> support, std::vector<double> probs) {
    if (support.empty() || support.size() != probs.size())
        throw ConfigError("discrete: support and probs must be non-empty and equal-length");
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    ArmDistribution d;
    d.kind_ = ArmKind::discrete;
    d.support_.reserve(support.size());
    d.probs_.reserve(probs.size());
    double total = 0.0;
    for (std::size_t idx : order) {
        const double s = support[idx], q = probs[idx];
        if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("discrete: support must lie in [0,1]");
        if (!(q >= 0.0)) throw ConfigError("discrete: probabilities must be nonnegative");
        d.support_.push_back(s);
        d.probs_.push_back(q);
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("discrete: probabilities must sum to 1");
    double mean = 0.0;
    for (std::size_t i = 0; i < d.support_.size(); ++i) mean += d.support_[i] * d.probs_[i];
    double var = 0.0;
    for (std::size_t i = 0; i < d.support_.size(); ++i) {
        const double dev = d.support_[i] - mean;
        var += dev * dev * d.probs_[i];
    }
    d.mean_ = mean;
    d.variance_ = var;
    return d;
}

ArmDistribution ArmDistribution::uniform01() {
    ArmDistribution d;
    d.kind_ = ArmKind::uniform01;
    d.mean_ = 0.5;
    d.variance_ = 1.0 / 12.0;
    return d;
}

double ArmDistribution::sample(Rng& rng) const {
    switch (kind_) {
        case ArmKind::bernoulli:
            return rng.bernoulli(p_) ? 1.0 : 0.0;
        case ArmKind::uniform01:
            return rng.uniform01();
        case ArmKind::discrete: {
            const double u = rng.uniform01();
            double cum = 0.0;
            for (std::size_t i = 0; i < support_.size(); ++i) {
                cum += probs_[i];
                if (u < cum) return support_[i];
            }
            return support_.back();
        }
    }
    return 0.0;
}

double ArmDistribution::cdf(double x) const {
    switch (kind_) {
        case ArmKind::bernoulli:
            if (x < 0.0) return 0.0;
            if (x < 1.0) return 1.0 - p_;
            return 1.0;
        case ArmKind::uniform01:
            return std::clamp(x, 0.0, 1.0);
        case ArmKind::discrete: {
            double cum = 0.0;
            for (std::size_t i = 0; i < support_.size() && support_[i] <= x; ++i) cum += probs_[i];
            return cum;
        }
    }
    return 0.0;
}

double ArmDistribution::bernoulli_p() const {
    if (kind_ != ArmKind::bernoulli) throw InputError("bernoulli_p: arm is not Bernoulli");
    return p_;
}

// ---------------------------------------------------------------------------
// Tie-breaking and i.i.d. sampling
// ---------------------------------------------------------------------------

std::vector<int> default_priority(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    return order;
}

int argmax_tiebreak(std::span<const double> values, std::span<const int> priority) {
    int best = priority[0];
    double best_value = values[static_cast<std::size_t>(best)];
    for (std::size_t r = 1; r < priority.size(); ++r) {
        const int arm = priority[r];
        const double v = values[static_cast<std::size_t>(arm)];
        if (v > best_value) {
            best = arm;
            best_value = v;
        }
    }
    return best;
}

int sample_iid_round_into(std::span<const ArmDistribution> arms, std::span<const int> priority,
                          Rng& env_stream, std::span<double> rewards) {
    for (std::size_t i = 0; i < arms.size(); ++i) rewards[i] = arms[i].sample(env_stream);
    return argmax_tiebreak(rewards.first(arms.size()), priority);
}

IidDraw sample_iid_round(std::span<const ArmDistribution> arms, std::span<const int> priority,
                         Rng& env_stream) {
    IidDraw draw;
    draw.rewards.resize(arms.size());
    draw.best = sample_iid_round_into(arms, priority, env_stream, draw.rewards);
    return draw;
}

// ---------------------------------------------------------------------------
// Distortion map
// ---------------------------------------------------------------------------

namespace {
void check_h_domain(double c, double x, const char* who, const char* arg) {
    if (!(c >= 0.0 && c <= 0.5))
        throw InputError(std::string(who) + ": c must lie in [0, 1/2]");
    if (!(x >= 0.0 && x <= 1.0))
        throw InputError(std::string(who) + ": " + arg + " must lie in [0, 1]");
}
}  // namespace

double h_map(double c, double x) {
    check_h_domain(c, x, "h_map", "x");
    return x - c * x * (1.0 - x);
}

double h_inverse(double c, double u) {
    check_h_domain(c, u, "h_inverse", "u");
    const double omc = 1.0 - c;
    return 2.0 * u / (omc + std::sqrt(omc * omc + 4.0 * c * u));
}

// ---------------------------------------------------------------------------
// Correlated family
// ---------------------------------------------------------------------------

void CorrelatedSpec::validate() const {
    if (!(a > 0.0 && a < 0.25)) throw ConfigError("correlated: a must lie in (0, 1/4)");
    if (!(eta > 0.0 && eta < 0.25 - a))
        throw ConfigError("correlated: eta must lie in (0, 1/4 - a)");
}

namespace {
// E[h_inverse(c, U)] = 1/2 + c/6 and E[h_inverse(c, U)^2] = 1/3 + c/6 for
// U uniform (density 1 + c(2x-1)).
double tilted_mean(double c) { return 0.5 + c / 6.0; }
double tilted_second_moment(double c) { return 1.0 / 3.0 + c / 6.0; }
}  // namespace

double CorrelatedSpec::arm_mean(int arm) const {
    const bool top = (variant == CorrelatedVariant::nu1) == (arm == 0);
    // Top arm mixes Z+ and Z-, the other mixes Y and Z+.
    if (top) return 0.5 * tilted_mean(b()) + 0.5 * tilted_mean(a);
    return 0.5 * 0.5 + 0.5 * tilted_mean(b());
}

double CorrelatedSpec::arm_variance(int arm) const {
    const bool top = (variant == CorrelatedVariant::nu1) == (arm == 0);
    const double m2 = top ? 0.5 * tilted_second_moment(b()) + 0.5 * tilted_second_moment(a)
                          : 0.5 * (1.0 / 3.0) + 0.5 * tilted_second_moment(b());
    const double m = arm_mean(arm);
    return m2 - m * m;
}

double CorrelatedSpec::opt_static() const { return 0.5 + (a + b()) / 12.0; }

double CorrelatedSpec::opt_dynamic() const { return 0.5 + b() / 6.0; }

CorrelatedDraw sample_correlated_round(const CorrelatedSpec& spec, Rng& env_stream) {
    CorrelatedDraw d;
    const double u = env_stream.uniform01();
    d.w = 1 + static_cast<int>(env_stream.uniform_index(2));
    d.y = u;
    d.z_minus = h_inverse(spec.a, u);
    d.z_plus = h_inverse(spec.b(), u);
    if (spec.variant == CorrelatedVariant::nu1) {
        if (d.w == 1) {
            d.rewards[0] = d.z_plus;
            d.rewards[1] = d.y;
        } else {
            d.rewards[0] = d.z_minus;
            d.rewards[1] = d.z_plus;
        }
    } else {
        if (d.w == 1) {
            d.rewards[0] = d.z_plus;
            d.rewards[1] = d.z_minus;
        } else {
            d.rewards[0] = d.y;
            d.rewards[1] = d.z_plus;
        }
    }
    d.best = d.w - 1;
    return d;
}

std::pair<CorrelatedSpec, CorrelatedSpec> correlated_params(std::int64_t T, std::int64_t k) {
    if (!(k >= 1 && k <= T - 1))
        throw ConfigError("correlated_params: k must satisfy 1 <= k <= T - 1");
    const double m = static_cast<double>(T - k);
    const double a = std::min(0.125, 1.0 / std::sqrt(m));
    const double eta = a / (24.0 * static_cast<double>(k + 1));
    CorrelatedSpec nu1{CorrelatedVariant::nu1, a, eta};
    CorrelatedSpec nu2{CorrelatedVariant::nu2, a, eta};
    nu1.validate();
    nu2.validate();
    return {nu1, nu2};
}

// ---------------------------------------------------------------------------
// Bernoulli lower-bound family
// ---------------------------------------------------------------------------

namespace {

LBStochasticSpec lb_params(int n, std::int64_t T, std::int64_t k, int j) {
    if (n < 2) throw ConfigError("lb_stochastic: violated n >= 2");
    if (k < 1 || T < 1) throw ConfigError("lb_stochastic: violated T >= 1, k >= 1");
    if (static_cast<double>(k) * static_cast<double>(k) <
        static_cast<double>(n) * static_cast<double>(T))
        throw ConfigError("lb_stochastic: violated k >= sqrt(n*T)");
    if (100 * k > T) throw ConfigError("lb_stochastic: violated k <= T/100");
    if (j < 0 || j >= n) throw ConfigError("lb_stochastic: violated 0 <= j < n");
    LBStochasticSpec spec;
    spec.n = n;
    spec.T = T;
    spec.k = k;
    spec.j = j;
    spec.delta = static_cast<double>(n) / (1000.0 * static_cast<double>(k));
    spec.epsilon = static_cast<double>(T - k) * spec.delta / (50.0 * static_cast<double>(k));
    spec.p = 2.0 * spec.delta + spec.epsilon;
    if (!(spec.p <= 0.25)) throw ConfigError("lb_stochastic: violated p <= 1/4");
    if (!(1.0 - spec.p + 2.0 * spec.delta <= 1.0))
        throw ConfigError("lb_stochastic: violated 1 - p + 2*delta <= 1");
    return spec;
}

// The lower-priority half of a priority order is its last floor(n/2) entries.
bool in_lower_priority_half(int j, std::span<const int> priority) {
    const std::size_t n = priority.size();
    const std::size_t half = n / 2;
    for (std::size_t r = n - half; r < n; ++r)
        if (priority[r] == j) return true;
    return false;
}

std::vector<ArmDistribution> lb_arms(const LBStochasticSpec& spec, CorrelatedVariant variant) {
    std::vector<ArmDistribution> arms;
    arms.reserve(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        double mean = 1.0 - spec.p;
        if (i == 0) mean = 1.0 - spec.p + spec.delta;
        if (variant == CorrelatedVariant::nu2 && i == spec.j)
            mean = 1.0 - spec.p + 2.0 * spec.delta;
        arms.push_back(ArmDistribution::bernoulli(mean));
    }
    return arms;
}

}  // namespace

LBInstancePair build_lb_instances(int n, std::int64_t T, std::int64_t k, int j) {
    LBStochasticSpec spec = lb_params(n, T, k, j);
    if (!in_lower_priority_half(j, default_priority(n)))
        throw ConfigError("lb_stochastic: violated j in lower-priority half");
    LBInstancePair pair;
    pair.spec = spec;
    pair.nu1 = lb_arms(spec, CorrelatedVariant::nu1);
    pair.nu2 = lb_arms(spec, CorrelatedVariant::nu2);
    return pair;
}

std::vector<ArmDistribution> build_lb_case1_instance(int n, std::int64_t T, std::int64_t k,
                                                     int best_arm, double delta, double p) {
    if (n < 2) throw ConfigError("lb_case1: violated n >= 2");
    if (k < 0 || k >= T) throw ConfigError("lb_case1: violated 0 <= k < T");
    if (best_arm < 0 || best_arm >= n) throw ConfigError("lb_case1: violated 0 <= best_arm < n");
    const double m = static_cast<double>(T - k);
    if (delta < 0.0) delta = std::sqrt(static_cast<double>(n) / m) / 4.0;
    if (p < 0.0) p = 0.125;
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("lb_case1: violated 0 < p < 1");
    if (!(delta > 0.0 && delta <= p)) throw ConfigError("lb_case1: violated 0 < delta <= p");
    std::vector<ArmDistribution> arms;
    arms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        arms.push_back(ArmDistribution::bernoulli(i == best_arm ? 1.0 - p + delta : 1.0 - p));
    return arms;
}

// ---------------------------------------------------------------------------
// InstanceSpec
// ---------------------------------------------------------------------------

namespace {
std::vector<int> normalize_priority(std::vector<int> tie_break, int n, const char* who) {
    if (tie_break.empty()) return default_priority(n);
    if (static_cast<int>(tie_break.size()) != n)
        throw ConfigError(std::string(who) + ": tie_break must list every arm exactly once");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int arm : tie_break) {
        if (arm < 0 || arm >= n || seen[static_cast<std::size_t>(arm)])
            throw ConfigError(std::string(who) + ": tie_break must be a permutation of the arms");
        seen[static_cast<std::size_t>(arm)] = true;
    }
    return tie_break;
}
}  // namespace

InstanceSpec InstanceSpec::iid(std::vector<ArmDistribution> arms, std::vector<int> tie_break) {
    if (arms.empty()) throw ConfigError("iid: instance must have at least one arm");
    InstanceSpec spec;
    spec.family_ = Family::iid;
    spec.tie_break_ = normalize_priority(std::move(tie_break),
                                         static_cast<int>(arms.size()), "iid");
    spec.arms_ = std::move(arms);
    return spec;
}

InstanceSpec InstanceSpec::correlated(CorrelatedSpec corr) {
    corr.validate();
    InstanceSpec spec;
    spec.family_ = Family::correlated;
    spec.correlated_ = corr;
    spec.tie_break_ = default_priority(2);
    return spec;
}

InstanceSpec InstanceSpec::lb_stochastic(int n, std::int64_t T, std::int64_t k, int j,
                                         CorrelatedVariant variant, std::vector<int> tie_break) {
    InstanceSpec spec;
    spec.family_ = Family::lb_stochastic;
    spec.lb_ = lb_params(n, T, k, j);
    spec.lb_variant_ = variant;
    spec.tie_break_ = normalize_priority(std::move(tie_break), n, "lb_stochastic");
    if (!in_lower_priority_half(j, spec.tie_break_))
        throw ConfigError("lb_stochastic: violated j in lower-priority half");
    spec.arms_ = lb_arms(spec.lb_, variant);
    return spec;
}

int InstanceSpec::n_arms() const {
    return family_ == Family::correlated ? 2 : static_cast<int>(arms_.size());
}

const CorrelatedSpec& InstanceSpec::correlated_spec() const {
    if (family_ != Family::correlated) throw AnalysisError("instance is not correlated");
    return correlated_;
}

const LBStochasticSpec& InstanceSpec::lb_spec() const {
    if (family_ != Family::lb_stochastic) throw AnalysisError("instance is not lb_stochastic");
    return lb_;
}

double InstanceSpec::arm_mean(int arm) const {
    if (family_ == Family::correlated) return correlated_.arm_mean(arm);
    return arms_[static_cast<std::size_t>(arm)].mean();
}

double InstanceSpec::arm_variance(int arm) const {
    if (family_ == Family::correlated) return correlated_.arm_variance(arm);
    return arms_[static_cast<std::size_t>(arm)].variance();
}

double InstanceSpec::opt_static() const {
    double best = arm_mean(0);
    for (int i = 1; i < n_arms(); ++i) best = std::max(best, arm_mean(i));
    return best;
}

double InstanceSpec::opt_dynamic() const {
    if (family_ == Family::correlated) return correlated_.opt_dynamic();
    // The integral can land an ulp below the true value; E[max] provably
    // dominates the best mean and never exceeds 1, so clamp into that range.
    return std::min(1.0, std::max(expected_max_independent(arms_), opt_static()));
}

double expected_max_independent(std::span<const ArmDistribution> arms) {
    // E[max] = int_0^1 (1 - prod_i F_i(x)) dx. The CDF product is K * x^u on
    // every interval between consecutive discrete support points, where u is
    // the number of uniform01 arms.
    std::vector<double> cuts{0.0, 1.0};
    int uniform_count = 0;
    for (const auto& arm : arms) {
        switch (arm.kind()) {
            case ArmKind::uniform01:
                ++uniform_count;
                break;
            case ArmKind::bernoulli:
                break;  // support {0,1} already covered
            case ArmKind::discrete:
                cuts.insert(cuts.end(), arm.support().begin(), arm.support().end());
                break;
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double power = static_cast<double>(uniform_count + 1);
    double cdf_integral = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double constant = 1.0;
        for (const auto& arm : arms)
            if (arm.kind() != ArmKind::uniform01) constant *= arm.cdf(cuts[s]);
        cdf_integral +=
            constant * (std::pow(cuts[s + 1], power) - std::pow(cuts[s], power)) / power;
    }
    return 1.0 - cdf_integral;
}

// ---------------------------------------------------------------------------
// JSON round trip (arm indices are 1-based on the wire)
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json arm_to_json(const ArmDistribution& arm) {
    json j;
    switch (arm.kind()) {
        case ArmKind::bernoulli:
            j["kind"] = "bernoulli";
            j["p"] = arm.bernoulli_p();
            break;
        case ArmKind::uniform01:
            j["kind"] = "uniform01";
            break;
        case ArmKind::discrete:
            j["kind"] = "discrete";
            j["support"] = arm.support();
            j["probs"] = arm.probs();
            break;
    }
    return j;
}

ArmDistribution arm_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bernoulli") return ArmDistribution::bernoulli(j.at("p").get<double>());
    if (kind == "uniform01") return ArmDistribution::uniform01();
    if (kind == "discrete")
        return ArmDistribution::discrete(j.at("support").get<std::vector<double>>(),
                                         j.at("probs").get<std::vector<double>>());
    throw ConfigError("instance: unknown arm kind '" + kind + "'");
}

json priority_to_json(const std::vector<int>& priority) {
    json j = json::array();
    for (int arm : priority) j.push_back(arm + 1);
    return j;
}

std::vector<int> priority_from_json(const json& j) {
    std::vector<int> priority;
    for (const auto& entry : j) priority.push_back(entry.get<int>() - 1);
    return priority;
}

}  // namespace

std::string InstanceSpec::to_json() const {
    json j;
    switch (family_) {
        case Family::iid: {
            j["family"] = "iid";
            json arms = json::array();
            for (const auto& arm : arms_) arms.push_back(arm_to_json(arm));
            j["arms"] = std::move(arms);
            j["tie_break"] = priority_to_json(tie_break_);
            break;
        }
        case Family::correlated:
            j["family"] = "correlated";
            j["variant"] = static_cast<int>(correlated_.variant);
            j["a"] = correlated_.a;
            j["eta"] = correlated_.eta;
            break;
        case Family::lb_stochastic:
            j["family"] = "lb_stochastic";
            j["n"] = lb_.n;
            j["T"] = lb_.T;
            j["k"] = lb_.k;
            j["j"] = lb_.j + 1;
            j["variant"] = static_cast<int>(lb_variant_);
            j["tie_break"] = priority_to_json(tie_break_);
            break;
    }
    return j.dump(2);
}

InstanceSpec InstanceSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("instance: invalid JSON: ") + e.what());
    }
    try {
        const std::string family = j.at("family").get<std::string>();
        if (family == "iid") {
            std::vector<ArmDistribution> arms;
            for (const auto& arm : j.at("arms")) arms.push_back(arm_from_json(arm));
            std::vector<int> tie_break;
            if (j.contains("tie_break")) tie_break = priority_from_json(j.at("tie_break"));
            return InstanceSpec::iid(std::move(arms), std::move(tie_break));
        }
        if (family == "correlated") {
            CorrelatedSpec spec;
            const int variant = j.at("variant").get<int>();
            if (variant != 1 && variant != 2)
                throw ConfigError("instance: variant must be 1 or 2");
            spec.variant = static_cast<CorrelatedVariant>(variant);
            spec.a = j.at("a").get<double>();
            spec.eta = j.at("eta").get<double>();
            return InstanceSpec::correlated(spec);
        }
        if (family == "lb_stochastic") {
            const int variant = j.at("variant").get<int>();
            if (variant != 1 && variant != 2)
                throw ConfigError("instance: variant must be 1 or 2");
            std::vector<int> tie_break;
            if (j.contains("tie_break")) tie_break = priority_from_json(j.at("tie_break"));
            return InstanceSpec::lb_stochastic(
                j.at("n").get<int>(), j.at("T").get<std::int64_t>(), j.at("k").get<std::int64_t>(),
                j.at("j").get<int>() - 1, static_cast<CorrelatedVariant>(variant),
                std::move(tie_break));
        }
        throw ConfigError("instance: unknown family '" + family + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("instance: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

Environment::Environment(const InstanceSpec& spec)
    : spec_(spec),
      n_(spec.n_arms()),
      opt_static_(spec.opt_static()),
      opt_dynamic_(spec.opt_dynamic()) {
    means_.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) means_.push_back(spec_.arm_mean(i));
}

int Environment::sample_round(Rng& env_stream, std::span<double> rewards) const {
    if (spec_.family() == Family::correlated) {
        const CorrelatedDraw draw = sample_correlated_round(spec_.correlated_spec(), env_stream);
        rewards[0] = draw.rewards[0];
        rewards[1] = draw.rewards[1];
        return draw.best;
    }
    return sample_iid_round_into(spec_.arms(), spec_.tie_break(), env_stream, rewards);
}

}  // namespace qbl
