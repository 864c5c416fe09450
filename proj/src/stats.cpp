#include "qbl/stats.hpp"

#include <algorithm>
#include <cmath>

#include "qbl/errors.hpp"

namespace qbl {

SampleStats sample_stats(std::span<const double> xs) {
    SampleStats out;
    out.count = xs.size();
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - out.mean;
        ss += d * d;
    }
    const double n = static_cast<double>(xs.size());
    out.std_err = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InputError("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InputError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

namespace {
double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }
}  // namespace

double ks_critical_one_sample(double alpha, std::size_t n) {
    return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return ks_coefficient(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace qbl
