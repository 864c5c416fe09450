#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qbl {

struct SampleStats {
    double mean = 0.0;
    double std_err = 0.0;  // sample std / sqrt(n); 0 for n < 2
    std::size_t count = 0;
};

SampleStats sample_stats(std::span<const double> xs);

// One-sample Kolmogorov-Smirnov statistic against a CDF (samples get sorted).
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic KS critical values: reject at level alpha when the statistic
// exceeds these.
double ks_critical_one_sample(double alpha, std::size_t n);
double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m);

}  // namespace qbl
