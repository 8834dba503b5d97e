#pragma once

// Small statistics helpers used by the verification reports and tests.

#include <cstddef>
#include <span>
#include <vector>

namespace nsslab {

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval for a binomial proportion; `z` is the normal
/// quantile applied on each side (one-sided use reads only one end).
Interval wilson_interval(std::size_t successes, std::size_t n, double z);

/// Standard normal quantile.
double normal_quantile(double p);
/// Student t quantile with `dof` degrees of freedom.
double student_t_quantile(double p, double dof);

struct SampleMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;   ///< unbiased
    double std_error() const;
};

SampleMoments moments(std::span<const double> xs);

/// Sample excess-free kurtosis m4 / m2^2 (3 for a Gaussian).
double sample_kurtosis(std::span<const double> xs);

/// Pearson correlation between consecutive elements.
double lag1_correlation(std::span<const double> xs);

/// Kolmogorov-Smirnov distance between the empirical CDF of `xs` and `cdf`.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf);

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

}  // namespace nsslab

#include <algorithm>
#include <cmath>

namespace nsslab {

template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace nsslab
