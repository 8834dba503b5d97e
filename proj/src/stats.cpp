#include "nsslab/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace nsslab {

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

double SampleMoments::std_error() const {
    return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

SampleMoments moments(std::span<const double> xs) {
    SampleMoments m;
    m.n = xs.size();
    if (xs.empty()) {
        return m;
    }
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double x : xs) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    m.mean = mean;
    m.variance = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
    return m;
}

double sample_kurtosis(std::span<const double> xs) {
    if (xs.size() < 2) {
        throw std::invalid_argument("sample_kurtosis: need at least two samples");
    }
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double m2 = 0.0;
    double m4 = 0.0;
    for (double x : xs) {
        const double d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(xs.size());
    m4 /= static_cast<double>(xs.size());
    return m4 / (m2 * m2);
}

double lag1_correlation(std::span<const double> xs) {
    if (xs.size() < 3) {
        throw std::invalid_argument("lag1_correlation: need at least three samples");
    }
    const std::size_t n = xs.size() - 1;
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += xs[i];
        mb += xs[i + 1];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = xs[i] - ma;
        const double b = xs[i + 1] - mb;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    return sab / std::sqrt(saa * sbb);
}

double ks_pvalue(double d, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("ks_pvalue: empty sample");
    }
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 1e-3) {
        return 1.0;
    }
    // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) {
            break;
        }
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace nsslab
