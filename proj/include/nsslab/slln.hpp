#pragma once

// Uniformization of adapted sequences and generalized inverse-CDF couplings
// that bound a sequence elementwise by an i.i.d. sequence from a dominating
// law. Samples may be +inf.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nsslab/bounds.hpp"

namespace nsslab {

/// g(s | history) = P{X_n <= s | X_1..X_{n-1}} and its left limit g(s- | history).
struct ConditionalCdf {
    std::function<double(double, std::span<const double>)> eval;
    std::function<double(double, std::span<const double>)> left_limit;

    /// History-independent law given by a CDF and its left limit.
    static ConditionalCdf iid(ScalarFn cdf, ScalarFn left);
    /// History-independent continuous law (left limit equals the CDF).
    static ConditionalCdf iid_continuous(ScalarFn cdf);
};

struct DominatingLaw {
    ScalarFn cdf;
    ScalarFn survival;

    static DominatingLaw from_cdf(ScalarFn cdf);
    static DominatingLaw from_survival(ScalarFn survival);

    static DominatingLaw uniform(double a, double b);
    static DominatingLaw exponential(double rate);
    static DominatingLaw normal(double mean, double sd);
    static DominatingLaw point_mass(double at);
    /// Law of the up-cross dominating variable: survival = up_cross_survival_bound.
    static DominatingLaw up_cross(const LevelPair& levels);
    /// Law of the down-cross dominating variable: survival = down_cross_survival_bound.
    static DominatingLaw down_cross(const LevelPair& levels);
};

struct InverseOptions {
    double initial_half_width = 1.0;
    int max_doublings = 1100;
    int max_bisections = 200;
    double interval_tol = 1e-12;
};

/// Y_n = g(x_n- | h) + xi_n [g(x_n | h) - g(x_n- | h)], which is U(0,1) and
/// independent across n. Throws DomainError if xi is outside [0, 1] or the
/// supplied g is decreasing at x_n.
double uniformize(double x_n, std::span<const double> history, double xi, const ConditionalCdf& g);

/// inf{s | F(s) >= y} for y in (0, 1). Throws NonConvergence if no bracket is found.
double inverse_cdf_inf(double y, const DominatingLaw& f, const InverseOptions& opts = {});

/// sup{s | F(s) <= y} for y in (0, 1).
double inverse_cdf_sup(double y, const DominatingLaw& f, const InverseOptions& opts = {});

/// Z_n = sup{s | F(s) <= Y_n} with Y_n from uniformize(); i.i.d. from f and
/// Z_n >= X_n whenever P{X_n >= s | past} <= P{X > s}. Throws CouplingViolation
/// at the first index where the inequality fails.
std::vector<double> dominated_coupling_upper(std::span<const double> xs, const ConditionalCdf& g,
                                             const DominatingLaw& f, std::uint64_t seed);

/// Z_n = inf{s | F(s) >= Y_n}; i.i.d. from f and Z_n <= X_n whenever
/// P{X_n > s} >= P{X > s}. X_n = +inf always satisfies the coupling.
std::vector<double> dominated_coupling_lower(std::span<const double> xs, const ConditionalCdf& g,
                                             const DominatingLaw& f, std::uint64_t seed);

}  // namespace nsslab
