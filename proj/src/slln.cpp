#include "nsslab/slln.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsslab/errors.hpp"
#include "nsslab/rng.hpp"

namespace nsslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Finds lo < hi with F(lo) `below` y and F(hi) not, expanding geometrically.
template <typename Below>
std::pair<double, double> bracket(const DominatingLaw& f, Below below, const InverseOptions& opts) {
    double lo = -opts.initial_half_width;
    double hi = opts.initial_half_width;
    int budget = opts.max_doublings;
    while (!below(f.cdf(lo))) {
        hi = lo;
        lo *= 2.0;
        if (--budget < 0 || std::isinf(lo)) {
            throw NonConvergence("inverse cdf: no lower bracket");
        }
    }
    while (below(f.cdf(hi))) {
        lo = hi;
        hi *= 2.0;
        if (--budget < 0 || std::isinf(hi)) {
            throw NonConvergence("inverse cdf: no upper bracket");
        }
    }
    return {lo, hi};
}

template <typename Below>
std::pair<double, double> bisect(const DominatingLaw& f, Below below, const InverseOptions& opts) {
    auto [lo, hi] = bracket(f, below, opts);
    for (int i = 0; i < opts.max_bisections && hi - lo > opts.interval_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        if (below(f.cdf(mid))) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, hi};
}

// Bisection down to adjacent doubles.
InverseOptions exact_opts() {
    InverseOptions opts;
    opts.interval_tol = 0.0;
    opts.max_bisections = 2200;
    return opts;
}

void require_open_unit(double y, const char* who) {
    if (!(y > 0.0 && y < 1.0)) {
        throw DomainError(std::string(who) + ": y must lie in (0, 1)");
    }
}

std::vector<double> uniformized(std::span<const double> xs, const ConditionalCdf& g, std::uint64_t seed) {
    Engine engine = make_engine(seed);
    std::vector<double> ys(xs.size());
    for (std::size_t n = 0; n < xs.size(); ++n) {
        ys[n] = uniformize(xs[n], xs.first(n), open_uniform(engine), g);
    }
    return ys;
}

}  // namespace

ConditionalCdf ConditionalCdf::iid(ScalarFn cdf, ScalarFn left) {
    return {[cdf = std::move(cdf)](double s, std::span<const double>) { return cdf(s); },
            [left = std::move(left)](double s, std::span<const double>) { return left(s); }};
}

ConditionalCdf ConditionalCdf::iid_continuous(ScalarFn cdf) {
    ScalarFn copy = cdf;
    return iid(std::move(cdf), std::move(copy));
}

DominatingLaw DominatingLaw::from_cdf(ScalarFn cdf) {
    ScalarFn copy = cdf;
    return {std::move(cdf), [copy = std::move(copy)](double s) { return 1.0 - copy(s); }};
}

DominatingLaw DominatingLaw::from_survival(ScalarFn survival) {
    ScalarFn copy = survival;
    return {[copy = std::move(copy)](double s) { return 1.0 - copy(s); }, std::move(survival)};
}

DominatingLaw DominatingLaw::uniform(double a, double b) {
    if (!(a < b)) {
        throw DomainError("DominatingLaw::uniform: need a < b");
    }
    return from_cdf([a, b](double s) { return std::clamp((s - a) / (b - a), 0.0, 1.0); });
}

DominatingLaw DominatingLaw::exponential(double rate) {
    if (!(rate > 0.0)) {
        throw DomainError("DominatingLaw::exponential: rate must be positive");
    }
    return from_survival([rate](double s) { return s < 0.0 ? 1.0 : std::exp(-rate * s); });
}

DominatingLaw DominatingLaw::normal(double mean, double sd) {
    if (!(sd > 0.0)) {
        throw DomainError("DominatingLaw::normal: sd must be positive");
    }
    return {[mean, sd](double s) { return 0.5 * std::erfc(-(s - mean) / (sd * std::sqrt(2.0))); },
            [mean, sd](double s) { return 0.5 * std::erfc((s - mean) / (sd * std::sqrt(2.0))); }};
}

DominatingLaw DominatingLaw::point_mass(double at) {
    return from_cdf([at](double s) { return s >= at ? 1.0 : 0.0; });
}

DominatingLaw DominatingLaw::up_cross(const LevelPair& levels) {
    return from_survival([levels](double s) { return up_cross_survival_bound(s, levels); });
}

DominatingLaw DominatingLaw::down_cross(const LevelPair& levels) {
    return from_survival([levels](double s) { return down_cross_survival_bound(s, levels); });
}

double uniformize(double x_n, std::span<const double> history, double xi, const ConditionalCdf& g) {
    if (!(xi >= 0.0 && xi <= 1.0)) {
        throw DomainError("uniformize: xi must lie in [0, 1]");
    }
    const double left = g.left_limit(x_n, history);
    const double right = g.eval(x_n, history);
    if (left > right + 1e-15) {
        throw DomainError("uniformize: conditional CDF decreasing at x=" + std::to_string(x_n));
    }
    return std::clamp(left + xi * (right - left), 0.0, 1.0);
}

double inverse_cdf_inf(double y, const DominatingLaw& f, const InverseOptions& opts) {
    require_open_unit(y, "inverse_cdf_inf");
    // Invariant: F(lo) < y <= F(hi); the infimum lies in (lo, hi].
    return bisect(f, [y](double p) { return p < y; }, opts).second;
}

double inverse_cdf_sup(double y, const DominatingLaw& f, const InverseOptions& opts) {
    require_open_unit(y, "inverse_cdf_sup");
    // Invariant: F(lo) <= y < F(hi); the supremum lies in [lo, hi).
    return bisect(f, [y](double p) { return p <= y; }, opts).first;
}

std::vector<double> dominated_coupling_upper(std::span<const double> xs, const ConditionalCdf& g,
                                             const DominatingLaw& f, std::uint64_t seed) {
    const std::vector<double> ys = uniformized(xs, g, seed);
    std::vector<double> zs(xs.size());
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const double y = ys[n];
        if (y >= 1.0) {
            zs[n] = kInf;
        } else {
            // Upper end of the final bracket, so rounding never breaks Z_n >= X_n.
            const double yy = std::max(y, std::numeric_limits<double>::min());
            zs[n] = bisect(f, [yy](double p) { return p <= yy; }, exact_opts()).second;
        }
        if (!(zs[n] >= xs[n])) {
            throw CouplingViolation(n, xs[n], zs[n]);
        }
    }
    return zs;
}

std::vector<double> dominated_coupling_lower(std::span<const double> xs, const ConditionalCdf& g,
                                             const DominatingLaw& f, std::uint64_t seed) {
    const std::vector<double> ys = uniformized(xs, g, seed);
    std::vector<double> zs(xs.size());
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const double y = ys[n];
        if (y <= 0.0) {
            zs[n] = -kInf;
        } else {
            const double yy = std::min(y, 1.0 - std::numeric_limits<double>::epsilon() / 2);
            zs[n] = bisect(f, [yy](double p) { return p < yy; }, exact_opts()).first;
        }
        if (!(xs[n] >= zs[n])) {
            throw CouplingViolation(n, xs[n], zs[n]);
        }
    }
    return zs;
}

}  // namespace nsslab
