#include "nsslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsslab/errors.hpp"

namespace nsslab {

namespace {

constexpr int kLambertMaxIter = 200;

void require_levels(double v0, double v1, double c, double gamma_max) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("LevelPair: c must be positive and finite");
    }
    if (!(gamma_max >= 0.0) || !std::isfinite(gamma_max)) {
        throw DomainError("LevelPair: gamma_max must be non-negative and finite");
    }
    const double floor = gamma_max / c;
    if (!(floor < v0 && v0 < v1) || !std::isfinite(v1)) {
        throw DomainError("LevelPair: need gamma_max/c < v0 < v1, got floor=" +
                          std::to_string(floor) + ", v0=" + std::to_string(v0) +
                          ", v1=" + std::to_string(v1));
    }
}

}  // namespace

double lambert_w_lower(double x, double tol) {
    if (!(tol > 0.0)) {
        throw DomainError("lambert_w_lower: tolerance must be positive");
    }
    const double branch = -std::exp(-1.0);
    if (!(x >= branch && x < 0.0)) {
        throw DomainError("lambert_w_lower: x outside [-1/e, 0): " + std::to_string(x));
    }
    if (x == branch) {
        return -1.0;
    }

    // Work with g(w) = w + ln(-w) - ln(-x), which is increasing on (-inf, -1]
    // and has the same root as w e^w = x, without underflowing e^w.
    const double log_mx = std::log(-x);
    auto g = [log_mx](double w) { return w + std::log(-w) - log_mx; };

    double lo = std::min(-700.0, 2.0 * log_mx - 1.0);
    double hi = -1.0;

    int iter = 0;
    // Bracketing phase.
    for (; iter < kLambertMaxIter && (hi - lo) > 1e-6 * std::abs(hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Halley refinement, safeguarded by the bracket.
    double w = 0.5 * (lo + hi);
    bool converged = false;
    for (; iter < kLambertMaxIter; ++iter) {
        const double gw = g(w);
        if (gw == 0.0) {
            converged = true;
            break;
        }
        if (gw < 0.0) {
            lo = w;
        } else {
            hi = w;
        }
        const double d1 = 1.0 + 1.0 / w;
        const double d2 = -1.0 / (w * w);
        double next = w;
        if (d1 != 0.0) {
            const double newton = gw / d1;
            next = w - newton / (1.0 - 0.5 * newton * d2 / d1);
        }
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const double step = std::abs(next - w);
        w = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w) ||
            next == lo || next == hi) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NonConvergence("lambert_w_lower: iteration budget exhausted");
    }
    const double residual = std::abs(w * std::exp(w) - x);
    if (!(residual <= tol)) {
        throw NonConvergence("lambert_w_lower: residual " + std::to_string(residual) +
                             " above tolerance");
    }
    return w;
}

double lambert_constant() {
    static const double value = -lambert_w_lower(-std::exp(-2.0));
    return value;
}

double beta_star() { return 1.0 / lambert_constant(); }

LevelPair::LevelPair(double v0, double v1, double c, double gamma_max)
    : v0_(v0), v1_(v1), c_(c), gamma_max_(gamma_max) {
    require_levels(v0, v1, c, gamma_max);
}

LevelPair LevelPair::from_beta(double v1, double beta, double c, double gamma_max) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw DomainError("LevelPair::from_beta: beta must lie in (0, 1)");
    }
    if (!(c > 0.0)) {
        throw DomainError("LevelPair::from_beta: c must be positive");
    }
    const double floor = gamma_max / c;
    return LevelPair(floor + beta * (v1 - floor), v1, c, gamma_max);
}

LevelPair LevelPair::optimal(double v1, double c, double gamma_max) {
    return from_beta(v1, beta_star(), c, gamma_max);
}

double LevelPair::beta() const noexcept {
    const double floor = noise_floor();
    return (v0_ - floor) / (v1_ - floor);
}

double expected_up_cross(const LevelPair& levels) {
    const double floor = levels.noise_floor();
    const double v0 = levels.v0();
    const double v1 = levels.v1();
    if (floor == 0.0) {
        // Survival bound is the constant (v1 - v0)/v1: the law has infinite mean.
        return std::numeric_limits<double>::infinity();
    }
    return (v1 - v0) / (v1 - floor) * std::log(v1 / floor) / levels.c();
}

double expected_down_cross(const LevelPair& levels) {
    const double floor = levels.noise_floor();
    return (1.0 + std::log((levels.v1() - floor) / (levels.v0() - floor))) / levels.c();
}

double occupancy_ratio(const LevelPair& levels) {
    const double t_uc = expected_up_cross(levels);
    if (std::isinf(t_uc)) {
        return 1.0;
    }
    return t_uc / (t_uc + expected_down_cross(levels));
}

double optimal_occupancy_ratio(double v1, double c, double gamma_max) {
    if (!(c > 0.0) || !(gamma_max >= 0.0) || !(v1 > gamma_max / c)) {
        throw DomainError("optimal_occupancy_ratio: need v1 > gamma_max/c > = 0");
    }
    if (gamma_max == 0.0) {
        return 1.0;
    }
    const double log_ratio = std::log(v1 * c / gamma_max);
    return log_ratio / (lambert_constant() + log_ratio);
}

double bound_b(double r, double c, double gamma_max, const ScalarFn& alpha1) {
    if (!(c > 0.0) || !(gamma_max >= 0.0)) {
        throw DomainError("bound_b: need c > 0 and gamma_max >= 0");
    }
    const double a = alpha1(r);
    if (std::isnan(a) || a < 0.0) {
        throw DomainError("bound_b: alpha1(r) must be non-negative, got " + std::to_string(a));
    }
    const double floor = gamma_max / c;
    if (a <= floor) {
        return 0.0;
    }
    if (floor == 0.0 || std::isinf(a)) {
        return 1.0;
    }
    const double log_ratio = std::log(a / floor);
    return log_ratio / (lambert_constant() + log_ratio);
}

double fractile_q(double k, double c, double gamma_max, const ScalarFn& alpha1_inv) {
    if (!(k > 0.0 && k < 1.0)) {
        throw DomainError("fractile_q: k must lie in (0, 1)");
    }
    if (!(c > 0.0) || !(gamma_max >= 0.0)) {
        throw DomainError("fractile_q: need c > 0 and gamma_max >= 0");
    }
    const double level = gamma_max / c * std::exp(k / (1.0 - k) * lambert_constant());
    return alpha1_inv(level);
}

double up_cross_survival_bound(double s, const LevelPair& levels) {
    if (s < 0.0) {
        return 1.0;
    }
    const double floor = levels.noise_floor();
    const double v1 = levels.v1();
    const double grow = std::exp(levels.c() * s);
    if (std::isinf(grow)) {
        return floor > 0.0 ? 0.0 : (v1 - levels.v0()) / v1;
    }
    return (v1 - levels.v0()) / (v1 - floor + floor * grow);
}

double down_cross_threshold(const LevelPair& levels) {
    const double floor = levels.noise_floor();
    return std::log((levels.v1() - floor) / (levels.v0() - floor)) / levels.c();
}

double down_cross_survival_bound(double s, const LevelPair& levels) {
    const double floor = levels.noise_floor();
    const double ratio = (levels.v1() - floor) / (levels.v0() - floor);
    return std::min(1.0, ratio * std::exp(-levels.c() * s));
}

BoundSet make_bound_set(const LevelPair& levels, ScalarFn alpha1, ScalarFn alpha1_inv) {
    BoundSet set;
    set.t_uc = expected_up_cross(levels);
    set.t_dc = expected_down_cross(levels);
    set.ratio_bound = occupancy_ratio(levels);
    set.beta = levels.beta();
    set.beta_star = beta_star();
    const double c = levels.c();
    const double g = levels.gamma_max();
    set.b = [c, g, a1 = std::move(alpha1)](double r) { return bound_b(r, c, g, a1); };
    set.q = [c, g, inv = std::move(alpha1_inv)](double k) { return fractile_q(k, c, g, inv); };
    return set;
}

}  // namespace nsslab
