#pragma once

// Closed-form quantities for exponentially noise-to-state stable systems:
// the lower Lambert W branch, expected up/down cross times between two
// Lyapunov levels, the optimal level ratio, the occupancy bound b(r) and
// its fractiles q_k.

#include <functional>

namespace nsslab {

using ScalarFn = std::function<double(double)>;

inline constexpr double kDefaultLambertTol = 1e-12;

/// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
///
/// Returns w <= -1 with |w e^w - x| <= tol. Throws DomainError outside
/// [-1/e, 0) and NonConvergence if the iteration budget runs out.
double lambert_w_lower(double x, double tol = kDefaultLambertTol);

/// -1 / W_{-1}(-e^{-2}): the level ratio that maximises the occupancy bound.
double beta_star();

/// -W_{-1}(-e^{-2}), the constant appearing in the denominator of b(r).
double lambert_constant();

/// Pair of Lyapunov levels v0 < v1 together with the dissipation rate c and
/// the noise gain bound gamma_max. Construction validates
/// gamma_max / c < v0 < v1.
class LevelPair {
public:
    LevelPair(double v0, double v1, double c, double gamma_max);

    /// Levels with v0 placed at the given normalised ratio beta in (0, 1).
    static LevelPair from_beta(double v1, double beta, double c, double gamma_max);
    /// Levels with v0 at the optimal ratio beta_star().
    static LevelPair optimal(double v1, double c, double gamma_max);

    double v0() const noexcept { return v0_; }
    double v1() const noexcept { return v1_; }
    double c() const noexcept { return c_; }
    double gamma_max() const noexcept { return gamma_max_; }

    /// c^{-1} gamma_max, the asymptotic mean level of V.
    double noise_floor() const noexcept { return gamma_max_ / c_; }
    /// (v0 - floor) / (v1 - floor), in (0, 1).
    double beta() const noexcept;

private:
    double v0_;
    double v1_;
    double c_;
    double gamma_max_;
};

/// t_uc: expectation of the law dominating up-cross times from below.
double expected_up_cross(const LevelPair& levels);

/// t_dc: expectation of the law dominating down-cross times from above.
double expected_down_cross(const LevelPair& levels);

/// t_uc / (t_uc + t_dc).
double occupancy_ratio(const LevelPair& levels);

/// ln(v1/floor) / (-W_{-1}(-e^{-2}) + ln(v1/floor)); equals occupancy_ratio at beta_star().
double optimal_occupancy_ratio(double v1, double c, double gamma_max);

/// Lower bound b(r) on the long-run fraction of time with ||x|| < r.
///
/// Returns 0 when alpha1(r) <= c^{-1} gamma_max (the bound is vacuous there).
/// Throws DomainError when alpha1(r) is negative or NaN.
double bound_b(double r, double c, double gamma_max, const ScalarFn& alpha1);

/// Radius q_k with b(q_k) = k, for k in (0, 1).
double fractile_q(double k, double c, double gamma_max, const ScalarFn& alpha1_inv);

/// Survival lower bound for up-cross times: P{up > s} >= this value.
double up_cross_survival_bound(double s, const LevelPair& levels);

/// Survival upper bound for down-cross times: P{down >= s} <= this value.
double down_cross_survival_bound(double s, const LevelPair& levels);

/// Start of the exponential tail of down_cross_survival_bound.
double down_cross_threshold(const LevelPair& levels);

/// All derived quantities for one set of levels and one alpha1 envelope.
struct BoundSet {
    double t_uc = 0.0;
    double t_dc = 0.0;
    double ratio_bound = 0.0;
    double beta = 0.0;
    double beta_star = 0.0;
    std::function<double(double)> b;
    std::function<double(double)> q;
};

BoundSet make_bound_set(const LevelPair& levels, ScalarFn alpha1, ScalarFn alpha1_inv);

}  // namespace nsslab
