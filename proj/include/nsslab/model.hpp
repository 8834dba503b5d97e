#pragma once

// System description for SDEs of the form dx = f(x) dt + h(x) Sigma(t) dw,
// Ito generator of a Lyapunov function, and numerical spot checks of the
// exponential noise-to-state stability conditions.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nsslab/bounds.hpp"

namespace nsslab {

using State = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using VectorField = std::function<State(const State&)>;
using MatrixField = std::function<Matrix(const State&)>;
using TimeMatrix = std::function<Matrix(double)>;
using ScalarField = std::function<double(const State&)>;

struct LyapunovSpec {
    ScalarField v;
    VectorField grad_v;   ///< optional; central differences when empty
    MatrixField hess_v;   ///< optional; central differences when empty
    ScalarFn alpha1;
    ScalarFn alpha2;
    ScalarFn alpha3;
    ScalarFn alpha1_inv;
};

struct SystemSpec {
    std::string name;
    int dim_state = 0;
    int dim_noise = 0;
    VectorField drift;       ///< f(x)
    MatrixField diffusion;   ///< h(x), N x m
    TimeMatrix covariance;   ///< Sigma(t), m x m
    LyapunovSpec lyapunov;
    double c = 0.0;
    ScalarFn gamma;          ///< gain applied to ||Sigma Sigma^T||_F
    double gamma_max = 0.0;
    /// Period of Sigma(t), if any; used to choose the gamma_max check window.
    std::optional<double> period;

    /// Throws DimensionMismatch / DomainError on an obviously malformed spec.
    void validate() const;
};

struct GeneratorOptions {
    bool allow_finite_differences = true;
};

/// Central-difference gradient, step eps^{1/3} * max(1, ||x||).
State fd_gradient(const ScalarField& v, const State& x);
/// Central-difference Hessian with the same step policy.
Matrix fd_hessian(const ScalarField& v, const State& x);

/// (grad V)^T f(x) + 1/2 tr(Sigma^T h^T (hess V) h Sigma).
double generator_v(const SystemSpec& spec, const State& x, double t,
                   const GeneratorOptions& opts = {});

/// ||Sigma(t) Sigma(t)^T||_F
double covariance_magnitude(const SystemSpec& spec, double t);

struct ConditionViolation {
    State state;
    double time = 0.0;
    double residual = 0.0;
};

struct ConditionReport {
    std::size_t points_checked = 0;
    /// Largest residual in excess of its rounding allowance; <= 0 iff no violations.
    double max_violation = -std::numeric_limits<double>::infinity();
    std::vector<ConditionViolation> violating_points;

    // Auxiliary premise checks (not part of the dissipation residual).
    double max_gamma_observed = 0.0;   ///< max of gamma(||Sigma Sigma^T||_F) on the time grid
    bool gamma_max_ok = true;
    std::size_t envelope_violations = 0;   ///< alpha1(|x|) <= V(x) <= alpha2(|x|) failures
    bool class_k_ok = true;                ///< alpha's and gamma monotone with value 0 at 0
    bool alpha1_inverse_ok = true;

    bool dissipation_ok() const { return violating_points.empty(); }
    bool premises_ok() const {
        return dissipation_ok() && gamma_max_ok && envelope_violations == 0 && class_k_ok &&
               alpha1_inverse_ok;
    }
};

struct CheckOptions {
    /// Relative rounding allowance on the dissipation residual.
    double rel_tol = 1e-8;
    /// Window and resolution for sup_t gamma(||Sigma Sigma^T||_F) <= gamma_max.
    double gamma_window = 0.0;   ///< 0: use spec.period, else 2*pi
    std::size_t gamma_points = 10000;
    /// Radius grid for the class-K and alpha1_inv spot checks.
    double k_check_radius = 10.0;
    std::size_t k_check_points = 200;
};

/// Dissipation residual at one point: L V + c V - gamma(||Sigma Sigma^T||_F).
double enss_residual(const SystemSpec& spec, const State& x, double t);

/// Evaluates the eNSS dissipation inequality on every (state, time) pair and
/// spot-checks the remaining premises (gamma_max, envelopes, class-K shape).
ConditionReport check_enss(const SystemSpec& spec, const std::vector<State>& states,
                           const std::vector<double>& times, const CheckOptions& opts = {});

/// Regular grid of `per_dim` points per coordinate over [-half_width, half_width]^N.
std::vector<State> state_grid(int dim, double half_width, int per_dim);
std::vector<double> linspace(double a, double b, std::size_t n);

/// The two-dimensional example system:
///   f(x) = (-x1 + x2, -x1 - x2),  h(x) = [[0, 0], [x2, 1]],  Sigma(t) = diag(1, sin t),
///   V(x) = (x1^2 + x2^2)/2, alpha_i(r) = r^2/2, c = 1,
///   gamma(s) = sqrt(s^2 - 1)/2 on s >= 1, gamma_max = 1/2.
SystemSpec builtin_example();

/// Names accepted by builtin_system().
std::vector<std::string> builtin_names();
/// Looks up a built-in system by name ("paper-example", "ou").
SystemSpec builtin_system(const std::string& name);

/// Scalar Ornstein-Uhlenbeck dx = -theta x dt + sigma dw with V = x^2/2,
/// c = 2 theta, gamma(s) = s/2 and gamma_max = sigma^2/2.
SystemSpec ornstein_uhlenbeck(double theta = 1.0, double sigma = 1.0);

}  // namespace nsslab
