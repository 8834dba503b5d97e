#include "nsslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nsslab/errors.hpp"

namespace nsslab {

namespace {

double fd_step(const State& x) {
    return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
}

void require_shape(const char* what, Eigen::Index rows, Eigen::Index cols, Eigen::Index want_rows,
                   Eigen::Index want_cols) {
    if (rows != want_rows || cols != want_cols) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(want_rows) +
                                "x" + std::to_string(want_cols) + ", got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
    }
}

// Evaluates gamma, reporting std::nullopt outside its domain.
std::optional<double> try_gamma(const SystemSpec& spec, double s) {
    try {
        return spec.gamma(s);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

bool monotone_from_zero(const ScalarFn& fn, const std::vector<double>& grid) {
    if (!fn) {
        return true;
    }
    if (std::abs(fn(0.0)) > 1e-12) {
        return false;
    }
    double prev = fn(grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = fn(grid[i]);
        if (!(cur >= prev - 1e-12 * std::max(1.0, std::abs(prev)))) {
            return false;
        }
        prev = cur;
    }
    return true;
}

}  // namespace

void SystemSpec::validate() const {
    if (dim_state <= 0 || dim_noise <= 0) {
        throw DimensionMismatch("SystemSpec: dimensions must be positive");
    }
    if (!drift || !diffusion || !covariance || !lyapunov.v || !gamma) {
        throw std::invalid_argument("SystemSpec '" + name + "': missing callable");
    }
    if (!(c > 0.0)) {
        throw DomainError("SystemSpec: c must be positive");
    }
    if (!(gamma_max >= 0.0)) {
        throw DomainError("SystemSpec: gamma_max must be non-negative");
    }
}

State fd_gradient(const ScalarField& v, const State& x) {
    const double h = fd_step(x);
    State grad(x.size());
    State probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = v(probe);
        probe(i) = x(i) - h;
        const double down = v(probe);
        probe(i) = x(i);
        grad(i) = (up - down) / (2.0 * h);
    }
    return grad;
}

Matrix fd_hessian(const ScalarField& v, const State& x) {
    const double h = fd_step(x);
    const Eigen::Index n = x.size();
    Matrix hess(n, n);
    const double center = v(x);
    State probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        probe(i) = x(i) + h;
        const double up = v(probe);
        probe(i) = x(i) - h;
        const double down = v(probe);
        probe(i) = x(i);
        hess(i, i) = (up - 2.0 * center + down) / (h * h);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (const auto& [si, sj] : {std::pair{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}}) {
                probe(i) = x(i) + si * h;
                probe(j) = x(j) + sj * h;
                acc += si * sj * v(probe);
            }
            probe(i) = x(i);
            probe(j) = x(j);
            hess(i, j) = hess(j, i) = acc / (4.0 * h * h);
        }
    }
    return hess;
}

double generator_v(const SystemSpec& spec, const State& x, double t, const GeneratorOptions& opts) {
    const Eigen::Index n = spec.dim_state;
    const Eigen::Index m = spec.dim_noise;
    require_shape("state", x.size(), 1, n, 1);

    const LyapunovSpec& lyap = spec.lyapunov;
    if ((!lyap.grad_v || !lyap.hess_v) && !opts.allow_finite_differences) {
        throw std::invalid_argument("generator_v: analytic derivatives required");
    }
    const State grad = lyap.grad_v ? lyap.grad_v(x) : fd_gradient(lyap.v, x);
    const Matrix hess = lyap.hess_v ? lyap.hess_v(x) : fd_hessian(lyap.v, x);
    const State f = spec.drift(x);
    const Matrix h = spec.diffusion(x);
    const Matrix sigma = spec.covariance(t);
    require_shape("grad V", grad.size(), 1, n, 1);
    require_shape("hess V", hess.rows(), hess.cols(), n, n);
    require_shape("drift", f.size(), 1, n, 1);
    require_shape("diffusion", h.rows(), h.cols(), n, m);
    require_shape("covariance", sigma.rows(), sigma.cols(), m, m);

    const Matrix b = h * sigma;
    return grad.dot(f) + 0.5 * (b.transpose() * hess * b).trace();
}

double covariance_magnitude(const SystemSpec& spec, double t) {
    const Matrix sigma = spec.covariance(t);
    return (sigma * sigma.transpose()).norm();
}

double enss_residual(const SystemSpec& spec, const State& x, double t) {
    return generator_v(spec, x, t) + spec.c * spec.lyapunov.v(x) -
           spec.gamma(covariance_magnitude(spec, t));
}

ConditionReport check_enss(const SystemSpec& spec, const std::vector<State>& states,
                           const std::vector<double>& times, const CheckOptions& opts) {
    if (states.empty() || times.empty()) {
        throw std::invalid_argument("check_enss: empty state or time sample");
    }
    spec.validate();
    ConditionReport report;

    for (const State& x : states) {
        const double v = spec.lyapunov.v(x);
        for (double t : times) {
            const double lv = generator_v(spec, x, t);
            const double g = spec.gamma(covariance_magnitude(spec, t));
            const double residual = lv + spec.c * v - g;
            const double allowance =
                opts.rel_tol * (1.0 + std::abs(lv) + spec.c * std::abs(v) + std::abs(g));
            ++report.points_checked;
            report.max_violation = std::max(report.max_violation, residual - allowance);
            if (residual > allowance) {
                report.violating_points.push_back({x, t, residual});
            }
        }
        const double r = x.norm();
        const LyapunovSpec& lyap = spec.lyapunov;
        const double slack = 1e-12 * std::max(1.0, std::abs(v));
        if ((lyap.alpha1 && lyap.alpha1(r) > v + slack) ||
            (lyap.alpha2 && v > lyap.alpha2(r) + slack)) {
            ++report.envelope_violations;
        }
    }

    double window = opts.gamma_window;
    if (!(window > 0.0)) {
        window = spec.period ? *spec.period : std::max(1.0, *std::max_element(times.begin(), times.end()));
    }
    for (double t : linspace(0.0, window, opts.gamma_points)) {
        const double g = spec.gamma(covariance_magnitude(spec, t));
        report.max_gamma_observed = std::max(report.max_gamma_observed, g);
    }
    report.gamma_max_ok =
        report.max_gamma_observed <= spec.gamma_max * (1.0 + 1e-12) + 1e-15;

    const std::vector<double> radii = linspace(0.0, opts.k_check_radius, opts.k_check_points);
    const LyapunovSpec& lyap = spec.lyapunov;
    report.class_k_ok = monotone_from_zero(lyap.alpha1, radii) &&
                        monotone_from_zero(lyap.alpha2, radii) &&
                        monotone_from_zero(lyap.alpha3, radii);
    // gamma may be defined on a restricted domain; check monotonicity where defined.
    std::optional<double> prev;
    if (auto g0 = try_gamma(spec, 0.0); g0 && std::abs(*g0) > 1e-12) {
        report.class_k_ok = false;
    }
    for (double s : radii) {
        const auto g = try_gamma(spec, s);
        if (!g) {
            continue;
        }
        if (prev && *g < *prev - 1e-12) {
            report.class_k_ok = false;
        }
        prev = g;
    }

    if (lyap.alpha1 && lyap.alpha1_inv) {
        for (double r : radii) {
            const double back = lyap.alpha1_inv(lyap.alpha1(r));
            if (std::abs(back - r) > 1e-8 * std::max(1.0, r)) {
                report.alpha1_inverse_ok = false;
                break;
            }
        }
    }
    return report;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

std::vector<State> state_grid(int dim, double half_width, int per_dim) {
    if (dim <= 0 || per_dim <= 0) {
        throw std::invalid_argument("state_grid: dim and per_dim must be positive");
    }
    const std::vector<double> axis = linspace(-half_width, half_width, static_cast<std::size_t>(per_dim));
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
        total *= static_cast<std::size_t>(per_dim);
    }
    std::vector<State> grid;
    grid.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        State x(dim);
        std::size_t rest = flat;
        for (int d = 0; d < dim; ++d) {
            x(d) = axis[rest % static_cast<std::size_t>(per_dim)];
            rest /= static_cast<std::size_t>(per_dim);
        }
        grid.push_back(std::move(x));
    }
    return grid;
}

SystemSpec builtin_example() {
    SystemSpec spec;
    spec.name = "paper-example";
    spec.dim_state = 2;
    spec.dim_noise = 2;
    spec.drift = [](const State& x) {
        State f(2);
        f << -x(0) + x(1), -x(0) - x(1);
        return f;
    };
    spec.diffusion = [](const State& x) {
        Matrix h(2, 2);
        h << 0.0, 0.0, x(1), 1.0;
        return h;
    };
    spec.covariance = [](double t) {
        Matrix sigma = Matrix::Zero(2, 2);
        sigma(0, 0) = 1.0;
        sigma(1, 1) = std::sin(t);
        return sigma;
    };
    auto half_square = [](double r) { return 0.5 * r * r; };
    spec.lyapunov.v = [](const State& x) { return 0.5 * x.squaredNorm(); };
    spec.lyapunov.grad_v = [](const State& x) { return State(x); };
    spec.lyapunov.hess_v = [](const State&) { return Matrix(Matrix::Identity(2, 2)); };
    spec.lyapunov.alpha1 = half_square;
    spec.lyapunov.alpha2 = half_square;
    spec.lyapunov.alpha3 = half_square;
    spec.lyapunov.alpha1_inv = [](double v) { return std::sqrt(2.0 * v); };
    spec.c = 1.0;
    spec.gamma = [](double s) {
        // Defined for s >= 1 only; ||Sigma Sigma^T||_F >= 1 always holds here.
        if (s < 1.0 - 1e-12) {
            throw DomainError("paper-example gamma: argument below 1");
        }
        return 0.5 * std::sqrt(std::max(0.0, s * s - 1.0));
    };
    spec.gamma_max = 0.5;
    spec.period = 2.0 * std::numbers::pi;
    return spec;
}

SystemSpec ornstein_uhlenbeck(double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma >= 0.0)) {
        throw DomainError("ornstein_uhlenbeck: need theta > 0 and sigma >= 0");
    }
    SystemSpec spec;
    spec.name = "ou";
    spec.dim_state = 1;
    spec.dim_noise = 1;
    spec.drift = [theta](const State& x) { return State(-theta * x); };
    spec.diffusion = [](const State&) { return Matrix(Matrix::Ones(1, 1)); };
    spec.covariance = [sigma](double) { return Matrix(Matrix::Constant(1, 1, sigma)); };
    auto half_square = [](double r) { return 0.5 * r * r; };
    spec.lyapunov.v = [](const State& x) { return 0.5 * x.squaredNorm(); };
    spec.lyapunov.grad_v = [](const State& x) { return State(x); };
    spec.lyapunov.hess_v = [](const State&) { return Matrix(Matrix::Identity(1, 1)); };
    spec.lyapunov.alpha1 = half_square;
    spec.lyapunov.alpha2 = half_square;
    spec.lyapunov.alpha3 = [theta](double r) { return theta * r * r; };
    spec.lyapunov.alpha1_inv = [](double v) { return std::sqrt(2.0 * v); };
    spec.c = 2.0 * theta;
    spec.gamma = [](double s) { return 0.5 * s; };
    spec.gamma_max = 0.5 * sigma * sigma;
    return spec;
}

std::vector<std::string> builtin_names() { return {"paper-example", "ou"}; }

SystemSpec builtin_system(const std::string& name) {
    if (name == "paper-example") {
        return builtin_example();
    }
    if (name == "ou") {
        return ornstein_uhlenbeck();
    }
    throw std::invalid_argument("unknown built-in system '" + name + "'");
}

}  // namespace nsslab
