#include "nsslab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "nsslab/errors.hpp"
#include "nsslab/rng.hpp"

namespace nsslab {

namespace {

// Runs job(i) for i in [0, n) on `threads` workers. The first exception is
// rethrown after all workers stop.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            job(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

// Euler-Maruyama stepper shared by integrate() and ensemble_snapshots().
class Stepper {
public:
    Stepper(const SystemSpec& spec, const SimConfig& cfg, std::uint64_t stream)
        : spec_(spec), cfg_(cfg), engine_(make_engine(cfg.seed, stream)), dw_(spec.dim_noise) {}

    void step(State& x, std::size_t k) {
        const double t = cfg_.time_at(k);
        const double h = cfg_.time_at(k + 1) - t;
        const double sqrt_h = std::sqrt(h);
        for (Eigen::Index j = 0; j < dw_.size(); ++j) {
            dw_(j) = sqrt_h * normal_(engine_);
        }
        const State f = spec_.drift(x);
        const Matrix g = spec_.diffusion(x);
        const Matrix sigma = spec_.covariance(t);
        if (f.size() != x.size() || g.rows() != x.size() || g.cols() != spec_.dim_noise ||
            sigma.rows() != spec_.dim_noise || sigma.cols() != spec_.dim_noise) {
            throw DimensionMismatch("integrate: drift/diffusion/covariance shape mismatch");
        }
        x += f * h + g * (sigma * dw_);
        if (!x.allFinite()) {
            throw NonFiniteState(k + 1, cfg_.time_at(k + 1));
        }
    }

private:
    const SystemSpec& spec_;
    const SimConfig& cfg_;
    Engine engine_;
    std::normal_distribution<double> normal_;
    State dw_;
};

void check_inputs(const SystemSpec& spec, const SimConfig& cfg) {
    cfg.validate();
    spec.validate();
    if (cfg.x0.size() != spec.dim_state) {
        throw DimensionMismatch("SimConfig.x0 has dimension " + std::to_string(cfg.x0.size()) +
                                ", system expects " + std::to_string(spec.dim_state));
    }
}

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0) || !(dt <= t_end) || !std::isfinite(t_end)) {
        throw DomainError("SimConfig: need 0 < dt <= t_end");
    }
    if (t_end / dt > 1e12) {
        throw DomainError("SimConfig: too many steps");
    }
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

double SimConfig::time_at(std::size_t k) const {
    return k >= steps() ? t_end : static_cast<double>(k) * dt;
}

Trajectory integrate(const SystemSpec& spec, const SimConfig& cfg, std::uint64_t stream) {
    check_inputs(spec, cfg);
    const std::size_t n = cfg.steps();
    Trajectory traj;
    traj.dt = cfg.dt;
    traj.times.resize(n + 1);
    traj.states.resize(spec.dim_state, static_cast<Eigen::Index>(n + 1));
    traj.lyap.resize(n + 1);
    traj.norms.resize(n + 1);

    Stepper stepper(spec, cfg, stream);
    State x = cfg.x0;
    for (std::size_t k = 0;; ++k) {
        traj.times[k] = cfg.time_at(k);
        traj.states.col(static_cast<Eigen::Index>(k)) = x;
        traj.lyap[k] = spec.lyapunov.v(x);
        traj.norms[k] = x.norm();
        if (k == n) {
            break;
        }
        stepper.step(x, k);
    }
    return traj;
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("NSS_LAB_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0) {
            return static_cast<unsigned>(value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Trajectory> ensemble(const SystemSpec& spec, const SimConfig& cfg, std::size_t n_paths,
                                 unsigned threads) {
    if (n_paths == 0) {
        throw std::invalid_argument("ensemble: n_paths must be >= 1");
    }
    check_inputs(spec, cfg);
    std::vector<Trajectory> paths(n_paths);
    parallel_for(n_paths, threads ? threads : default_thread_count(),
                 [&](std::size_t i) { paths[i] = integrate(spec, cfg, i); });
    return paths;
}

EnsembleSnapshot ensemble_snapshots(const SystemSpec& spec, const SimConfig& cfg, std::size_t n_paths,
                                    const std::vector<double>& times, unsigned threads) {
    if (n_paths == 0) {
        throw std::invalid_argument("ensemble_snapshots: n_paths must be >= 1");
    }
    check_inputs(spec, cfg);
    const std::size_t n = cfg.steps();
    std::vector<std::size_t> indices;
    for (double t : times) {
        const double pos = t / cfg.dt;
        const auto k = static_cast<std::size_t>(std::llround(std::max(0.0, pos)));
        const std::size_t kk = std::min(k, n);
        if (std::abs(cfg.time_at(kk) - t) > 1e-9 * cfg.dt) {
            throw DomainError("ensemble_snapshots: time " + std::to_string(t) + " not on the grid");
        }
        indices.push_back(kk);
    }

    EnsembleSnapshot snap;
    snap.x0 = cfg.x0;
    snap.times = times;
    for (std::size_t j = 0; j < times.size(); ++j) {
        snap.states.emplace_back(spec.dim_state, static_cast<Eigen::Index>(n_paths));
        snap.lyap.emplace_back(n_paths);
    }
    const std::size_t last = indices.empty() ? 0 : *std::max_element(indices.begin(), indices.end());

    parallel_for(n_paths, threads ? threads : default_thread_count(), [&](std::size_t i) {
        Stepper stepper(spec, cfg, i);
        State x = cfg.x0;
        for (std::size_t k = 0;; ++k) {
            for (std::size_t j = 0; j < indices.size(); ++j) {
                if (indices[j] == k) {
                    snap.states[j].col(static_cast<Eigen::Index>(i)) = x;
                    snap.lyap[j][i] = spec.lyapunov.v(x);
                }
            }
            if (k == last) {
                break;
            }
            stepper.step(x, k);
        }
    });
    return snap;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    out << "t";
    for (Eigen::Index d = 0; d < traj.states.rows(); ++d) {
        out << ",x" << (d + 1);
    }
    out << ",V,norm\n";
    const auto old_precision = out.precision(17);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (k % stride != 0 && k + 1 != traj.size()) {
            continue;
        }
        out << traj.times[k];
        for (Eigen::Index d = 0; d < traj.states.rows(); ++d) {
            out << ',' << traj.states(d, static_cast<Eigen::Index>(k));
        }
        out << ',' << traj.lyap[k] << ',' << traj.norms[k] << '\n';
    }
    out.precision(old_precision);
}

}  // namespace nsslab
