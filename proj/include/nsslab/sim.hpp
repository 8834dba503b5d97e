#pragma once

// Fixed-step Euler-Maruyama integration of SystemSpec trajectories and
// reproducible ensembles built on counter-derived RNG substreams.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nsslab/model.hpp"

namespace nsslab {

struct SimConfig {
    double t_end = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    State x0;

    /// Throws DomainError unless 0 < dt <= t_end.
    void validate() const;
    /// ceil(t_end / dt), tolerant to representation error in t_end/dt.
    std::size_t steps() const;
    /// Time of grid point k; the last point is t_end exactly.
    double time_at(std::size_t k) const;
};

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    Matrix states;              ///< N x (steps + 1), one column per grid point
    std::vector<double> lyap;   ///< V(states.col(k))
    std::vector<double> norms;  ///< ||states.col(k)||_2

    std::size_t size() const { return times.size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

/// Integrates one path using substream `stream` of cfg.seed:
///   x_{k+1} = x_k + f(x_k) h_k + h(x_k) Sigma(t_k) dW_k,  dW_k ~ N(0, h_k I).
/// Throws NonFiniteState if the state stops being finite.
Trajectory integrate(const SystemSpec& spec, const SimConfig& cfg, std::uint64_t stream = 0);

/// Worker count: NSS_LAB_THREADS if set and positive, else hardware concurrency.
unsigned default_thread_count();

/// n_paths independent trajectories; path i always uses substream i.
std::vector<Trajectory> ensemble(const SystemSpec& spec, const SimConfig& cfg,
                                 std::size_t n_paths, unsigned threads = 0);

/// States of an ensemble recorded only at selected grid times.
struct EnsembleSnapshot {
    State x0;
    std::vector<double> times;
    std::vector<Matrix> states;              ///< per time: N x n_paths
    std::vector<std::vector<double>> lyap;   ///< per time: V per path

    std::size_t n_paths() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().cols()); }
};

/// Same paths as ensemble(), keeping only the requested times (each must
/// lie on the integration grid, within 1e-9 * dt).
EnsembleSnapshot ensemble_snapshots(const SystemSpec& spec, const SimConfig& cfg,
                                    std::size_t n_paths, const std::vector<double>& times,
                                    unsigned threads = 0);

/// CSV dump with header t,x1,...,xN,V,norm and 17 significant digits.
/// `stride` > 1 keeps every stride-th row (the last row is always kept).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t stride = 1);

}  // namespace nsslab
