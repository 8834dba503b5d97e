#pragma once

// Loop structure of V(x(t)) between two levels v0 < v1, empirical time
// averages and survival functions, and statistical comparison of simulated
// data against the closed-form bounds.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsslab/bounds.hpp"
#include "nsslab/sim.hpp"

namespace nsslab {

enum class Phase { in_up_phase, in_down_phase };

/// Crossing times tau_0 = 0 < tau_1 < ... detected on the sampling grid.
///
/// tau_{2i+1} is the first grid time at or after tau_{2i} with V >= v1 and
/// tau_{2i+2} the first grid time after tau_{2i+1} with V <= v0. taus is the
/// running sum of the interleaved up/down durations, so the two views agree
/// exactly.
struct LoopRecord {
    std::vector<double> taus;
    std::vector<std::size_t> tau_indices;   ///< grid index of each crossing
    std::vector<double> up_times;           ///< tau_{2i+1} - tau_{2i}
    std::vector<double> down_times;         ///< tau_{2i+2} - tau_{2i+1}
    std::size_t complete_loops = 0;
    Phase tail_state = Phase::in_up_phase;
    bool started_above = false;             ///< V(x0) >= v1, so tau_1 = 0
    double horizon = 0.0;
};

struct CrossingOptions {
    /// Refine each crossing by linear interpolation between grid points.
    bool interpolate = false;
};

LoopRecord extract_loops(std::span<const double> lyap, std::span<const double> times, double v0,
                         double v1, const CrossingOptions& opts = {});
LoopRecord extract_loops(const Trajectory& traj, double v0, double v1,
                         const CrossingOptions& opts = {});

/// Total time spent in up phases, including an unfinished up phase at the end.
double up_phase_time(const LoopRecord& record);

enum class DistributionKind { survival, cumulative };

struct EmpiricalDistribution {
    DistributionKind kind = DistributionKind::survival;
    std::vector<double> thresholds;
    std::vector<double> values;
    double n_samples = 0.0;   ///< sample count, or total time for time averages

    /// Right-continuous step lookup; left of the first threshold a survival
    /// function is 1 and a cumulative one is 0.
    double at(double s) const;
};

/// value(s) = #{x > s} / n at each distinct sample value.
EmpiricalDistribution empirical_survival(std::span<const double> samples);

enum class TimeAverageMode { norm, lyapunov };

/// (1/T) sum_k w_k 1{values[k] < r}, with w_k = clamp(T - t_k, 0, dt).
EmpiricalDistribution empirical_time_average(std::span<const double> values,
                                             std::span<const double> times, double dt,
                                             double horizon, std::span<const double> thresholds);
EmpiricalDistribution empirical_time_average(const Trajectory& traj,
                                             std::span<const double> thresholds,
                                             TimeAverageMode mode);

enum class CheckStatus { pass, flagged, insufficient_data, skipped };
std::string to_string(CheckStatus status);

/// One row of a check table; serialised as threshold,empirical,bound,ci_low,ci_high,flag.
struct CheckRow {
    double threshold = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool flag = false;
};

void write_check_csv(std::ostream& out, std::span<const CheckRow> rows);
std::size_t count_flags(std::span<const CheckRow> rows);

struct MeanCheck {
    std::size_t n = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double half_width = 0.0;   ///< one-sided t-interval half width
    double reference = 0.0;    ///< t_uc or t_dc
    bool flag = false;
};

struct SideReport {
    CheckStatus status = CheckStatus::skipped;
    std::vector<CheckRow> survival;
    MeanCheck mean;
    std::size_t flags() const;
};

struct CrossTimeOptions {
    double confidence = 0.99;
    std::size_t min_loops = 30;
    std::size_t grid_points = 25;
};

/// Up-cross samples against the survival lower bound: flags a threshold when
/// the upper confidence limit of P{X > s} lies below the bound, and the mean
/// when its upper t-limit lies below t_uc.
SideReport check_up_cross_samples(std::span<const double> samples, const LevelPair& levels,
                                  const CrossTimeOptions& opts = {});

/// Down-cross samples against the survival upper bound: flags a threshold when
/// the lower confidence limit of P{X >= s} exceeds the bound, and the mean when
/// its lower t-limit exceeds t_dc.
SideReport check_down_cross_samples(std::span<const double> samples, const LevelPair& levels,
                                    const CrossTimeOptions& opts = {});

struct CrossTimeReport {
    CheckStatus status = CheckStatus::skipped;
    std::size_t complete_loops = 0;
    SideReport up;
    SideReport down;
    std::string note;
};

/// Runs both side checks on a LoopRecord. The first up-cross (and, when the
/// path started above v1, the first down-cross) is left out since the bounds
/// hold from the first full loop onwards.
CrossTimeReport verify_cross_time_bounds(const LoopRecord& record, const LevelPair& levels,
                                         const CrossTimeOptions& opts = {});

struct EnsembleCheckOptions {
    double n_se = 3.0;              ///< standard errors (or Wilson z) of slack
    double extra_allowance = 0.0;   ///< absolute slack for discretisation bias
    std::size_t min_paths = 1000;
};

struct EnsembleReport {
    CheckStatus status = CheckStatus::skipped;
    std::size_t n_paths = 0;
    std::vector<CheckRow> rows;   ///< threshold column holds the time
    std::vector<bool> vacuous;    ///< probability check only: floor <= 0
};

/// e^{-ct} [V(x0) - c^{-1} gamma_max] + c^{-1} gamma_max
double moment_envelope(const SystemSpec& spec, double v_x0, double t);

/// 1 - moment_envelope / alpha1(r)
double probability_floor(const SystemSpec& spec, double v_x0, double r, double t);

/// Mean of V(x(t)) against the moment envelope at each snapshot time.
EnsembleReport verify_moment_bound(const EnsembleSnapshot& snap, const SystemSpec& spec,
                                   const EnsembleCheckOptions& opts = {});

/// Frequency of ||x(t)|| < r against the probability floor at each snapshot time.
EnsembleReport verify_probability_bound(const EnsembleSnapshot& snap, const SystemSpec& spec,
                                        double r, const EnsembleCheckOptions& opts = {});

}  // namespace nsslab
