#include "nsslab/loops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <utility>

#include "nsslab/errors.hpp"
#include "nsslab/stats.hpp"

namespace nsslab {

namespace {

double crossing_time(std::span<const double> lyap, std::span<const double> times, std::size_t k,
                     std::size_t from, double level, bool interpolate) {
    if (!interpolate || k == from || k == 0) {
        return times[k];
    }
    const double a = lyap[k - 1];
    const double b = lyap[k];
    const double frac = b != a ? std::clamp((level - a) / (b - a), 0.0, 1.0) : 1.0;
    return times[k - 1] + frac * (times[k] - times[k - 1]);
}

CheckStatus combine(std::size_t flags) { return flags == 0 ? CheckStatus::pass : CheckStatus::flagged; }

std::vector<double> check_grid(std::span<const double> samples, std::size_t points) {
    double s_max = 0.0;
    for (double x : samples) {
        if (std::isfinite(x)) {
            s_max = std::max(s_max, x);
        }
    }
    std::vector<double> grid(std::max<std::size_t>(points, 2));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = s_max * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    }
    return grid;
}

MeanCheck mean_check(std::span<const double> samples, double confidence, double reference) {
    MeanCheck check;
    const SampleMoments m = moments(samples);
    check.n = m.n;
    check.mean = m.mean;
    check.std_error = m.std_error();
    check.reference = reference;
    check.half_width = m.n >= 2 ? student_t_quantile(confidence, static_cast<double>(m.n - 1)) *
                                      check.std_error
                                : std::numeric_limits<double>::infinity();
    return check;
}

}  // namespace

LoopRecord extract_loops(std::span<const double> lyap, std::span<const double> times, double v0,
                         double v1, const CrossingOptions& opts) {
    if (!(v0 < v1)) {
        throw DomainError("extract_loops: need v0 < v1");
    }
    if (lyap.size() != times.size() || lyap.empty()) {
        throw std::invalid_argument("extract_loops: lyap/times must be non-empty and equal length");
    }
    LoopRecord record;
    record.horizon = times.back();
    record.taus.push_back(times.front());
    record.tau_indices.push_back(0);

    const std::size_t n = lyap.size();
    std::size_t idx = 0;
    double last_cross = times.front();
    Phase phase = Phase::in_up_phase;
    while (true) {
        std::size_t k = phase == Phase::in_up_phase ? idx : idx + 1;
        if (phase == Phase::in_up_phase) {
            while (k < n && !(lyap[k] >= v1)) {
                ++k;
            }
        } else {
            while (k < n && !(lyap[k] <= v0)) {
                ++k;
            }
        }
        if (k >= n) {
            break;
        }
        const double level = phase == Phase::in_up_phase ? v1 : v0;
        const double t = crossing_time(lyap, times, k, idx, level, opts.interpolate);
        const double duration = t - last_cross;
        record.taus.push_back(record.taus.back() + duration);
        record.tau_indices.push_back(k);
        if (phase == Phase::in_up_phase) {
            if (k == 0) {
                record.started_above = true;
            }
            record.up_times.push_back(duration);
            phase = Phase::in_down_phase;
        } else {
            record.down_times.push_back(duration);
            ++record.complete_loops;
            phase = Phase::in_up_phase;
        }
        last_cross = t;
        idx = k;
    }
    record.tail_state = phase;
    return record;
}

LoopRecord extract_loops(const Trajectory& traj, double v0, double v1, const CrossingOptions& opts) {
    return extract_loops(traj.lyap, traj.times, v0, v1, opts);
}

double up_phase_time(const LoopRecord& record) {
    double total = std::accumulate(record.up_times.begin(), record.up_times.end(), 0.0);
    if (record.tail_state == Phase::in_up_phase) {
        total += record.horizon - record.taus.back();
    }
    return total;
}

double EmpiricalDistribution::at(double s) const {
    const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), s);
    if (it == thresholds.begin()) {
        return kind == DistributionKind::survival ? 1.0 : 0.0;
    }
    return values[static_cast<std::size_t>(std::distance(thresholds.begin(), it)) - 1];
}

EmpiricalDistribution empirical_survival(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical_survival: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    EmpiricalDistribution dist;
    dist.kind = DistributionKind::survival;
    dist.n_samples = static_cast<double>(sorted.size());
    for (auto it = sorted.begin(); it != sorted.end();) {
        const auto next = std::upper_bound(it, sorted.end(), *it);
        dist.thresholds.push_back(*it);
        dist.values.push_back(static_cast<double>(std::distance(next, sorted.end())) / dist.n_samples);
        it = next;
    }
    return dist;
}

EmpiricalDistribution empirical_time_average(std::span<const double> values,
                                             std::span<const double> times, double dt,
                                             double horizon, std::span<const double> thresholds) {
    if (values.size() != times.size()) {
        throw std::invalid_argument("empirical_time_average: values/times length mismatch");
    }
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw std::invalid_argument("empirical_time_average: thresholds must be sorted");
    }
    if (!(horizon > 0.0) || !(dt > 0.0)) {
        throw DomainError("empirical_time_average: need positive horizon and dt");
    }
    std::vector<std::pair<double, double>> weighted;
    weighted.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double w = std::clamp(horizon - times[k], 0.0, dt);
        if (w > 0.0) {
            weighted.emplace_back(values[k], w);
        }
    }
    std::sort(weighted.begin(), weighted.end());
    std::vector<long double> prefix(weighted.size() + 1, 0.0L);
    for (std::size_t i = 0; i < weighted.size(); ++i) {
        prefix[i + 1] = prefix[i] + weighted[i].second;
    }

    EmpiricalDistribution dist;
    dist.kind = DistributionKind::cumulative;
    dist.n_samples = horizon;
    dist.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double r : thresholds) {
        const auto it = std::lower_bound(weighted.begin(), weighted.end(), r,
                                         [](const auto& p, double v) { return p.first < v; });
        const auto below = static_cast<std::size_t>(std::distance(weighted.begin(), it));
        dist.values.push_back(std::min(1.0, static_cast<double>(prefix[below] / horizon)));
    }
    return dist;
}

EmpiricalDistribution empirical_time_average(const Trajectory& traj, std::span<const double> thresholds,
                                             TimeAverageMode mode) {
    const std::vector<double>& series = mode == TimeAverageMode::norm ? traj.norms : traj.lyap;
    return empirical_time_average(series, traj.times, traj.dt, traj.horizon(), thresholds);
}

std::string to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::pass:
            return "pass";
        case CheckStatus::flagged:
            return "flagged";
        case CheckStatus::insufficient_data:
            return "insufficient-data";
        case CheckStatus::skipped:
            return "skipped";
    }
    return "unknown";
}

void write_check_csv(std::ostream& out, std::span<const CheckRow> rows) {
    out << "threshold,empirical,bound,ci_low,ci_high,flag\n";
    const auto old_precision = out.precision(17);
    for (const CheckRow& row : rows) {
        out << row.threshold << ',' << row.empirical << ',' << row.bound << ',' << row.ci_low << ','
            << row.ci_high << ',' << (row.flag ? 1 : 0) << '\n';
    }
    out.precision(old_precision);
}

std::size_t count_flags(std::span<const CheckRow> rows) {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return r.flag; }));
}

std::size_t SideReport::flags() const { return count_flags(survival) + (mean.flag ? 1 : 0); }

SideReport check_up_cross_samples(std::span<const double> samples, const LevelPair& levels,
                                  const CrossTimeOptions& opts) {
    SideReport report;
    if (samples.empty()) {
        report.status = CheckStatus::insufficient_data;
        return report;
    }
    const double z = normal_quantile(opts.confidence);
    const std::size_t n = samples.size();
    for (double s : check_grid(samples, opts.grid_points)) {
        const auto above = static_cast<std::size_t>(
            std::count_if(samples.begin(), samples.end(), [s](double x) { return x > s; }));
        const Interval ci = wilson_interval(above, n, z);
        CheckRow row{s, static_cast<double>(above) / static_cast<double>(n),
                     up_cross_survival_bound(s, levels), ci.low, ci.high, false};
        row.flag = row.ci_high < row.bound;
        report.survival.push_back(row);
    }
    report.mean = mean_check(samples, opts.confidence, expected_up_cross(levels));
    report.mean.flag = report.mean.mean + report.mean.half_width < report.mean.reference;
    report.status = n < opts.min_loops ? CheckStatus::insufficient_data : combine(report.flags());
    return report;
}

SideReport check_down_cross_samples(std::span<const double> samples, const LevelPair& levels,
                                    const CrossTimeOptions& opts) {
    SideReport report;
    if (samples.empty()) {
        report.status = CheckStatus::insufficient_data;
        return report;
    }
    const double z = normal_quantile(opts.confidence);
    const std::size_t n = samples.size();
    for (double s : check_grid(samples, opts.grid_points)) {
        const auto at_least = static_cast<std::size_t>(
            std::count_if(samples.begin(), samples.end(), [s](double x) { return x >= s; }));
        const Interval ci = wilson_interval(at_least, n, z);
        CheckRow row{s, static_cast<double>(at_least) / static_cast<double>(n),
                     down_cross_survival_bound(s, levels), ci.low, ci.high, false};
        row.flag = row.ci_low > row.bound;
        report.survival.push_back(row);
    }
    report.mean = mean_check(samples, opts.confidence, expected_down_cross(levels));
    report.mean.flag = report.mean.mean - report.mean.half_width > report.mean.reference;
    report.status = n < opts.min_loops ? CheckStatus::insufficient_data : combine(report.flags());
    return report;
}

CrossTimeReport verify_cross_time_bounds(const LoopRecord& record, const LevelPair& levels,
                                         const CrossTimeOptions& opts) {
    CrossTimeReport report;
    report.complete_loops = record.complete_loops;

    std::span<const double> ups(record.up_times);
    ups = ups.empty() ? ups : ups.subspan(1);
    std::span<const double> downs(record.down_times);
    if (record.started_above && !downs.empty()) {
        downs = downs.subspan(1);
    }
    CrossTimeOptions side_opts = opts;
    side_opts.min_loops = 1;
    report.up = check_up_cross_samples(ups, levels, side_opts);
    report.down = check_down_cross_samples(downs, levels, side_opts);
    report.note = "crossings detected on the sampling grid; each duration carries at most one "
                  "step of delay";

    if (record.complete_loops < opts.min_loops) {
        report.status = CheckStatus::insufficient_data;
        report.note += "; fewer than " + std::to_string(opts.min_loops) +
                       " complete loops, check underpowered";
    } else {
        report.status = combine(report.up.flags() + report.down.flags());
    }
    return report;
}

double moment_envelope(const SystemSpec& spec, double v_x0, double t) {
    const double floor = spec.gamma_max / spec.c;
    return std::exp(-spec.c * t) * (v_x0 - floor) + floor;
}

double probability_floor(const SystemSpec& spec, double v_x0, double r, double t) {
    const double a = spec.lyapunov.alpha1(r);
    if (!(a > 0.0)) {
        throw DomainError("probability_floor: alpha1(r) must be positive");
    }
    return 1.0 - moment_envelope(spec, v_x0, t) / a;
}

EnsembleReport verify_moment_bound(const EnsembleSnapshot& snap, const SystemSpec& spec,
                                   const EnsembleCheckOptions& opts) {
    EnsembleReport report;
    report.n_paths = snap.n_paths();
    const double v_x0 = spec.lyapunov.v(snap.x0);
    for (std::size_t j = 0; j < snap.times.size(); ++j) {
        const SampleMoments m = moments(snap.lyap[j]);
        const double slack = opts.n_se * m.std_error();
        CheckRow row{snap.times[j], m.mean, moment_envelope(spec, v_x0, snap.times[j]),
                     m.mean - slack, m.mean + slack, false};
        row.flag = m.mean > row.bound + slack + opts.extra_allowance;
        report.rows.push_back(row);
        report.vacuous.push_back(false);
    }
    report.status = report.n_paths < opts.min_paths ? CheckStatus::insufficient_data
                                                    : combine(count_flags(report.rows));
    return report;
}

EnsembleReport verify_probability_bound(const EnsembleSnapshot& snap, const SystemSpec& spec,
                                        double r, const EnsembleCheckOptions& opts) {
    if (!(r > 0.0)) {
        throw DomainError("verify_probability_bound: r must be positive");
    }
    EnsembleReport report;
    report.n_paths = snap.n_paths();
    const double v_x0 = spec.lyapunov.v(snap.x0);
    for (std::size_t j = 0; j < snap.times.size(); ++j) {
        const Matrix& states = snap.states[j];
        std::size_t inside = 0;
        for (Eigen::Index i = 0; i < states.cols(); ++i) {
            if (states.col(i).norm() < r) {
                ++inside;
            }
        }
        const std::size_t n = static_cast<std::size_t>(states.cols());
        const Interval ci = wilson_interval(inside, n, opts.n_se);
        const double floor = probability_floor(spec, v_x0, r, snap.times[j]);
        CheckRow row{snap.times[j], n ? static_cast<double>(inside) / static_cast<double>(n) : 0.0,
                     floor, ci.low, ci.high, false};
        row.flag = ci.high < floor - opts.extra_allowance;
        report.rows.push_back(row);
        report.vacuous.push_back(floor <= 0.0);
    }
    report.status = report.n_paths < opts.min_paths ? CheckStatus::insufficient_data
                                                    : combine(count_flags(report.rows));
    return report;
}

}  // namespace nsslab
