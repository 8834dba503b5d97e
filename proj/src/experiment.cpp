#include "nsslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nsslab/bounds.hpp"
#include "nsslab/errors.hpp"
#include "nsslab/rng.hpp"
#include "nsslab/sim.hpp"

namespace nsslab {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string num(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

CheckStatus flag_status(std::size_t flags) { return flags ? CheckStatus::flagged : CheckStatus::pass; }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.precision(17);
    return out;
}

}  // namespace

ExitCode ExperimentReport::exit_code() const {
    if (!premises_ok()) {
        return ExitCode::premises_unverified;
    }
    const bool flagged = std::any_of(checks.begin(), checks.end(),
                                     [](const CheckOutcome& c) { return c.status == CheckStatus::flagged; });
    return flagged ? ExitCode::bound_flagged : ExitCode::pass;
}

std::string ExperimentReport::verdict() const {
    switch (exit_code()) {
        case ExitCode::pass:
            return "pass";
        case ExitCode::premises_unverified:
            return "premises-unverified";
        case ExitCode::bound_flagged:
            return "flagged";
        case ExitCode::runtime_error:
            break;
    }
    return "error";
}

ExperimentReport run_custom(const SystemSpec& spec, const ExperimentConfig& cfg) {
    stage("config", [&] {
        cfg.validate();
        spec.validate();
        if (static_cast<int>(cfg.x0.size()) != spec.dim_state) {
            throw DimensionMismatch("simulation.x0 has " + std::to_string(cfg.x0.size()) +
                                    " entries, system dimension is " + std::to_string(spec.dim_state));
        }
        return 0;
    });

    ExperimentReport report;
    report.config_echo = to_ini(cfg);
    const std::uint64_t ensemble_seed = splitmix64(cfg.seed + 1);
    report.metadata = {
        {"toolkit_version", kToolkitVersion},
        {"rng_algorithm", std::string(kRngAlgorithm)},
        {"system", spec.name},
        {"horizon", num(cfg.horizon)},
        {"dt", num(cfg.dt)},
        {"seed", std::to_string(cfg.seed)},
        {"ensemble_seed", std::to_string(ensemble_seed)},
        {"scheme", "euler-maruyama, fixed step"},
        {"crossing_detection", cfg.interpolate ? "grid + linear interpolation" : "grid points"},
        {"note", "finite-horizon estimates of long-run quantities"},
    };

    const double window = spec.period ? *spec.period : cfg.horizon;
    report.premises = stage("premises", [&] {
        CheckOptions opts;
        opts.gamma_window = window;
        opts.gamma_points = cfg.gamma_points;
        return check_enss(spec, state_grid(spec.dim_state, cfg.premise_half_width, cfg.premise_per_dim),
                          linspace(0.0, window, cfg.premise_time_points), opts);
    });
    {
        const ConditionReport& p = report.premises;
        std::ostringstream detail;
        detail << "points=" << p.points_checked << " violations=" << p.violating_points.size()
               << " max_violation=" << num(p.max_violation) << " max_gamma=" << num(p.max_gamma_observed)
               << " gamma_max_ok=" << p.gamma_max_ok << " envelope_violations=" << p.envelope_violations
               << " class_k_ok=" << p.class_k_ok << " alpha1_inverse_ok=" << p.alpha1_inverse_ok;
        report.checks.push_back({"premises", p.premises_ok() ? CheckStatus::pass : CheckStatus::flagged,
                                 detail.str()});
    }

    SimConfig sim_cfg;
    sim_cfg.t_end = cfg.horizon;
    sim_cfg.dt = cfg.dt;
    sim_cfg.seed = cfg.seed;
    sim_cfg.x0 = Eigen::Map<const State>(cfg.x0.data(), static_cast<Eigen::Index>(cfg.x0.size()));
    const Trajectory traj = stage("simulate", [&] { return integrate(spec, sim_cfg); });
    report.traj_size = traj.size();
    report.trajectory = cfg.trajectory_stride > 0 ? std::optional<Trajectory>(traj) : std::nullopt;

    if (!report.premises_ok()) {
        for (const char* name : {"time_average", "cross_time", "occupancy", "moment_bound", "probability_bound"}) {
            report.checks.push_back({name, CheckStatus::skipped, "premises unverified"});
        }
        return report;
    }

    const LevelPair levels = stage("levels", [&] {
        return cfg.v0_policy == V0Policy::optimal_beta ? LevelPair::optimal(cfg.v1, spec.c, spec.gamma_max)
                                                       : LevelPair(cfg.v0, cfg.v1, spec.c, spec.gamma_max);
    });
    report.levels = levels;
    report.t_uc = expected_up_cross(levels);
    report.t_dc = expected_down_cross(levels);

    report.loops = stage("loops", [&] {
        return extract_loops(traj, levels.v0(), levels.v1(), CrossingOptions{cfg.interpolate});
    });

    stage("time_average", [&] {
        const double edge = spec.lyapunov.alpha1_inv(levels.noise_floor());
        report.radii = cfg.r_grid.points();
        if (!(report.radii.front() > edge)) {
            throw DomainError("grid.r_min must exceed alpha1^{-1}(gamma_max/c) = " + num(edge));
        }
        const EmpiricalDistribution d = empirical_time_average(traj, report.radii, TimeAverageMode::norm);
        report.d_empirical = d.values;
        std::size_t flags = 0;
        double min_margin = std::numeric_limits<double>::infinity();
        for (double r : report.radii) {
            report.b_bound.push_back(bound_b(r, spec.c, spec.gamma_max, spec.lyapunov.alpha1));
        }
        for (std::size_t i = 0; i < report.radii.size(); ++i) {
            const double margin = report.d_empirical[i] - report.b_bound[i];
            min_margin = std::min(min_margin, margin);
            flags += margin < 0.0 ? 1 : 0;
        }
        report.checks.push_back({"time_average", flag_status(flags),
                                 "points=" + std::to_string(report.radii.size()) +
                                     " violations=" + std::to_string(flags) + " min_margin=" + num(min_margin)});
        return 0;
    });

    report.cross_time = stage("cross_time", [&] {
        CrossTimeOptions opts;
        opts.confidence = cfg.confidence;
        opts.min_loops = cfg.min_loops;
        return verify_cross_time_bounds(report.loops, levels, opts);
    });
    {
        const CrossTimeReport& ct = report.cross_time;
        std::ostringstream detail;
        detail << "complete_loops=" << ct.complete_loops << " up_flags=" << ct.up.flags()
               << " down_flags=" << ct.down.flags() << " mean_up=" << num(ct.up.mean.mean)
               << " t_uc=" << num(report.t_uc) << " mean_down=" << num(ct.down.mean.mean)
               << " t_dc=" << num(report.t_dc);
        report.checks.push_back({"cross_time", ct.status, detail.str()});
    }

    stage("occupancy", [&] {
        std::size_t flags = 0;
        for (double k : cfg.k_list) {
            OccupancyRow row;
            row.k = k;
            row.q = fractile_q(k, spec.c, spec.gamma_max, spec.lyapunov.alpha1_inv);
            const std::vector<double> at{row.q};
            row.fraction = empirical_time_average(traj, at, TimeAverageMode::norm).values.front();
            row.flag = row.fraction < k;
            flags += row.flag ? 1 : 0;
            report.occupancy.push_back(row);
        }
        report.checks.push_back({"occupancy", flag_status(flags), "fractiles=" + std::to_string(cfg.k_list.size()) +
                                                                      " violations=" + std::to_string(flags)});
        return 0;
    });

    if (cfg.n_paths == 0) {
        report.checks.push_back({"moment_bound", CheckStatus::skipped, "n_paths=0"});
        report.checks.push_back({"probability_bound", CheckStatus::skipped, "n_paths=0"});
        return report;
    }
    stage("ensemble", [&] {
        SimConfig ens_cfg = sim_cfg;
        ens_cfg.dt = cfg.ensemble_dt;
        ens_cfg.seed = ensemble_seed;
        ens_cfg.t_end = std::max(cfg.ensemble_dt, *std::max_element(cfg.ensemble_times.begin(),
                                                                    cfg.ensemble_times.end()));
        const EnsembleSnapshot snap = ensemble_snapshots(spec, ens_cfg, cfg.n_paths, cfg.ensemble_times);
        EnsembleCheckOptions opts;
        opts.n_se = cfg.n_se;
        opts.extra_allowance = cfg.allowance;
        report.moment = verify_moment_bound(snap, spec, opts);
        report.probability = verify_probability_bound(snap, spec, cfg.radius, opts);
        report.checks.push_back({"moment_bound", report.moment.status,
                                 "paths=" + std::to_string(cfg.n_paths) +
                                     " flags=" + std::to_string(count_flags(report.moment.rows))});
        const auto vacuous = std::count(report.probability.vacuous.begin(), report.probability.vacuous.end(), true);
        report.checks.push_back({"probability_bound", report.probability.status,
                                 "paths=" + std::to_string(cfg.n_paths) + " radius=" + num(cfg.radius) +
                                     " flags=" + std::to_string(count_flags(report.probability.rows)) +
                                     " vacuous=" + std::to_string(vacuous)});
        return 0;
    });
    return report;
}

ExperimentReport run_paper_example(const ExperimentConfig& cfg) {
    if (cfg.system != "paper-example") {
        throw std::invalid_argument("run_paper_example: experiment.system must be 'paper-example'");
    }
    return run_custom(builtin_example(), cfg);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.system == "paper-example") {
        return run_paper_example(cfg);
    }
    return run_custom(stage("config", [&] { return builtin_system(cfg.system); }), cfg);
}

std::string summary_text(const ExperimentReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "nss-lab experiment summary\n\n[metadata]\n";
    for (const auto& [key, value] : report.metadata) {
        out << key << " = " << value << "\n";
    }
    out << "\n[config]\n" << report.config_echo << "\n[levels]\n";
    if (report.levels) {
        out << "v0 = " << report.levels->v0() << "\nv1 = " << report.levels->v1()
            << "\nbeta = " << report.levels->beta() << "\nt_uc = " << report.t_uc << "\nt_dc = " << report.t_dc
            << "\nratio_bound = " << occupancy_ratio(*report.levels) << "\n";
    } else {
        out << "not computed\n";
    }
    out << "\n[checks]\n";
    for (const CheckOutcome& c : report.checks) {
        out << c.name << " = " << to_string(c.status) << "  (" << c.detail << ")\n";
    }
    if (!report.cross_time.note.empty()) {
        out << "cross_time_note = " << report.cross_time.note << "\n";
    }
    out << "\n[verdict]\nverdict = " << report.verdict() << "\nexit_code = " << static_cast<int>(report.exit_code())
        << "\n";
    return out.str();
}

void write_report(const ExperimentReport& report, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);

    if (report.trajectory) {
        auto out = open_out(dir / "trajectory.csv");
        write_trajectory_csv(out, *report.trajectory, cfg.trajectory_stride);
    }
    if (!report.radii.empty()) {
        auto plot = open_out(dir / "distribution.csv");
        plot << "r,D_empirical,b_bound\n";
        std::vector<CheckRow> rows;
        for (std::size_t i = 0; i < report.radii.size(); ++i) {
            plot << report.radii[i] << ',' << report.d_empirical[i] << ',' << report.b_bound[i] << '\n';
            rows.push_back({report.radii[i], report.d_empirical[i], report.b_bound[i], report.d_empirical[i],
                            report.d_empirical[i], report.d_empirical[i] < report.b_bound[i]});
        }
        auto check = open_out(dir / "time_average_check.csv");
        write_check_csv(check, rows);
    }
    if (report.levels) {
        auto crossings = open_out(dir / "crossings.csv");
        crossings << "index,tau,grid_index,kind\n";
        for (std::size_t i = 0; i < report.loops.taus.size(); ++i) {
            const char* kind = i == 0 ? "start" : (i % 2 == 1 ? "up" : "down");
            crossings << i << ',' << report.loops.taus[i] << ',' << report.loops.tau_indices[i] << ',' << kind
                      << '\n';
        }
        auto up = open_out(dir / "up_cross_survival.csv");
        write_check_csv(up, report.cross_time.up.survival);
        auto down = open_out(dir / "down_cross_survival.csv");
        write_check_csv(down, report.cross_time.down.survival);
        auto means = open_out(dir / "cross_time_means.csv");
        means << "side,n,mean,std_error,half_width,reference,flag\n";
        for (const auto& [side, m] : {std::pair{"up", report.cross_time.up.mean},
                                      std::pair{"down", report.cross_time.down.mean}}) {
            means << side << ',' << m.n << ',' << m.mean << ',' << m.std_error << ',' << m.half_width << ','
                  << m.reference << ',' << (m.flag ? 1 : 0) << '\n';
        }
    }
    if (!report.occupancy.empty()) {
        auto occ = open_out(dir / "occupancy.csv");
        occ << "k,q_k,fraction,flag\n";
        for (const OccupancyRow& row : report.occupancy) {
            occ << row.k << ',' << row.q << ',' << row.fraction << ',' << (row.flag ? 1 : 0) << '\n';
        }
    }
    if (!report.moment.rows.empty()) {
        auto moment = open_out(dir / "moment_bound.csv");
        write_check_csv(moment, report.moment.rows);
        auto prob = open_out(dir / "probability_bound.csv");
        write_check_csv(prob, report.probability.rows);
    }
    auto summary = open_out(dir / "summary.txt");
    summary << summary_text(report);
}

}  // namespace nsslab
