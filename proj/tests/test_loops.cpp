#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nsslab/bounds.hpp"
#include "nsslab/errors.hpp"
#include "nsslab/loops.hpp"
#include "nsslab/rng.hpp"
#include "nsslab/sim.hpp"
#include "nsslab/slln.hpp"

using namespace nsslab;

namespace {

std::vector<double> unit_times(std::size_t n) {
    std::vector<double> t(n);
    std::iota(t.begin(), t.end(), 0.0);
    return t;
}

// Straightforward state machine over grid indices.
std::vector<std::size_t> brute_force_crossings(const std::vector<double>& v, double v0, double v1) {
    std::vector<std::size_t> out{0};
    bool looking_up = true;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (looking_up && v[k] >= v1) {
            out.push_back(k);
            looking_up = false;
        } else if (!looking_up && k > out.back() && v[k] <= v0) {
            out.push_back(k);
            looking_up = true;
        }
    }
    return out;
}

std::vector<double> draws(const DominatingLaw& law, std::size_t n, std::uint64_t seed) {
    Engine e = make_engine(seed);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(inverse_cdf_inf(open_uniform(e), law));
    }
    return out;
}

Trajectory constant_trajectory(double x, std::size_t n, double dt) {
    Trajectory t;
    t.dt = dt;
    t.states = Matrix::Constant(1, static_cast<Eigen::Index>(n), x);
    for (std::size_t k = 0; k < n; ++k) {
        t.times.push_back(static_cast<double>(k) * dt);
        t.lyap.push_back(0.5 * x * x);
        t.norms.push_back(std::abs(x));
    }
    return t;
}

}  // namespace

TEST(ExtractLoops, NinePointSeries) {
    const std::vector<double> lyap{0.5, 1.2, 2.1, 1.5, 0.9, 0.4, 1.0, 2.5, 0.3};
    const LoopRecord r = extract_loops(lyap, unit_times(lyap.size()), 0.5, 2.0);
    EXPECT_EQ(r.taus, (std::vector<double>{0, 2, 5, 7, 8}));
    EXPECT_EQ(r.up_times, (std::vector<double>{2, 2}));
    EXPECT_EQ(r.down_times, (std::vector<double>{3, 1}));
    EXPECT_EQ(r.complete_loops, 2u);
    EXPECT_EQ(r.tail_state, Phase::in_up_phase);
    EXPECT_FALSE(r.started_above);
    EXPECT_DOUBLE_EQ(up_phase_time(r), 4.0);
}

TEST(ExtractLoops, NeverCrosses) {
    const std::vector<double> lyap(50, 0.1);
    const LoopRecord r = extract_loops(lyap, unit_times(lyap.size()), 0.5, 2.0);
    EXPECT_EQ(r.taus, std::vector<double>{0.0});
    EXPECT_EQ(r.complete_loops, 0u);
    EXPECT_EQ(r.tail_state, Phase::in_up_phase);
    EXPECT_DOUBLE_EQ(up_phase_time(r), 49.0);
}

TEST(ExtractLoops, StartAboveUpperLevel) {
    const std::vector<double> lyap{3.0, 2.5, 0.2, 2.2};
    const LoopRecord r = extract_loops(lyap, unit_times(4), 0.5, 2.0);
    EXPECT_TRUE(r.started_above);
    EXPECT_EQ(r.taus, (std::vector<double>{0, 0, 2, 3}));
    EXPECT_EQ(r.tail_state, Phase::in_down_phase);
}

TEST(ExtractLoops, MonotoneDecreasingMatchesBruteForce) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> step(0.0, 0.2);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> lyap{3.0 + step(gen)};
        for (int k = 0; k < 40; ++k) {
            lyap.push_back(lyap.back() - step(gen));
        }
        const LoopRecord r = extract_loops(lyap, unit_times(lyap.size()), 0.5, 2.0);
        EXPECT_EQ(r.tau_indices, brute_force_crossings(lyap, 0.5, 2.0));
    }
}

TEST(ExtractLoops, RandomWalkMatchesBruteForce) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> step(0.0, 0.3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> lyap{1.0};
        for (int k = 0; k < 2000; ++k) {
            lyap.push_back(std::abs(lyap.back() + step(gen)));
        }
        const LoopRecord r = extract_loops(lyap, unit_times(lyap.size()), 0.5, 2.0);
        EXPECT_EQ(r.tau_indices, brute_force_crossings(lyap, 0.5, 2.0));
        // Durations add up to the crossing times exactly.
        double t = 0.0;
        for (std::size_t i = 0; i < r.up_times.size(); ++i) {
            t += r.up_times[i];
            EXPECT_EQ(t, r.taus[2 * i + 1]);
            if (i < r.down_times.size()) {
                t += r.down_times[i];
                EXPECT_EQ(t, r.taus[2 * i + 2]);
            }
        }
        for (std::size_t i = 1; i < r.tau_indices.size(); ++i) {
            const double v = lyap[r.tau_indices[i]];
            if (i % 2 == 1) {
                EXPECT_GE(v, 2.0);
            } else {
                EXPECT_LE(v, 0.5);
            }
        }
    }
}

TEST(ExtractLoops, Interpolation) {
    const std::vector<double> lyap{0.0, 1.0, 3.0, 1.0, 0.0};
    const LoopRecord r = extract_loops(lyap, unit_times(5), 0.5, 2.0, CrossingOptions{true});
    ASSERT_EQ(r.taus.size(), 3u);
    EXPECT_DOUBLE_EQ(r.taus[1], 1.5);
    EXPECT_DOUBLE_EQ(r.taus[2], 3.5);
}

TEST(ExtractLoops, Validation) {
    const std::vector<double> lyap{1.0, 2.0};
    EXPECT_THROW(extract_loops(lyap, unit_times(2), 2.0, 1.0), DomainError);
    EXPECT_THROW(extract_loops(lyap, unit_times(3), 0.5, 1.0), std::invalid_argument);
}

TEST(EmpiricalSurvival, Examples) {
    const std::vector<double> a{1, 2, 3};
    EXPECT_DOUBLE_EQ(empirical_survival(a).at(1.5), 2.0 / 3.0);
    const std::vector<double> b{5};
    EXPECT_DOUBLE_EQ(empirical_survival(b).at(4.0), 1.0);
    EXPECT_DOUBLE_EQ(empirical_survival(b).at(5.0), 0.0);
}

TEST(EmpiricalSurvival, Exponential) {
    std::mt19937_64 gen(1);
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> xs(100000);
    for (double& x : xs) {
        x = exp1(gen);
    }
    EXPECT_NEAR(empirical_survival(xs).at(1.0), std::exp(-1.0), 0.005);
}

TEST(TimeAverage, Examples) {
    const std::vector<double> norms{1, 3, 1, 3};
    const std::vector<double> r{2.0};
    EXPECT_DOUBLE_EQ(empirical_time_average(norms, unit_times(4), 1.0, 4.0, r).values[0], 0.5);

    const Trajectory zero = constant_trajectory(0.0, 101, 0.01);
    const std::vector<double> grid{1e-6, 0.5, 10.0};
    for (double d : empirical_time_average(zero, grid, TimeAverageMode::norm).values) {
        EXPECT_DOUBLE_EQ(d, 1.0);
    }
    const std::vector<double> unsorted{2.0, 1.0};
    EXPECT_THROW(empirical_time_average(zero, unsorted, TimeAverageMode::norm), std::invalid_argument);
}

TEST(TimeAverage, LyapunovMode) {
    const Trajectory t = constant_trajectory(2.0, 11, 0.1);   // V = 2
    const std::vector<double> grid{1.5, 2.5};
    const auto d = empirical_time_average(t, grid, TimeAverageMode::lyapunov);
    EXPECT_DOUBLE_EQ(d.values[0], 0.0);
    EXPECT_DOUBLE_EQ(d.values[1], 1.0);
}

TEST(CrossTime, SyntheticDrawsFromDominatingLaws) {
    const LevelPair lv = LevelPair::optimal(2.0, 1.0, 0.5);
    const auto ups = draws(DominatingLaw::up_cross(lv), 400, 31);
    const auto downs = draws(DominatingLaw::down_cross(lv), 400, 32);
    const SideReport up = check_up_cross_samples(ups, lv);
    const SideReport down = check_down_cross_samples(downs, lv);
    EXPECT_EQ(up.flags(), 0u);
    EXPECT_EQ(down.flags(), 0u);
    EXPECT_EQ(up.status, CheckStatus::pass);
    EXPECT_EQ(down.status, CheckStatus::pass);
    EXPECT_NEAR(up.mean.reference, expected_up_cross(lv), 1e-15);
}

TEST(CrossTime, TooShortUpCrossesAreFlagged) {
    const LevelPair lv = LevelPair::optimal(2.0, 1.0, 0.5);
    const std::vector<double> ups(200, 0.01);
    const SideReport up = check_up_cross_samples(ups, lv);
    EXPECT_GT(up.flags(), 0u);
    EXPECT_TRUE(up.mean.flag);
    EXPECT_EQ(up.status, CheckStatus::flagged);
}

TEST(CrossTime, TooLongDownCrossesAreFlagged) {
    const LevelPair lv = LevelPair::optimal(2.0, 1.0, 0.5);
    const std::vector<double> downs(200, 50.0);
    const SideReport down = check_down_cross_samples(downs, lv);
    EXPECT_GT(down.flags(), 0u);
    EXPECT_TRUE(down.mean.flag);
}

TEST(CrossTime, FewLoopsIsInsufficient) {
    const std::vector<double> lyap{0.5, 1.2, 2.1, 1.5, 0.9, 0.4, 1.0, 2.5, 0.3};
    const LoopRecord r = extract_loops(lyap, unit_times(lyap.size()), 0.6, 2.0);
    const CrossTimeReport rep = verify_cross_time_bounds(r, LevelPair(0.6, 2.0, 1.0, 0.5));
    EXPECT_EQ(rep.status, CheckStatus::insufficient_data);
}

TEST(CrossTime, SimulatedBuiltinExample) {
    const SystemSpec spec = builtin_example();
    SimConfig cfg;
    cfg.t_end = 500.0;
    cfg.dt = 1e-3;
    cfg.seed = 20261016;
    cfg.x0 = State::Zero(2);
    const Trajectory traj = integrate(spec, cfg);
    const LevelPair lv = LevelPair::optimal(2.0, 1.0, 0.5);
    const LoopRecord r = extract_loops(traj, lv.v0(), lv.v1());
    const CrossTimeReport rep = verify_cross_time_bounds(r, lv);
    EXPECT_GE(r.complete_loops, 30u);
    EXPECT_EQ(rep.up.flags(), 0u);
    EXPECT_EQ(rep.down.flags(), 0u);
    EXPECT_EQ(rep.status, CheckStatus::pass);

    // The up-cross times, each followed by a return, couple below the dominating law.
    const std::vector<double> ups(r.up_times.begin() + 1, r.up_times.end());
    // Their empirical law stands in for the conditional law of each draw.
    std::vector<double> sorted = ups;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const ConditionalCdf g = ConditionalCdf::iid(
        [&](double s) { return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin()) / n; },
        [&](double s) { return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), s) - sorted.begin()) / n; });
    EXPECT_NO_THROW(dominated_coupling_lower(ups, g, DominatingLaw::up_cross(lv), 77));
}

TEST(CheckCsv, Format) {
    std::vector<CheckRow> rows{{1.0, 0.5, 0.25, 0.4, 0.6, false}, {2.0, 0.1, 0.2, 0.05, 0.15, true}};
    std::ostringstream out;
    write_check_csv(out, rows);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "threshold,empirical,bound,ci_low,ci_high,flag");
    EXPECT_EQ(count_flags(rows), 1u);
    EXPECT_EQ(to_string(CheckStatus::insufficient_data), "insufficient-data");
}

class EnsembleBounds : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        SimConfig cfg;
        cfg.t_end = 5.0;
        cfg.dt = 1e-3;
        cfg.seed = 8;
        cfg.x0 = State::Zero(2);
        snap_ = new EnsembleSnapshot(ensemble_snapshots(builtin_example(), cfg, 10000, {1.0, 2.5, 5.0}));
    }
    static void TearDownTestSuite() { delete snap_; }
    static EnsembleSnapshot* snap_;
};
EnsembleSnapshot* EnsembleBounds::snap_ = nullptr;

TEST_F(EnsembleBounds, Moment) {
    const SystemSpec spec = builtin_example();
    EXPECT_NEAR(moment_envelope(spec, 0.0, 5.0), 0.496631026500457266, 1e-15);
    EXPECT_DOUBLE_EQ(moment_envelope(spec, 1.7, 0.0), 1.7);
    const EnsembleReport rep = verify_moment_bound(*snap_, spec);
    EXPECT_EQ(rep.status, CheckStatus::pass);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_EQ(rep.rows[2].threshold, 5.0);
}

TEST_F(EnsembleBounds, Probability) {
    const SystemSpec spec = builtin_example();
    EXPECT_NEAR(probability_floor(spec, 0.0, 3.0, 5.0), 0.889637549666565052, 1e-15);
    const EnsembleReport rep = verify_probability_bound(*snap_, spec, 3.0);
    EXPECT_EQ(rep.status, CheckStatus::pass);
    EXPECT_FALSE(rep.vacuous[2]);

    const EnsembleReport small = verify_probability_bound(*snap_, spec, 0.5);
    EXPECT_TRUE(small.vacuous[2]);
    EXPECT_EQ(small.status, CheckStatus::pass);

    const EnsembleReport huge = verify_probability_bound(*snap_, spec, 1e6);
    EXPECT_NEAR(huge.rows[2].bound, 1.0, 1e-12);
    EXPECT_EQ(huge.rows[2].empirical, 1.0);
}

TEST(EnsembleBoundsDeterministic, Contraction) {
    // dx = -x dt, V = x^2/2: c = 2, gamma_max = 0, V(x(t)) = e^{-2t} V(x0) exactly.
    SystemSpec spec = ornstein_uhlenbeck(1.0, 0.0);
    SimConfig cfg;
    cfg.t_end = 2.0;
    cfg.dt = 1e-3;
    cfg.x0 = State::Constant(1, 1.5);
    const EnsembleSnapshot snap = ensemble_snapshots(spec, cfg, 4, {0.5, 1.0, 2.0});
    EnsembleCheckOptions opts;
    opts.min_paths = 1;
    const EnsembleReport rep = verify_moment_bound(snap, spec, opts);
    EXPECT_EQ(rep.status, CheckStatus::pass);
    for (const CheckRow& row : rep.rows) {
        EXPECT_NEAR(row.bound, std::exp(-2.0 * row.threshold) * 1.125, 1e-15);
        EXPECT_LE(row.empirical, row.bound);
    }
}

TEST(EnsembleBoundsDeterministic, SmallEnsembleIsInsufficient) {
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.dt = 1e-2;
    cfg.x0 = State::Zero(2);
    const EnsembleSnapshot snap = ensemble_snapshots(builtin_example(), cfg, 10, {1.0});
    EXPECT_EQ(verify_moment_bound(snap, builtin_example()).status, CheckStatus::insufficient_data);
}
