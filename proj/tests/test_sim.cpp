#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "nsslab/errors.hpp"
#include "nsslab/rng.hpp"
#include "nsslab/sim.hpp"
#include "nsslab/stats.hpp"

using namespace nsslab;

namespace {

State scalar(double x) { return State::Constant(1, x); }

SimConfig config(double t_end, double dt, std::uint64_t seed, State x0) {
    SimConfig cfg;
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.seed = seed;
    cfg.x0 = std::move(x0);
    return cfg;
}

SystemSpec no_noise(SystemSpec spec) {
    const auto rows = spec.dim_state;
    const auto cols = spec.dim_noise;
    spec.diffusion = [rows, cols](const State&) { return Matrix(Matrix::Zero(rows, cols)); };
    return spec;
}

std::vector<double> final_values(const std::vector<Trajectory>& paths) {
    std::vector<double> out;
    for (const auto& p : paths) {
        out.push_back(p.states(0, p.states.cols() - 1));
    }
    return out;
}

}  // namespace

TEST(SimConfig, Grid) {
    const SimConfig cfg = config(1.0, 0.1, 0, scalar(0.0));
    EXPECT_EQ(cfg.steps(), 10u);
    EXPECT_EQ(cfg.time_at(10), 1.0);
    EXPECT_EQ(config(1.0, 0.3, 0, scalar(0)).steps(), 4u);
    EXPECT_EQ(config(1.0, 0.3, 0, scalar(0)).time_at(4), 1.0);
    EXPECT_THROW(config(1.0, 0.0, 0, scalar(0)).validate(), DomainError);
    EXPECT_THROW(config(1.0, 2.0, 0, scalar(0)).validate(), DomainError);
}

TEST(Integrate, DeterministicEulerStep) {
    const SystemSpec spec = no_noise(ornstein_uhlenbeck(1.0, 1.0));
    const Trajectory traj = integrate(spec, config(0.1, 0.1, 7, scalar(1.0)));
    ASSERT_EQ(traj.size(), 2u);
    EXPECT_DOUBLE_EQ(traj.states(0, 1), 0.9);
    EXPECT_DOUBLE_EQ(traj.lyap[1], 0.405);
    EXPECT_DOUBLE_EQ(traj.norms[1], 0.9);
}

TEST(Integrate, ConstantWithoutDriftOrNoise) {
    SystemSpec spec = no_noise(builtin_example());
    spec.drift = [](const State& x) { return State(State::Zero(x.size())); };
    State x0(2);
    x0 << 2.0, 3.0;
    const Trajectory traj = integrate(spec, config(3.0, 0.01, 1, x0));
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) {
        EXPECT_EQ(traj.states(0, k), 2.0);
        EXPECT_EQ(traj.states(1, k), 3.0);
    }
}

TEST(Integrate, RejectsBadInput) {
    const SystemSpec spec = builtin_example();
    EXPECT_THROW(integrate(spec, config(1.0, 0.1, 0, scalar(0.0))), DimensionMismatch);
    SystemSpec blowup = no_noise(ornstein_uhlenbeck());
    blowup.drift = [](const State& x) { return State(x.array().square() * 10.0); };
    try {
        integrate(blowup, config(100.0, 0.1, 0, scalar(1.0)));
        FAIL() << "expected NonFiniteState";
    } catch (const NonFiniteState& e) {
        EXPECT_GT(e.step(), 0u);
        EXPECT_GT(e.time(), 0.0);
    }
}

TEST(Integrate, SameSeedSamePath) {
    const SystemSpec spec = builtin_example();
    State x0 = State::Zero(2);
    const Trajectory a = integrate(spec, config(2.0, 1e-3, 42, x0));
    const Trajectory b = integrate(spec, config(2.0, 1e-3, 42, x0));
    const Trajectory c = integrate(spec, config(2.0, 1e-3, 43, x0));
    EXPECT_EQ(a.states, b.states);
    EXPECT_NE(a.states, c.states);
}

TEST(Integrate, IncrementsAreGaussian) {
    // Pure noise dx = dW: increments / sqrt(dt) should be N(0, 1).
    SystemSpec spec = ornstein_uhlenbeck(1.0, 1.0);
    spec.drift = [](const State& x) { return State(State::Zero(x.size())); };
    const double dt = 1e-2;
    const Trajectory traj = integrate(spec, config(1000.0, dt, 11, scalar(0.0)));
    std::vector<double> z;
    for (Eigen::Index k = 1; k < traj.states.cols(); ++k) {
        z.push_back((traj.states(0, k) - traj.states(0, k - 1)) / std::sqrt(dt));
    }
    const SampleMoments m = moments(z);
    EXPECT_NEAR(m.mean, 0.0, 4.0 / std::sqrt(static_cast<double>(z.size())));
    EXPECT_NEAR(m.variance, 1.0, 4.0 * std::sqrt(2.0 / static_cast<double>(z.size())));
    EXPECT_NEAR(sample_kurtosis(z), 3.0, 4.0 * std::sqrt(24.0 / static_cast<double>(z.size())));
    EXPECT_NEAR(lag1_correlation(z), 0.0, 4.0 / std::sqrt(static_cast<double>(z.size())));
    const double d = ks_statistic(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    EXPECT_GT(ks_pvalue(d, z.size()), 0.01);
}

TEST(Ensemble, OrnsteinUhlenbeckVariance) {
    const SystemSpec spec = ornstein_uhlenbeck(1.0, 1.0);
    const auto paths = ensemble(spec, config(5.0, 1e-3, 2024, scalar(0.0)), 10000);
    const auto xs = final_values(paths);
    const SampleMoments m = moments(xs);
    const double expected = 0.5 * (1.0 - std::exp(-10.0));
    const double se = m.variance * std::sqrt(2.0 / static_cast<double>(xs.size()));
    EXPECT_NEAR(m.variance, expected, 3.0 * se);
}

TEST(Ensemble, OrnsteinUhlenbeckMean) {
    const SystemSpec spec = ornstein_uhlenbeck(1.0, 1.0);
    const auto paths = ensemble(spec, config(1.0, 1e-3, 99, scalar(1.0)), 10000);
    const SampleMoments m = moments(final_values(paths));
    EXPECT_NEAR(m.mean, std::exp(-1.0), 3.0 * m.std_error());
}

TEST(Ensemble, WeakOrderOne) {
    // Mean error of E[X_1] for OU from x0 = 1 is exactly |(1 - dt)^{1/dt} - e^{-1}|,
    // which halves with dt.
    const SystemSpec spec = no_noise(ornstein_uhlenbeck(1.0, 1.0));
    double prev = 0.0;
    for (double dt : {0.1, 0.05, 0.025}) {
        const Trajectory t = integrate(spec, config(1.0, dt, 0, scalar(1.0)));
        const double err = std::abs(t.states(0, t.states.cols() - 1) - std::exp(-1.0));
        EXPECT_NEAR(t.states(0, t.states.cols() - 1), std::pow(1.0 - dt, std::round(1.0 / dt)), 1e-12);
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 2.0, 0.15);
        }
        prev = err;
    }
}

TEST(Ensemble, DeterministicAndDistinctPaths) {
    const SystemSpec spec = builtin_example();
    const SimConfig cfg = config(1.0, 1e-2, 5, State::Zero(2));
    const auto a = ensemble(spec, cfg, 8, 1);
    const auto b = ensemble(spec, cfg, 8, 4);
    ASSERT_EQ(a.size(), 8u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].states, b[i].states);
    }
    EXPECT_NE(a[0].states, a[1].states);
    EXPECT_EQ(a[3].states, integrate(spec, cfg, 3).states);
}

TEST(Ensemble, SnapshotsMatchFullPaths) {
    const SystemSpec spec = builtin_example();
    const SimConfig cfg = config(2.0, 1e-2, 5, State::Zero(2));
    const auto full = ensemble(spec, cfg, 6);
    const EnsembleSnapshot snap = ensemble_snapshots(spec, cfg, 6, {0.5, 2.0}, 3);
    ASSERT_EQ(snap.n_paths(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(snap.states[0].col(static_cast<Eigen::Index>(i)), full[i].states.col(50));
        EXPECT_EQ(snap.states[1].col(static_cast<Eigen::Index>(i)), full[i].states.col(200));
        EXPECT_EQ(snap.lyap[1][i], full[i].lyap[200]);
    }
    EXPECT_THROW(ensemble_snapshots(spec, cfg, 6, {0.505}), DomainError);
}

TEST(Rng, Substreams) {
    EXPECT_NE(substream_seed(1, 0), substream_seed(1, 1));
    EXPECT_NE(substream_seed(1, 0), substream_seed(2, 0));
    Engine e = make_engine(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = open_uniform(e);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(TrajectoryCsv, Format) {
    const SystemSpec spec = no_noise(ornstein_uhlenbeck(1.0, 1.0));
    const Trajectory traj = integrate(spec, config(0.3, 0.1, 0, scalar(1.0)));
    std::ostringstream out;
    write_trajectory_csv(out, traj, 2);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x1,V,norm");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 3);   // k = 0, 2 and the final point
}
