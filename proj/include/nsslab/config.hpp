#pragma once

// Experiment configuration: a sectioned key = value file plus
// `section.key=value` overrides. See docs/config.md for the grammar.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nsslab {

enum class V0Policy { optimal_beta, explicit_value };
enum class GridSpacing { linear, log };

struct RadiusGrid {
    double min = 1.05;
    double max = 10.0;
    std::size_t count = 50;
    GridSpacing spacing = GridSpacing::log;

    std::vector<double> points() const;
};

struct ExperimentConfig {
    // [experiment]
    std::string system = "paper-example";
    std::uint64_t seed = 20261016;
    std::filesystem::path output_dir = "nss-lab-out";
    // [simulation]
    double horizon = 500.0;
    double dt = 1e-3;
    std::vector<double> x0 = {0.0, 0.0};
    // [levels]
    double v1 = 2.0;
    V0Policy v0_policy = V0Policy::optimal_beta;
    double v0 = 0.0;   ///< used with V0Policy::explicit_value
    bool interpolate = false;
    double confidence = 0.99;
    std::size_t min_loops = 30;
    // [grid]
    RadiusGrid r_grid;
    // [fractiles]
    std::vector<double> k_list = {1.0 / 3.0};
    // [ensemble]
    std::size_t n_paths = 10000;
    double ensemble_dt = 1e-3;
    std::vector<double> ensemble_times = {1.0, 2.5, 5.0};
    double radius = 3.0;
    double n_se = 3.0;
    double allowance = 0.0;
    // [premises]
    double premise_half_width = 3.0;
    int premise_per_dim = 10;
    std::size_t premise_time_points = 10;
    std::size_t gamma_points = 10000;
    // [output]
    std::size_t trajectory_stride = 0;   ///< 0: no trajectory.csv

    /// Throws std::invalid_argument on inconsistent values.
    void validate() const;
};

/// Parses configuration text; `overrides` are "section.key=value" strings
/// applied after the file. Unknown sections or keys are rejected.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(to_ini(c)) reproduces c exactly.
std::string to_ini(const ExperimentConfig& cfg);

}  // namespace nsslab
