// nss-lab: command-line front end for the experiment pipeline.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsslab/bounds.hpp"
#include "nsslab/config.hpp"
#include "nsslab/experiment.hpp"

namespace {

int run_and_report(const nsslab::ExperimentConfig& cfg) {
    const nsslab::ExperimentReport report = nsslab::run_experiment(cfg);
    nsslab::write_report(report, cfg);
    std::cout << nsslab::summary_text(report);
    return static_cast<int>(report.exit_code());
}

void print_bounds(const nsslab::LevelPair& levels) {
    std::printf("v0          = %.12g\n", levels.v0());
    std::printf("v1          = %.12g\n", levels.v1());
    std::printf("floor       = %.12g\n", levels.noise_floor());
    std::printf("beta        = %.12g\n", levels.beta());
    std::printf("t_uc        = %.12g\n", nsslab::expected_up_cross(levels));
    std::printf("t_dc        = %.12g\n", nsslab::expected_down_cross(levels));
    std::printf("ratio_bound = %.12g\n", nsslab::occupancy_ratio(levels));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nss-lab: occupancy and crossing-time bounds for noise-to-state stable SDEs"};
    app.set_version_flag("--version", std::string(nsslab::kToolkitVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
    run->add_option("--config", config_path, "Configuration file")->required();
    run->add_option("--set", overrides, "Override, section.key=value (repeatable)");

    std::string output_dir;
    std::vector<std::string> example_overrides;
    auto* example = app.add_subcommand("example", "Run the built-in two-dimensional example with defaults");
    example->add_option("--output-dir", output_dir, "Output directory");
    example->add_option("--set", example_overrides, "Override, section.key=value (repeatable)");

    double c = 0.0;
    double gamma_max = 0.0;
    double v1 = 0.0;
    std::optional<double> v0;
    bool optimal = false;
    auto* bounds = app.add_subcommand("bounds", "Print crossing-time and occupancy bounds for a level pair");
    bounds->add_option("--c", c, "Dissipation rate c")->required();
    bounds->add_option("--gamma-max", gamma_max, "Noise gain bound gamma_max")->required();
    bounds->add_option("--v1", v1, "Upper level v1")->required();
    auto* v0_opt = bounds->add_option("--v0", v0, "Lower level v0");
    auto* opt_flag = bounds->add_flag("--optimal", optimal, "Place v0 at the optimal ratio");
    v0_opt->excludes(opt_flag);
    opt_flag->excludes(v0_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(nsslab::ExitCode::runtime_error);
    }

    try {
        if (*run) {
            return run_and_report(nsslab::load_config(config_path, overrides));
        }
        if (*example) {
            nsslab::ExperimentConfig cfg = nsslab::parse_config("", example_overrides);
            if (!output_dir.empty()) {
                cfg.output_dir = output_dir;
            }
            return run_and_report(cfg);
        }
        if (*bounds) {
            if (!v0 && !optimal) {
                std::cerr << "bounds: one of --v0 or --optimal is required\n";
                return static_cast<int>(nsslab::ExitCode::runtime_error);
            }
            print_bounds(optimal ? nsslab::LevelPair::optimal(v1, c, gamma_max)
                                 : nsslab::LevelPair(*v0, v1, c, gamma_max));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return static_cast<int>(nsslab::ExitCode::runtime_error);
}
