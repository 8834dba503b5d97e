#pragma once

// Experiment pipeline: premise check, long trajectory, loop statistics,
// occupancy bound, ensemble moment/probability checks, and CSV/summary output.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsslab/config.hpp"
#include "nsslab/loops.hpp"
#include "nsslab/model.hpp"

namespace nsslab {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Exit status contract of the command-line tool.
enum class ExitCode : int {
    pass = 0,
    premises_unverified = 2,
    bound_flagged = 3,
    runtime_error = 4,
};

/// A pipeline stage failed; what() names the stage.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct CheckOutcome {
    std::string name;
    CheckStatus status = CheckStatus::skipped;
    std::string detail;
};

struct OccupancyRow {
    double k = 0.0;
    double q = 0.0;
    double fraction = 0.0;
    bool flag = false;
};

struct ExperimentReport {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string config_echo;
    std::vector<CheckOutcome> checks;

    ConditionReport premises;
    std::optional<LevelPair> levels;
    double t_uc = 0.0;
    double t_dc = 0.0;
    std::size_t traj_size = 0;
    std::optional<Trajectory> trajectory;   ///< kept only when a dump is requested
    LoopRecord loops;
    std::vector<double> radii;
    std::vector<double> d_empirical;
    std::vector<double> b_bound;
    CrossTimeReport cross_time;
    std::vector<OccupancyRow> occupancy;
    EnsembleReport moment;
    EnsembleReport probability;

    bool premises_ok() const { return premises.premises_ok(); }
    ExitCode exit_code() const;
    std::string verdict() const;
};

/// Full pipeline on a caller-supplied system. When the premise check fails
/// the trajectory is still simulated but no bound is compared.
ExperimentReport run_custom(const SystemSpec& spec, const ExperimentConfig& cfg);

/// Pipeline on the built-in example system; cfg.system must be "paper-example".
ExperimentReport run_paper_example(const ExperimentConfig& cfg);

/// Dispatch on cfg.system among the built-in systems.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes the CSV tables and summary.txt into cfg.output_dir.
void write_report(const ExperimentReport& report, const ExperimentConfig& cfg);

std::string summary_text(const ExperimentReport& report);

}  // namespace nsslab
