#pragma once

#include <string>
#include <vector>

#include "minplus/config.hpp"
#include "minplus/filter.hpp"

namespace minplus {

enum class OracleMode { None, Grid, Riccati };

struct SimOutput {
    std::vector<Vec> truth;  // states 0..T
    std::vector<Vec> ys;     // measurements 1..T
};

// Forward simulation with seeded disturbance and measurement noise. Per
// step the generator draws the m disturbance entries, then the p noise
// entries. A configured jump (jump_step > 0) shifts the true state before
// the measurement of that step.
SimOutput simulate(const RunConfig& cfg);

void write_truth_csv(const std::string& path, const std::vector<Vec>& truth);
void write_measurements_csv(const std::string& path, const std::vector<Vec>& ys);
std::vector<Vec> read_measurements_csv(const std::string& path, int p);

struct RunOutput {
    RunResult result;
    std::vector<Vec> truth;  // empty when measurements came from a CSV file
    std::vector<Vec> ys;
    std::vector<double> rmse;  // per state dimension, when truth is known
    double total_ms = 0.0;
    std::vector<Vec> dp_estimates;  // filled when the grid oracle ran
};

// Full `run` pipeline: obtain measurements (generate or load), run the
// filter, write estimates.csv and timing.csv (plus truth/measurements when
// generated), and optionally an oracle comparison.
RunOutput run_filter(const RunConfig& cfg, OracleMode oracle, std::ostream& log);

struct StrategyTrace {
    std::vector<double> jump_dim_error;  // |estimate - truth| in the jump dimension, per step
    int recovery_step = -1;              // first step >= jump_step below threshold; -1 = never
};

struct PruneCompareReport {
    StrategyTrace cluster;
    StrategyTrace value;
    double rmse_cluster = 0.0;
    double rmse_value = 0.0;
    double threshold = 0.0;
};

// Runs the same simulated sequence through ClusterPrune and ValuePrune
// filters and reports per-step error and jump recovery for both.
PruneCompareReport compare_pruning(const RunConfig& cfg, std::ostream& log,
                                   const std::string& report_path = "");

// Runs the grid-DP reference filter (and the closed-form reference for
// linear models) on the configured scenario and reports estimate gaps.
int oracle_check(const RunConfig& cfg, std::ostream& log);

}  // namespace minplus
