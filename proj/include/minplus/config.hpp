#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "minplus/filter.hpp"
#include "minplus/model.hpp"

namespace minplus {

/// Flat key = value run description (see README for the schema). Unknown
/// keys are rejected.
struct RunConfig {
    std::string model = "cubic_demo";
    int T = 100;
    std::uint64_t seed = 42;

    std::string noise_kind = "gaussian";  // or "uniform"
    double noise_w_std = 0.05;
    double noise_v_std = 0.5;

    std::optional<Vec> x0;     // truth initial state; model default when absent
    std::optional<Vec> xbar0;  // prior mean; defaults to x0
    double phi0 = 0.0;

    Vec window_half_width;  // broadcast from a scalar; default 1.0 per dimension
    int partitions = 8;
    int samples_per_partition = 9;

    // Per-dimension half widths, broadcasting an empty or scalar setting.
    Vec half_width_for(int state_dim) const;

    int prune_max_members = 12;
    std::string prune_strategy = "cluster";  // or "value"
    std::uint64_t prune_seed = 1;
    int prune_max_iterations = 100;
    std::string measurement_mode = "combined";  // or "split"

    std::string measurements = "generate";  // or a CSV path
    std::string out_dir = "out";

    // custom model (row-major matrices)
    std::optional<Mat> F_fwd;
    std::optional<Vec> f_fwd;
    std::optional<Mat> B;
    std::optional<Mat> C;
    std::optional<Mat> R;
    std::optional<Mat> Q_eta;
    std::optional<Mat> N0;

    // state-jump scenario for compare-pruning; jump_step = 0 disables
    int jump_step = 0;
    double jump_size = 6.0;
    int jump_dim = 2;  // 1-based state index
    double recovery_threshold = 0.0;  // 0 means one window half-width
};

RunConfig load_config(const std::string& path);

// Forward simulation model derived from the config (matrices of Eq-style
// x_{k+1} = F x_k + f + B w with output map).
struct ForwardModel {
    Mat F;
    Vec f;
    Mat B;
    bool linear_output = false;
    Mat C;  // when linear
    std::function<Vec(const Vec&)> output;
    std::vector<int> output_active;
    int n = 0, m = 0, p = 0;
};

ForwardModel forward_model(const RunConfig& cfg);

// Truth initial state: config x0 or the model default.
Vec truth_initial_state(const RunConfig& cfg);

// Filter-side model: backward dynamics from inverting the forward map,
// disturbance channel equal to the forward B.
ModelSpec filter_model(const RunConfig& cfg);

FilterConfig filter_config(const RunConfig& cfg, int state_dim);

}  // namespace minplus
