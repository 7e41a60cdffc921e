#pragma once

#include <vector>

#include "minplus/model.hpp"
#include "minplus/propagator.hpp"
#include "minplus/pruner.hpp"
#include "minplus/quadform.hpp"
#include "minplus/window.hpp"

namespace minplus {

struct FilterConfig {
    Vec window_half_width;  // per state dimension
    int partitions = 8;
    int samples_per_partition = 9;
    PruneConfig prune;
    MeasurementMode measurement_mode = MeasurementMode::Combined;

    Window window_at(const Vec& center) const {
        return Window(center, window_half_width, partitions, samples_per_partition);
    }
};

/// Value set, estimate and window after `step` measurements. Immutable;
/// update() produces the successor state.
struct FilterState {
    int step = 0;
    QuadSet value;
    Vec estimate;
    Window window;
};

FilterState init(const ModelSpec& m, const FilterConfig& cfg);

struct UpdateResult {
    FilterState state;
    int card_pre = 0;   // members after propagation, before pruning
    int card_post = 0;  // members retained after pruning
};

// One measurement step: propagate over the current window, extract the
// estimate as the best windowed argmin over ALL unpruned members, prune,
// then recenter the window at the new estimate.
UpdateResult update_full(const FilterState& st, const Vec& y, const ModelSpec& m,
                         const FilterConfig& cfg);

FilterState update(const FilterState& st, const Vec& y, const ModelSpec& m,
                   const FilterConfig& cfg);

struct StepRecord {
    Vec estimate;
    int card_pre = 0;
    int card_post = 0;
    double step_ms = 0.0;
};

struct RunResult {
    Vec initial_estimate;
    std::vector<StepRecord> steps;  // one per measurement
};

// Folds update over the measurement sequence. Any step failure is rethrown
// as StepError carrying the 1-based step index.
RunResult run(const ModelSpec& m, const FilterConfig& cfg, const std::vector<Vec>& ys);

}  // namespace minplus
