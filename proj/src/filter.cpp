#include "minplus/filter.hpp"

#include <chrono>
#include <limits>

namespace minplus {

FilterState init(const ModelSpec& m, const FilterConfig& cfg) {
    if (cfg.window_half_width.size() != m.n) {
        throw DimensionMismatch("window half-width must have one entry per state dimension");
    }
    return FilterState{0, init_value(m), m.xbar0, cfg.window_at(m.xbar0)};
}

UpdateResult update_full(const FilterState& st, const Vec& y, const ModelSpec& m,
                         const FilterConfig& cfg) {
    const QuadSet grown = propagate(st.value, y, m, st.window, cfg.measurement_mode);

    // The constrained argmin of the set is the best member argmin; scanning
    // every member covers the case where the winning vertex lies outside
    // the window and the boundary point of another member wins.
    Vec estimate = st.estimate;
    double best = std::numeric_limits<double>::infinity();
    for (const ArgminEntry& e : argmin_catalog(grown, st.window)) {
        if (e.value < best) {
            best = e.value;
            estimate = e.point;
        }
    }

    const QuadSet pruned = prune(grown, st.window, cfg.prune);
    FilterState next{st.step + 1, pruned, estimate, st.window.recentered(estimate)};
    return UpdateResult{std::move(next), grown.size(), pruned.size()};
}

FilterState update(const FilterState& st, const Vec& y, const ModelSpec& m,
                   const FilterConfig& cfg) {
    return update_full(st, y, m, cfg).state;
}

RunResult run(const ModelSpec& m, const FilterConfig& cfg, const std::vector<Vec>& ys) {
    RunResult result;
    FilterState st = init(m, cfg);
    result.initial_estimate = st.estimate;
    result.steps.reserve(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        UpdateResult u = [&] {
            try {
                return update_full(st, ys[k], m, cfg);
            } catch (const std::exception& e) {
                throw StepError(static_cast<int>(k) + 1, e.what());
            }
        }();
        const auto t1 = std::chrono::steady_clock::now();
        st = std::move(u.state);
        result.steps.push_back(StepRecord{
            st.estimate, u.card_pre, u.card_post,
            std::chrono::duration<double, std::milli>(t1 - t0).count()});
    }
    return result;
}

}  // namespace minplus
