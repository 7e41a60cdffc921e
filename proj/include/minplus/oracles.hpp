#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "minplus/model.hpp"

namespace minplus {

/// Dense state/disturbance grids for the reference dynamic-programming
/// recursion. Deliberately naive and capped to one or two state dimensions
/// and a scalar disturbance.
struct GridSpec {
    Vec lo;
    Vec hi;
    std::vector<int> points;  // per state dimension, >= 33
    double w_lo = -3.0;
    double w_hi = 3.0;
    int w_points = 121;

    void validate() const;
    int dim() const { return static_cast<int>(points.size()); }
    double spacing(int d) const { return (hi(d) - lo(d)) / (points[d] - 1); }
};

/// Value samples on the state grid, row-major with the last dimension
/// varying fastest.
struct ValueGrid {
    GridSpec spec;
    std::vector<double> values;

    Vec node(std::size_t flat) const;
    std::size_t size() const { return values.size(); }

    // Multilinear interpolation; coordinates outside the box are clamped
    // and counted through `clamped`.
    double interpolate(const Vec& x, bool* clamped = nullptr) const;
};

ValueGrid grid_from_function(const GridSpec& g, const std::function<double(const Vec&)>& f);

// Grid node with the lowest value (ties to the lowest flat index).
Vec grid_argmin(const ValueGrid& v);

// x-coordinate columns plus value, one row per node.
void dump_csv(const ValueGrid& v, std::ostream& out);

struct DpStepResult {
    ValueGrid next;
    // Estimated upward bias of the recursion: disturbance-grid gap plus
    // multilinear interpolation error, from second differences of V_k.
    double resolution_bound = 0.0;
    long clamp_count = 0;          // interpolation reads clamped to the box
    long out_of_domain_nodes = 0;  // nodes whose backward image left the grid for every w
};

// One value-recursion step on the grid:
//   V'(x) = min_w interp(V, A(x) + B w) + 1/2 w^T Q_eta w + meas(x)
// with meas(x) = 1/2 ||y - C(x)||^2_R unless `measurement_override` is
// given. Reads outside the box are clamped and counted; nodes whose
// backward image leaves the grid for every disturbance sample raise
// OutOfDomain when `strict` is set and are only counted otherwise.
DpStepResult dp_step(const ValueGrid& v, const Vec& y, const ModelSpec& m,
                     const std::function<double(const Vec&)>* measurement_override = nullptr,
                     bool strict = false);

struct DpFilterResult {
    std::vector<Vec> estimates;  // [0] = xbar0, then one per measurement
    double max_resolution_bound = 0.0;
    long clamp_total = 0;
};

// Reference filter: runs the grid recursion over a measurement sequence,
// reading the estimate off the grid argmin each step.
DpFilterResult dp_filter(const ModelSpec& m, const GridSpec& g, const std::vector<Vec>& ys);

// Closed-form reference for affine dynamics with linear output: an
// information-filter recursion on the same cost, weights treated as
// inverse covariances. Returns [xbar0, estimate after y_1, ...].
std::vector<Vec> riccati_filter(const ModelSpec& m, const std::vector<Vec>& ys);

}  // namespace minplus
