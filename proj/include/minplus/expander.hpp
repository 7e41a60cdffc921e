#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "minplus/quadform.hpp"
#include "minplus/window.hpp"

namespace minplus {

enum class FieldKind { OutputResidual, DynQuadratic, DynLinear, Custom };

/// A scalar function of the state to be covered by a min-plus quadratic
/// majorant expansion, together with the coordinates it actually reads.
/// Partitioning and fitting act along the active dimensions only; the
/// fitted quadratics carry zero rows/columns elsewhere.
class ScalarField {
public:
    using Fn = std::function<double(const Vec&)>;
    using VecFn = std::function<Vec(const Vec&)>;

    // x -> 1/2 ||y - C(x)||^2_R for the current measurement y.
    static ScalarField output_residual(VecFn output, const Mat& R, const Vec& y,
                                       std::vector<int> active);
    // x -> A(x)^T M A(x)
    static ScalarField dyn_quadratic(VecFn dynamics, const Mat& M, std::vector<int> active);
    // x -> mtilde * A(x)
    static ScalarField dyn_linear(VecFn dynamics, const Eigen::RowVectorXd& mtilde,
                                  std::vector<int> active);
    static ScalarField custom(Fn fn, std::vector<int> active);

    double operator()(const Vec& x) const { return fn_(x); }
    FieldKind kind() const { return kind_; }
    const std::vector<int>& active() const { return active_; }

private:
    ScalarField(FieldKind kind, Fn fn, std::vector<int> active);

    FieldKind kind_;
    Fn fn_;
    std::vector<int> active_;
};

/// Axis-aligned sub-box of a window (full state dimension).
struct Box {
    Vec lo;
    Vec hi;
};

// Uniform partition of the window into `partitions` sub-intervals per
// active dimension; inactive dimensions span the whole window. Boxes are
// ordered lexicographically over the active dimensions.
std::vector<Box> partition_boxes(const Window& w, const std::vector<int>& active);

// Convexity-floored least-squares quadratic fit. `points` holds one sample
// per row (coordinates of the active dimensions only); returns the monomial
// coefficients [x_i x_j (i <= j lexicographic), x_i, 1]. For one dimension
// this is z = [a2, a1, a0]. The quadratic coefficient matrix is eigenvalue-
// clamped to `convexity_floor` and the remaining coefficients refitted.
Vec solve_constrained_lsq(const Mat& points, const Vec& targets,
                          double convexity_floor = 1e-8);

// Fits one sub-box: least squares on the sub-box samples, convexity floor,
// then the constant lifted until the quadratic majorizes g at every sample
// of the FULL window. Throws FitFailed with the offending box bounds.
QuadForm fit_partition(const ScalarField& g, const Window& w, const Box& box,
                       double convexity_floor = 1e-8);

// Full window expansion: one window-wide majorant per sub-box, so the
// pointwise minimum of the set covers g from above on all window samples.
QuadSet expand(const ScalarField& g, const Window& w, double convexity_floor = 1e-8);

}  // namespace minplus
