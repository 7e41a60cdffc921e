#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <utility>
#include <vector>

#include "minplus/errors.hpp"

namespace minplus {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Window;

/// One homogeneous quadratic basis element. The (n+1)x(n+1) symmetric
/// matrix Q packs the quadratic block q11 (n x n), the linear block
/// q12 (n x 1) and the constant q22, and evaluates as
///   value(x) = 1/2 * [x^T 1] Q [x; 1]
///            = 1/2 * (x^T q11 x + 2 q12^T x + q22).
class QuadForm {
public:
    // Symmetrizes the input. Asymmetry beyond 1e-12 (relative to the max
    // coefficient) is rejected.
    explicit QuadForm(const Mat& q);

    static QuadForm from_blocks(const Mat& q11, const Vec& q12, double q22);
    static QuadForm zero(int dim);

    int dim() const { return static_cast<int>(q_.rows()) - 1; }
    const Mat& matrix() const { return q_; }

    Mat q11() const { return q_.topLeftCorner(dim(), dim()); }
    Vec q12() const { return q_.topRightCorner(dim(), 1); }
    double q22() const { return q_(dim(), dim()); }

    double value(const Vec& x) const;

    QuadForm operator+(const QuadForm& other) const;
    QuadForm scaled(double factor) const;
    QuadForm shifted(double value_offset) const;

private:
    Mat q_;
};

double evaluate(const QuadForm& q, const Vec& x);

// Analytic vertex x* = -q11^{-1} q12. Throws NonConvex when the smallest
// eigenvalue of q11 is at or below `tolerance`.
Vec unconstrained_minimizer(const QuadForm& q, double tolerance = 1e-10);

// Box-constrained argmin: the analytic vertex when it is convex and lies
// inside the window, otherwise the best point of the window sample grid.
// With `grid_fallback` disabled a non-convex member raises NonConvex.
std::pair<Vec, double> windowed_argmin(const QuadForm& q, const Window& w,
                                       bool grid_fallback = true);

/// Finite indexed set of QuadForm whose pointwise minimum represents a
/// function. Non-empty; all members share one state dimension.
class QuadSet {
public:
    explicit QuadSet(std::vector<QuadForm> members);

    int dim() const { return members_.front().dim(); }
    int size() const { return static_cast<int>(members_.size()); }
    const QuadForm& member(int i) const { return members_.at(i); }
    const std::vector<QuadForm>& members() const { return members_; }

private:
    std::vector<QuadForm> members_;
};

// Minimum member value at x and the index of the first member achieving it.
std::pair<double, int> eval_set(const QuadSet& s, const Vec& x);

// Min-plus combination: the |a|*|b| pairwise sums Q_j + Q_l in lexicographic
// (j, l) order. Pointwise min of the result equals min(a) + min(b).
// No deduplication; cardinality control is the pruner's job.
QuadSet combine_minplus(const QuadSet& a, const QuadSet& b);

// Shifts the represented value by c (adds 2c to every member's q22).
QuadSet add_constant(const QuadSet& s, double c);

// JSON array of {"dim": n, "matrix": [...row-major (n+1)^2 floats...]}.
// The reader symmetrizes and validates each entry.
void save_json(const QuadSet& s, std::ostream& out);
QuadSet load_json(std::istream& in);

}  // namespace minplus
