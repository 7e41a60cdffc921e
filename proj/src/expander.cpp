#include "minplus/expander.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace minplus {

namespace {

std::vector<int> checked_active(std::vector<int> active) {
    if (active.empty()) {
        throw std::invalid_argument("scalar field needs at least one active dimension");
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    if (active.front() < 0) {
        throw std::invalid_argument("active dimension indices must be non-negative");
    }
    return active;
}

// Sample coordinates of one sub-box restricted to the active dimensions,
// tensor grid with N_s points per dimension, endpoints included.
Mat box_samples(const Box& box, const std::vector<int>& active, int per_dim) {
    const int a = static_cast<int>(active.size());
    std::size_t total = 1;
    for (int k = 0; k < a; ++k) total *= static_cast<std::size_t>(per_dim);
    Mat pts(static_cast<Eigen::Index>(total), a);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int k = a - 1; k >= 0; --k) {
            const int i = static_cast<int>(rem % per_dim);
            rem /= static_cast<std::size_t>(per_dim);
            const int d = active[static_cast<std::size_t>(k)];
            pts(static_cast<Eigen::Index>(flat), k) =
                box.lo(d) + (box.hi(d) - box.lo(d)) * static_cast<double>(i) / (per_dim - 1);
        }
    }
    return pts;
}

struct MonomialLayout {
    int dims;
    int quad_terms() const { return dims * (dims + 1) / 2; }
    int columns() const { return quad_terms() + dims + 1; }

    Eigen::RowVectorXd row(const Eigen::RowVectorXd& u) const {
        Eigen::RowVectorXd r(columns());
        int c = 0;
        for (int i = 0; i < dims; ++i) {
            for (int j = i; j < dims; ++j) {
                r(c++) = u(i) * u(j);
            }
        }
        for (int i = 0; i < dims; ++i) r(c++) = u(i);
        r(c) = 1.0;
        return r;
    }

    // Quadratic-coefficient matrix H with 1/2 u^T H u == sum z_ij u_i u_j.
    Mat hessian(const Vec& z) const {
        Mat h = Mat::Zero(dims, dims);
        int c = 0;
        for (int i = 0; i < dims; ++i) {
            for (int j = i; j < dims; ++j) {
                if (i == j) {
                    h(i, i) = 2.0 * z(c);
                } else {
                    h(i, j) = h(j, i) = z(c);
                }
                ++c;
            }
        }
        return h;
    }

    Vec pack(const Mat& h, const Vec& lin, double constant) const {
        Vec z(columns());
        int c = 0;
        for (int i = 0; i < dims; ++i) {
            for (int j = i; j < dims; ++j) {
                z(c++) = (i == j) ? 0.5 * h(i, i) : h(i, j);
            }
        }
        z.segment(c, dims) = lin;
        z(columns() - 1) = constant;
        return z;
    }
};

}  // namespace

ScalarField::ScalarField(FieldKind kind, Fn fn, std::vector<int> active)
    : kind_(kind), fn_(std::move(fn)), active_(checked_active(std::move(active))) {}

ScalarField ScalarField::output_residual(VecFn output, const Mat& R, const Vec& y,
                                         std::vector<int> active) {
    return ScalarField(
        FieldKind::OutputResidual,
        [output = std::move(output), R, y](const Vec& x) {
            const Vec r = y - output(x);
            return 0.5 * r.dot(R * r);
        },
        std::move(active));
}

ScalarField ScalarField::dyn_quadratic(VecFn dynamics, const Mat& M, std::vector<int> active) {
    return ScalarField(
        FieldKind::DynQuadratic,
        [dynamics = std::move(dynamics), M](const Vec& x) {
            const Vec a = dynamics(x);
            return a.dot(M * a);
        },
        std::move(active));
}

ScalarField ScalarField::dyn_linear(VecFn dynamics, const Eigen::RowVectorXd& mtilde,
                                    std::vector<int> active) {
    return ScalarField(
        FieldKind::DynLinear,
        [dynamics = std::move(dynamics), mtilde](const Vec& x) {
            return mtilde.transpose().dot(dynamics(x));
        },
        std::move(active));
}

ScalarField ScalarField::custom(Fn fn, std::vector<int> active) {
    return ScalarField(FieldKind::Custom, std::move(fn), std::move(active));
}

std::vector<Box> partition_boxes(const Window& w, const std::vector<int>& active) {
    const int L = w.partitions();
    const int a = static_cast<int>(active.size());
    std::size_t total = 1;
    for (int k = 0; k < a; ++k) total *= static_cast<std::size_t>(L);
    std::vector<Box> boxes;
    boxes.reserve(total);
    const Vec lo = w.lo();
    const Vec hi = w.hi();
    for (std::size_t flat = 0; flat < total; ++flat) {
        Box b{lo, hi};
        std::size_t rem = flat;
        for (int k = a - 1; k >= 0; --k) {
            const int i = static_cast<int>(rem % static_cast<std::size_t>(L));
            rem /= static_cast<std::size_t>(L);
            const int d = active[static_cast<std::size_t>(k)];
            const double step = (hi(d) - lo(d)) / L;
            b.lo(d) = lo(d) + step * i;
            b.hi(d) = (i == L - 1) ? hi(d) : lo(d) + step * (i + 1);
        }
        boxes.push_back(std::move(b));
    }
    return boxes;
}

namespace {

// Active-set solver for min ||A z - t||^2 subject to G z >= h. The working
// set grows by the most violated constraint and drops constraints with
// negative multipliers; with full-rank A this terminates in a handful of
// iterations at the sizes used here.
Vec lsq_with_inequalities(const Mat& design, const Vec& targets, const Mat& gmat, const Vec& hvec) {
    const int cols = static_cast<int>(design.cols());
    const Mat ata2 = 2.0 * design.transpose() * design;
    const Vec atb2 = 2.0 * design.transpose() * targets;

    Vec z = design.colPivHouseholderQr().solve(targets);
    std::vector<int> active;
    constexpr double kTol = 1e-11;

    for (int iter = 0; iter < 200; ++iter) {
        // Most violated inactive constraint, if any.
        int worst = -1;
        double worst_gap = -kTol;
        for (int i = 0; i < gmat.rows(); ++i) {
            if (std::find(active.begin(), active.end(), i) != active.end()) continue;
            const double gap = gmat.row(i).dot(z) - hvec(i);
            if (gap < worst_gap) {
                worst_gap = gap;
                worst = i;
            }
        }
        if (worst < 0) {
            return z;
        }
        active.push_back(worst);

        while (!active.empty()) {
            // Stationarity 2 A^T A z - G_W^T mu = 2 A^T t with G_W z = h_W;
            // mu >= 0 certifies the active constraints.
            const int na = static_cast<int>(active.size());
            Mat kkt = Mat::Zero(cols + na, cols + na);
            Vec rhs(cols + na);
            kkt.topLeftCorner(cols, cols) = ata2;
            for (int i = 0; i < na; ++i) {
                kkt.block(cols + i, 0, 1, cols) = gmat.row(active[i]);
                kkt.block(0, cols + i, cols, 1) = -gmat.row(active[i]).transpose();
                rhs(cols + i) = hvec(active[i]);
            }
            rhs.head(cols) = atb2;
            const Vec sol = kkt.fullPivLu().solve(rhs);
            z = sol.head(cols);

            int drop = -1;
            double most_negative = -kTol;
            for (int i = 0; i < na; ++i) {
                if (sol(cols + i) < most_negative) {
                    most_negative = sol(cols + i);
                    drop = i;
                }
            }
            if (drop < 0) break;
            active.erase(active.begin() + drop);
        }
    }
    return z;
}

}  // namespace

Vec solve_constrained_lsq(const Mat& points, const Vec& targets, double convexity_floor) {
    const int a = static_cast<int>(points.cols());
    const int nsamp = static_cast<int>(points.rows());
    if (targets.size() != nsamp) {
        throw DimensionMismatch("sample/target count mismatch");
    }
    MonomialLayout layout{a};
    Mat design(nsamp, layout.columns());
    for (int s = 0; s < nsamp; ++s) {
        design.row(s) = layout.row(points.row(s));
    }
    Eigen::ColPivHouseholderQR<Mat> qr(design);
    if (qr.rank() < layout.columns()) {
        throw RankDeficient("design matrix rank " + std::to_string(qr.rank()) + " < " +
                            std::to_string(layout.columns()) + " columns");
    }
    Vec z = qr.solve(targets);

    Mat h = layout.hessian(z);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.eigenvalues().minCoeff() >= convexity_floor) {
        return z;
    }
    // Clamp the curvature to the convexity floor, then refit the linear
    // and constant coefficients against the residual targets.
    Vec lam = es.eigenvalues().cwiseMax(convexity_floor);
    h = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    h = 0.5 * (h + h.transpose());

    Mat affine(nsamp, a + 1);
    Vec residual(nsamp);
    for (int s = 0; s < nsamp; ++s) {
        const Vec u = points.row(s).transpose();
        affine.row(s).head(a) = u.transpose();
        affine(s, a) = 1.0;
        residual(s) = targets(s) - 0.5 * u.dot(h * u);
    }
    Eigen::ColPivHouseholderQR<Mat> qr2(affine);
    if (qr2.rank() < a + 1) {
        throw RankDeficient("affine refit design is rank deficient");
    }
    Vec zl = qr2.solve(residual);
    return layout.pack(h, zl.head(a), zl(a));
}

QuadForm fit_partition(const ScalarField& g, const Window& w, const Box& box,
                       double convexity_floor) {
    const std::vector<int>& active = g.active();
    const int a = static_cast<int>(active.size());
    const int n = w.dim();
    if (active.back() >= n) {
        throw DimensionMismatch("active dimension exceeds window dimension");
    }

    const Mat raw = box_samples(box, active, w.samples_per_partition());
    Eigen::RowVectorXd mid(a);
    for (int k = 0; k < a; ++k) {
        mid(k) = 0.5 * (box.lo(active[k]) + box.hi(active[k]));
    }

    Vec targets(raw.rows());
    Vec x = w.center();
    for (int s = 0; s < raw.rows(); ++s) {
        for (int k = 0; k < a; ++k) x(active[k]) = raw(s, k);
        targets(s) = g(x);
        if (!std::isfinite(targets(s))) {
            std::ostringstream msg;
            msg << "field not finite at sample [" << x.transpose() << "]";
            throw FitFailed(msg.str());
        }
    }

    MonomialLayout layout{a};
    const std::vector<Vec> window_grid = w.grid_over(active);
    Vec z;
    try {
        // Fit in box-centered coordinates, minimizing the sub-box residual
        // subject to f >= g at every full-window sample and the convexity
        // floor on the curvature. Enforcing the majorant inside the solve
        // (instead of lifting the constant afterwards) keeps the fit tight
        // on its own sub-box as partitions shrink.
        const Mat centered = raw.rowwise() - mid;
        Mat design(centered.rows(), layout.columns());
        for (int s = 0; s < centered.rows(); ++s) {
            design.row(s) = layout.row(centered.row(s));
        }
        Eigen::ColPivHouseholderQR<Mat> qr(design);
        if (qr.rank() < layout.columns()) {
            throw RankDeficient("design matrix rank " + std::to_string(qr.rank()) + " < " +
                                std::to_string(layout.columns()) + " columns");
        }

        const int floors = a;  // diagonal curvature floors z_ii >= floor/2
        Mat gmat = Mat::Zero(static_cast<Eigen::Index>(window_grid.size()) + floors,
                             layout.columns());
        Vec hvec(gmat.rows());
        Eigen::RowVectorXd uw(a);
        for (std::size_t i = 0; i < window_grid.size(); ++i) {
            for (int k = 0; k < a; ++k) uw(k) = window_grid[i](active[k]) - mid(k);
            gmat.row(static_cast<Eigen::Index>(i)) = layout.row(uw);
            hvec(static_cast<Eigen::Index>(i)) = g(window_grid[i]);
            if (!std::isfinite(hvec(static_cast<Eigen::Index>(i)))) {
                throw FitFailed("field not finite on the window sample grid");
            }
        }
        int c = 0;
        for (int i = 0; i < a; ++i) {
            for (int j = i; j < a; ++j) {
                if (i == j) {
                    gmat(static_cast<Eigen::Index>(window_grid.size()) + i, c) = 1.0;
                    hvec(static_cast<Eigen::Index>(window_grid.size()) + i) =
                        0.5 * convexity_floor;
                }
                ++c;
            }
        }
        z = lsq_with_inequalities(design, targets, gmat, hvec);

        // Diagonal floors do not imply positive definiteness beyond one
        // dimension; clamp and refit the affine part if needed.
        Mat hq = layout.hessian(z);
        Eigen::SelfAdjointEigenSolver<Mat> es(hq);
        if (es.eigenvalues().minCoeff() < convexity_floor * (1.0 - 1e-9)) {
            Vec lam = es.eigenvalues().cwiseMax(convexity_floor);
            hq = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
            hq = 0.5 * (hq + hq.transpose());
            Mat affine(centered.rows(), a + 1);
            Vec resid(centered.rows());
            for (int s = 0; s < centered.rows(); ++s) {
                const Vec u = centered.row(s).transpose();
                affine.row(s).head(a) = u.transpose();
                affine(s, a) = 1.0;
                resid(s) = targets(s) - 0.5 * u.dot(hq * u);
            }
            Mat g2(window_grid.size(), a + 1);
            Vec h2(window_grid.size());
            for (std::size_t i = 0; i < window_grid.size(); ++i) {
                for (int k = 0; k < a; ++k) uw(k) = window_grid[i](active[k]) - mid(k);
                g2.row(static_cast<Eigen::Index>(i)).head(a) = uw;
                g2(static_cast<Eigen::Index>(i), a) = 1.0;
                const Vec u = uw.transpose();
                h2(static_cast<Eigen::Index>(i)) = g(window_grid[i]) - 0.5 * u.dot(hq * u);
            }
            const Vec zl = lsq_with_inequalities(affine, resid, g2, h2);
            z = layout.pack(hq, zl.head(a), zl(a));
        }
    } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "fit failed on box [" << box.lo.transpose() << "] .. [" << box.hi.transpose()
            << "]: " << e.what();
        throw FitFailed(msg.str());
    }

    const Mat h = layout.hessian(z);
    const Vec lin = z.segment(layout.quad_terms(), a);
    const double c0 = z(layout.columns() - 1);

    // Expand 1/2 (u - m)^T H (u - m) + b^T (u - m) + c0 back to window
    // coordinates and embed into the full state dimension.
    const Vec m = mid.transpose();
    const Vec hm = h * m;
    Mat q11 = Mat::Zero(n, n);
    Vec q12 = Vec::Zero(n);
    for (int r = 0; r < a; ++r) {
        for (int c = 0; c < a; ++c) {
            q11(active[r], active[c]) = h(r, c);
        }
        q12(active[r]) = lin(r) - hm(r);
    }
    const double q22 = m.dot(hm) - 2.0 * lin.dot(m) + 2.0 * c0;
    QuadForm fitted = QuadForm::from_blocks(q11, q12, q22);

    // Numerical safety: lift any residual violation left by the solver.
    double worst = 0.0;
    for (const Vec& xs : window_grid) {
        worst = std::max(worst, g(xs) - fitted.value(xs));
    }
    if (worst > 0.0) {
        fitted = fitted.shifted(worst);
    }
    return fitted;
}

QuadSet expand(const ScalarField& g, const Window& w, double convexity_floor) {
    std::vector<QuadForm> members;
    for (const Box& box : partition_boxes(w, g.active())) {
        members.push_back(fit_partition(g, w, box, convexity_floor));
    }
    return QuadSet(std::move(members));
}

}  // namespace minplus
