#include "minplus/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace minplus {

void GridSpec::validate() const {
    const int n = dim();
    if (n < 1 || n > 2) {
        throw std::invalid_argument("grid oracle covers one or two state dimensions");
    }
    if (lo.size() != n || hi.size() != n) {
        throw DimensionMismatch("grid bounds must match points-per-dimension list");
    }
    for (int d = 0; d < n; ++d) {
        if (points[d] < 33) {
            throw std::invalid_argument("grid needs at least 33 points per dimension");
        }
        if (hi(d) <= lo(d)) {
            throw std::invalid_argument("grid box is empty");
        }
    }
    if (w_points < 2 || w_hi <= w_lo) {
        throw std::invalid_argument("disturbance grid is degenerate");
    }
}

namespace {

std::size_t total_nodes(const GridSpec& g) {
    std::size_t t = 1;
    for (int d = 0; d < g.dim(); ++d) t *= static_cast<std::size_t>(g.points[d]);
    return t;
}

}  // namespace

Vec ValueGrid::node(std::size_t flat) const {
    const int n = spec.dim();
    Vec x(n);
    std::size_t rem = flat;
    for (int d = n - 1; d >= 0; --d) {
        const std::size_t i = rem % static_cast<std::size_t>(spec.points[d]);
        rem /= static_cast<std::size_t>(spec.points[d]);
        x(d) = spec.lo(d) + spec.spacing(d) * static_cast<double>(i);
    }
    return x;
}

double ValueGrid::interpolate(const Vec& x, bool* clamped) const {
    const int n = spec.dim();
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int d = 0; d < n; ++d) {
        double t = (x(d) - spec.lo(d)) / spec.spacing(d);
        if (t < 0.0 || t > spec.points[d] - 1) {
            if (clamped) *clamped = true;
            t = std::clamp(t, 0.0, static_cast<double>(spec.points[d] - 1));
        }
        int i = static_cast<int>(t);
        i = std::min(i, spec.points[d] - 2);
        base[d] = i;
        frac[d] = t - i;
    }
    if (n == 1) {
        const double v0 = values[static_cast<std::size_t>(base[0])];
        const double v1 = values[static_cast<std::size_t>(base[0] + 1)];
        return v0 + frac[0] * (v1 - v0);
    }
    const std::size_t stride = static_cast<std::size_t>(spec.points[1]);
    auto at = [&](int i, int j) {
        return values[static_cast<std::size_t>(base[0] + i) * stride +
                      static_cast<std::size_t>(base[1] + j)];
    };
    const double lo_row = at(0, 0) + frac[1] * (at(0, 1) - at(0, 0));
    const double hi_row = at(1, 0) + frac[1] * (at(1, 1) - at(1, 0));
    return lo_row + frac[0] * (hi_row - lo_row);
}

ValueGrid grid_from_function(const GridSpec& g, const std::function<double(const Vec&)>& f) {
    g.validate();
    ValueGrid v{g, {}};
    v.values.resize(total_nodes(g));
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        v.values[i] = f(v.node(i));
    }
    return v;
}

Vec grid_argmin(const ValueGrid& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.values.size(); ++i) {
        if (v.values[i] < v.values[best]) best = i;
    }
    return v.node(best);
}

void dump_csv(const ValueGrid& v, std::ostream& out) {
    const int n = v.spec.dim();
    for (int d = 0; d < n; ++d) out << "x" << (d + 1) << ",";
    out << "value\n";
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        const Vec x = v.node(i);
        for (int d = 0; d < n; ++d) out << x(d) << ",";
        out << v.values[i] << "\n";
    }
}

namespace {

// Largest |second difference| / h^2 along each dimension: a curvature
// estimate for the interpolation and disturbance-gap error bounds.
Vec curvature_estimate(const ValueGrid& v) {
    const int n = v.spec.dim();
    Vec curv = Vec::Zero(n);
    const int rows = v.spec.points[0];
    const int cols = n == 2 ? v.spec.points[1] : 1;
    auto at = [&](int i, int j) {
        return v.values[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
                        static_cast<std::size_t>(j)];
    };
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (i > 0 && i + 1 < rows) {
                const double dd = at(i - 1, j) - 2.0 * at(i, j) + at(i + 1, j);
                curv(0) = std::max(curv(0), std::abs(dd) / (v.spec.spacing(0) * v.spec.spacing(0)));
            }
            if (n == 2 && j > 0 && j + 1 < cols) {
                const double dd = at(i, j - 1) - 2.0 * at(i, j) + at(i, j + 1);
                curv(1) = std::max(curv(1), std::abs(dd) / (v.spec.spacing(1) * v.spec.spacing(1)));
            }
        }
    }
    return curv;
}

}  // namespace

DpStepResult dp_step(const ValueGrid& v, const Vec& y, const ModelSpec& m,
                     const std::function<double(const Vec&)>* measurement_override, bool strict) {
    v.spec.validate();
    if (m.m != 1) {
        throw std::invalid_argument("grid oracle covers a scalar disturbance only");
    }
    if (m.n != v.spec.dim()) {
        throw DimensionMismatch("grid dimension does not match the model");
    }

    DpStepResult out{ValueGrid{v.spec, std::vector<double>(v.values.size())}, 0.0, 0, 0};
    const double dw = (v.spec.w_hi - v.spec.w_lo) / (v.spec.w_points - 1);
    const double q_eta = m.Q_eta(0, 0);

    for (std::size_t i = 0; i < v.values.size(); ++i) {
        const Vec x = out.next.node(i);
        double best = std::numeric_limits<double>::infinity();
        bool any_inside = false;
        const Vec back = m.backward_at(x);
        for (int wi = 0; wi < v.spec.w_points; ++wi) {
            const double w = v.spec.w_lo + dw * wi;
            const Vec pre = back + m.B.col(0) * w;
            bool clamped = false;
            const double cost = v.interpolate(pre, &clamped) + 0.5 * q_eta * w * w;
            if (clamped) {
                ++out.clamp_count;
            } else {
                any_inside = true;
            }
            best = std::min(best, cost);
        }
        if (!any_inside) {
            if (strict) {
                std::ostringstream msg;
                msg << "backward image of node [" << x.transpose()
                    << "] leaves the grid for every w";
                throw OutOfDomain(msg.str());
            }
            ++out.out_of_domain_nodes;
        }
        double meas;
        if (measurement_override) {
            meas = (*measurement_override)(x);
        } else {
            const Vec r = y - m.output_at(x);
            meas = 0.5 * r.dot(m.R * r);
        }
        out.next.values[i] = best + meas;
    }

    // Upward-bias estimate: the grid minimum of the inner problem exceeds
    // the continuous minimum by at most curvature * dw^2 / 8, and the
    // multilinear read of V adds h^2 * curvature / 8 per dimension.
    const Vec curv = curvature_estimate(v);
    double w_curv = q_eta;
    for (int d = 0; d < m.n; ++d) {
        w_curv += std::abs(m.B(d, 0)) * std::abs(m.B(d, 0)) * curv(d);
    }
    out.resolution_bound = w_curv * dw * dw / 8.0;
    for (int d = 0; d < m.n; ++d) {
        out.resolution_bound += curv(d) * v.spec.spacing(d) * v.spec.spacing(d) / 8.0;
    }
    return out;
}

DpFilterResult dp_filter(const ModelSpec& m, const GridSpec& g, const std::vector<Vec>& ys) {
    m.validate();
    // Disturbance grid must span at least six sigma-equivalents of the
    // Q_eta weight or the inner minimizer can sit on the grid edge.
    Eigen::SelfAdjointEigenSolver<Mat> es(m.Q_eta);
    if (g.w_hi - g.w_lo < 6.0 / std::sqrt(es.eigenvalues().minCoeff())) {
        throw std::invalid_argument("disturbance grid narrower than six sigma-equivalents");
    }
    DpFilterResult result;
    ValueGrid v = grid_from_function(g, [&](const Vec& x) {
        const Vec d = x - m.xbar0;
        return 0.5 * (d.dot(m.N0 * d) + m.phi0);
    });
    result.estimates.push_back(m.xbar0);
    for (const Vec& y : ys) {
        DpStepResult step = dp_step(v, y, m);
        v = std::move(step.next);
        result.max_resolution_bound = std::max(result.max_resolution_bound, step.resolution_bound);
        result.clamp_total += step.clamp_count;
        result.estimates.push_back(grid_argmin(v));
    }
    return result;
}

std::vector<Vec> riccati_filter(const ModelSpec& m, const std::vector<Vec>& ys) {
    m.validate();
    const auto* aff = std::get_if<AffineDynamics>(&m.dynamics);
    const auto* lin = std::get_if<LinearOutput>(&m.output);
    if (!aff || !lin) {
        throw std::invalid_argument("riccati oracle requires affine dynamics and linear output");
    }

    auto solve_spd = [](const Mat& a, const Mat& b, const char* what) {
        Eigen::LDLT<Mat> ldlt(a);
        if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14) {
            throw std::runtime_error(std::string("singular information matrix in ") + what);
        }
        return Mat(ldlt.solve(b));
    };

    const Mat I = Mat::Identity(m.n, m.n);
    Mat info = m.N0;
    Vec xhat = m.xbar0;
    std::vector<Vec> estimates{xhat};

    Eigen::FullPivLU<Mat> f_lu(aff->F);
    if (!f_lu.isInvertible()) {
        throw std::runtime_error("backward dynamics matrix is singular");
    }

    for (const Vec& y : ys) {
        // Disturbance smoothing via the covariance route: the effective
        // weight of the propagated error is (info^-1 + B Q_eta^-1 B^T)^-1.
        const Mat cov = solve_spd(info, I, "covariance");
        const Mat q_cov = m.B * solve_spd(m.Q_eta, Mat(m.B.transpose()), "Q_eta") ;
        Mat smoothed = cov + q_cov;
        smoothed = 0.5 * (smoothed + smoothed.transpose());
        const Mat weight = solve_spd(smoothed, I, "smoothed covariance");

        const Mat info_pred = aff->F.transpose() * weight * aff->F;
        const Vec x_pred = f_lu.solve(xhat - aff->f);

        info = info_pred + lin->C.transpose() * m.R * lin->C;
        info = 0.5 * (info + info.transpose());
        const Vec rhs = info_pred * x_pred + lin->C.transpose() * (m.R * y);
        xhat = solve_spd(info, rhs, "posterior information");
        estimates.push_back(xhat);
    }
    return estimates;
}

}  // namespace minplus
