#include "minplus/quadform.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "minplus/window.hpp"

namespace minplus {

namespace {

constexpr double kAsymmetryTol = 1e-12;

void check_square(const Mat& q) {
    if (q.rows() != q.cols() || q.rows() < 2) {
        throw DimensionMismatch("quadratic matrix must be square of size >= 2");
    }
}

}  // namespace

QuadForm::QuadForm(const Mat& q) {
    check_square(q);
    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    const double asym = (q - q.transpose()).cwiseAbs().maxCoeff();
    if (asym > kAsymmetryTol * scale) {
        throw std::invalid_argument("quadratic matrix asymmetry " + std::to_string(asym) +
                                    " exceeds tolerance");
    }
    q_ = 0.5 * (q + q.transpose());
    if (asym == 0.0) {
        q_ = q;  // bit-exact for already-symmetric input
    }
}

QuadForm QuadForm::from_blocks(const Mat& q11, const Vec& q12, double q22) {
    const int n = static_cast<int>(q11.rows());
    if (q11.cols() != n || q12.size() != n) {
        throw DimensionMismatch("block sizes disagree");
    }
    Mat q(n + 1, n + 1);
    q.topLeftCorner(n, n) = 0.5 * (q11 + q11.transpose());
    q.topRightCorner(n, 1) = q12;
    q.bottomLeftCorner(1, n) = q12.transpose();
    q(n, n) = q22;
    return QuadForm(q);
}

QuadForm QuadForm::zero(int dim) {
    return QuadForm(Mat::Zero(dim + 1, dim + 1));
}

double QuadForm::value(const Vec& x) const {
    const int n = dim();
    if (x.size() != n) {
        throw DimensionMismatch("state length " + std::to_string(x.size()) +
                                " does not match quadratic dimension " + std::to_string(n));
    }
    const auto q11 = q_.topLeftCorner(n, n);
    const auto q12 = q_.topRightCorner(n, 1);
    return 0.5 * (x.dot(q11 * x) + 2.0 * q12.col(0).dot(x) + q_(n, n));
}

QuadForm QuadForm::operator+(const QuadForm& other) const {
    if (dim() != other.dim()) {
        throw DimensionMismatch("cannot add quadratics of different dimension");
    }
    return QuadForm(q_ + other.q_);
}

QuadForm QuadForm::scaled(double factor) const {
    return QuadForm(Mat(factor * q_));
}

QuadForm QuadForm::shifted(double value_offset) const {
    Mat q = q_;
    q(dim(), dim()) += 2.0 * value_offset;
    return QuadForm(q);
}

double evaluate(const QuadForm& q, const Vec& x) {
    return q.value(x);
}

Vec unconstrained_minimizer(const QuadForm& q, double tolerance) {
    const Mat q11 = q.q11();
    Eigen::SelfAdjointEigenSolver<Mat> es(q11);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= tolerance) {
        throw NonConvex("q11 smallest eigenvalue " +
                        (es.info() == Eigen::Success ? std::to_string(es.eigenvalues().minCoeff())
                                                     : std::string("(factorization failed)")) +
                        " is not positive definite");
    }
    return es.eigenvectors() *
           (es.eigenvalues().cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * (-q.q12())));
}

std::pair<Vec, double> windowed_argmin(const QuadForm& q, const Window& w, bool grid_fallback) {
    if (q.dim() != w.dim()) {
        throw DimensionMismatch("quadratic/window dimension mismatch");
    }
    try {
        Vec vertex = unconstrained_minimizer(q);
        if (w.contains(vertex)) {
            return {vertex, q.value(vertex)};
        }
    } catch (const NonConvex&) {
        if (!grid_fallback) throw;
    }
    // Vertex outside the box or member non-convex: scan the window grid.
    Vec best;
    double best_value = std::numeric_limits<double>::infinity();
    for (const Vec& x : w.full_grid()) {
        const double v = q.value(x);
        if (v < best_value) {
            best_value = v;
            best = x;
        }
    }
    return {best, best_value};
}

QuadSet::QuadSet(std::vector<QuadForm> members) : members_(std::move(members)) {
    if (members_.empty()) {
        throw std::invalid_argument("QuadSet must be non-empty");
    }
    const int n = members_.front().dim();
    for (const QuadForm& m : members_) {
        if (m.dim() != n) {
            throw DimensionMismatch("QuadSet members must share one dimension");
        }
    }
}

std::pair<double, int> eval_set(const QuadSet& s, const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    int best_index = 0;
    for (int i = 0; i < s.size(); ++i) {
        const double v = s.member(i).value(x);
        if (v < best) {  // ties keep the lowest index
            best = v;
            best_index = i;
        }
    }
    return {best, best_index};
}

QuadSet combine_minplus(const QuadSet& a, const QuadSet& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("cannot combine sets of different dimension");
    }
    std::vector<QuadForm> out;
    out.reserve(static_cast<std::size_t>(a.size()) * static_cast<std::size_t>(b.size()));
    for (int j = 0; j < a.size(); ++j) {
        for (int l = 0; l < b.size(); ++l) {
            out.push_back(a.member(j) + b.member(l));
        }
    }
    return QuadSet(std::move(out));
}

QuadSet add_constant(const QuadSet& s, double c) {
    std::vector<QuadForm> out;
    out.reserve(s.size());
    for (const QuadForm& m : s.members()) {
        out.push_back(m.shifted(c));
    }
    return QuadSet(std::move(out));
}

void save_json(const QuadSet& s, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const QuadForm& m : s.members()) {
        nlohmann::json entry;
        entry["dim"] = m.dim();
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>((m.dim() + 1) * (m.dim() + 1)));
        for (int r = 0; r <= m.dim(); ++r) {
            for (int c = 0; c <= m.dim(); ++c) {
                flat.push_back(m.matrix()(r, c));
            }
        }
        entry["matrix"] = flat;
        arr.push_back(std::move(entry));
    }
    out << arr.dump(2) << "\n";
}

QuadSet load_json(std::istream& in) {
    nlohmann::json arr = nlohmann::json::parse(in);
    if (!arr.is_array() || arr.empty()) {
        throw std::invalid_argument("expected non-empty JSON array of quadratics");
    }
    std::vector<QuadForm> members;
    members.reserve(arr.size());
    for (const auto& entry : arr) {
        const int n = entry.at("dim").get<int>();
        const auto flat = entry.at("matrix").get<std::vector<double>>();
        if (n < 1 || flat.size() != static_cast<std::size_t>((n + 1) * (n + 1))) {
            throw std::invalid_argument("matrix length does not match dim");
        }
        Mat q(n + 1, n + 1);
        for (int r = 0; r <= n; ++r) {
            for (int c = 0; c <= n; ++c) {
                q(r, c) = flat[static_cast<std::size_t>(r * (n + 1) + c)];
            }
        }
        members.emplace_back(q);
    }
    return QuadSet(std::move(members));
}

}  // namespace minplus
