#include "minplus/model.hpp"

#include <Eigen/Eigenvalues>
#include <string>

namespace minplus {

namespace {

void check_spd(const Mat& m, int size, const char* name) {
    if (m.rows() != size || m.cols() != size) {
        throw DimensionMismatch(std::string(name) + " has wrong shape");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument(std::string(name) + " must be positive definite");
    }
}

}  // namespace

Vec ModelSpec::backward_at(const Vec& x) const {
    if (const auto* aff = std::get_if<AffineDynamics>(&dynamics)) {
        return aff->F * x + aff->f;
    }
    return std::get<NonlinearDynamics>(dynamics).map(x);
}

Vec ModelSpec::output_at(const Vec& x) const {
    if (const auto* lin = std::get_if<LinearOutput>(&output)) {
        return lin->C * x;
    }
    return std::get<NonlinearOutput>(output).map(x);
}

void ModelSpec::validate() const {
    if (n < 1 || m < 1 || p < 1) {
        throw std::invalid_argument("model dimensions must be positive");
    }
    if (B.rows() != n || B.cols() != m) {
        throw DimensionMismatch("B must be n x m");
    }
    if (const auto* aff = std::get_if<AffineDynamics>(&dynamics)) {
        if (aff->F.rows() != n || aff->F.cols() != n || aff->f.size() != n) {
            throw DimensionMismatch("affine dynamics must be n x n with n offset");
        }
    }
    if (const auto* lin = std::get_if<LinearOutput>(&output)) {
        if (lin->C.rows() != p || lin->C.cols() != n) {
            throw DimensionMismatch("C must be p x n");
        }
    }
    if (xbar0.size() != n) {
        throw DimensionMismatch("xbar0 must have length n");
    }
    check_spd(R, p, "R");
    check_spd(Q_eta, m, "Q_eta");
    check_spd(N0, n, "N0");
}

}  // namespace minplus
