#pragma once

#include <Eigen/Core>
#include <functional>
#include <variant>
#include <vector>

#include "minplus/errors.hpp"

namespace minplus {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Backward dynamics x_k = F x_{k+1} + f (+ B w): propagation is exact.
struct AffineDynamics {
    Mat F;
    Vec f;
};

/// General backward map; value propagation goes through min-plus expansion
/// along the listed active dimensions.
struct NonlinearDynamics {
    std::function<Vec(const Vec&)> map;
    std::vector<int> active;
};

using BackwardDynamics = std::variant<AffineDynamics, NonlinearDynamics>;

/// y = C x: the measurement term stays an exact quadratic.
struct LinearOutput {
    Mat C;
};

/// General output map, expanded along the listed active dimensions.
struct NonlinearOutput {
    std::function<Vec(const Vec&)> map;
    std::vector<int> active;
};

using OutputMap = std::variant<LinearOutput, NonlinearOutput>;

/// System description used by the filter: backward dynamics, disturbance
/// channel B, output map with weight R, disturbance weight Q_eta, and the
/// initial weight/estimate/offset of the cost.
struct ModelSpec {
    int n = 0;  // state dimension
    int m = 0;  // disturbance dimension
    int p = 0;  // output dimension

    BackwardDynamics dynamics;
    Mat B;
    OutputMap output;

    Mat R;
    Mat Q_eta;
    Mat N0;
    Vec xbar0;
    double phi0 = 0.0;

    bool affine() const { return std::holds_alternative<AffineDynamics>(dynamics); }
    bool linear_output() const { return std::holds_alternative<LinearOutput>(output); }

    Vec backward_at(const Vec& x) const;
    Vec output_at(const Vec& x) const;

    // Shape and positive-definiteness checks (R, Q_eta, N0 SPD).
    void validate() const;
};

}  // namespace minplus
