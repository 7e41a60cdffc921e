#pragma once

#include <Eigen/Core>

#include "minplus/model.hpp"
#include "minplus/quadform.hpp"
#include "minplus/window.hpp"

namespace minplus {

enum class MeasurementMode {
    Combined,  // fit 1/2 ||y - C(x)||^2_R as one field
    Split,     // fit -y^T R C(x) and 1/2 ||C(x)||^2_R separately, add 1/2 y^T R y
};

/// Closed form of the per-member inner minimization over the disturbance:
/// min_w V_i(a + B w) + 1/2 w^T Q_eta w  ==  1/2 a^T W a + ell a + 1/2 c
/// evaluated at a = A(x).
struct StepGains {
    Mat K;                   // m x n, optimal w = K a + w_c
    Vec w_c;                 // m
    Mat W;                   // n x n effective weight
    Eigen::RowVectorXd ell;  // 1 x n linear row
    double c = 0.0;          // constant, value contribution c/2
};

// Singleton value set 1/2 (||x - xbar0||^2_N0 + phi0) in homogeneous form.
QuadSet init_value(const ModelSpec& m);

// Completes the square over w for one source member (q11 = N_i, q12 = L_i^T,
// q22 = phibar_i). Throws SingularGain when Q_eta + B^T N_i B cannot be
// factorized with pivots above `pivot_tol`.
StepGains step_gains(const QuadForm& member, const ModelSpec& m, double pivot_tol = 1e-12);

// Min-plus expansion (or exact quadratic, for linear C) of the measurement
// term 1/2 ||y - C(x)||^2_R over the window.
QuadSet measurement_expansion(const Vec& y, const ModelSpec& m, const Window& w,
                              MeasurementMode mode = MeasurementMode::Combined);

// One value-recursion step: push every member of v through the dynamics
// (exact substitution when affine, min-plus expansion otherwise) and combine
// with the measurement term. Returns the unpruned next set, ordered
// lexicographically in (source member, dynamics index, measurement index).
QuadSet propagate(const QuadSet& v, const Vec& y, const ModelSpec& m, const Window& w,
                  MeasurementMode mode = MeasurementMode::Combined);

}  // namespace minplus
