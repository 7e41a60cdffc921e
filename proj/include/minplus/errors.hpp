#pragma once

#include <stdexcept>
#include <string>

namespace minplus {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Quadratic block q11 is not positive definite beyond tolerance.
struct NonConvex : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Constrained majorant fit could not be completed for a sub-box.
struct FitFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Factorization of Q_eta + B^T N B failed (pivot below tolerance).
struct SingularGain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least-squares design matrix is rank deficient.
struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backward image left the oracle state grid for every disturbance sample.
struct OutOfDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wraps any failure raised while processing one filter step.
struct StepError : std::runtime_error {
    int step;
    StepError(int step_index, const std::string& what)
        : std::runtime_error("step " + std::to_string(step_index) + ": " + what), step(step_index) {}
};

}  // namespace minplus
