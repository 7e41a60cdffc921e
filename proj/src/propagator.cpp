#include "minplus/propagator.hpp"

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "minplus/expander.hpp"

namespace minplus {

QuadSet init_value(const ModelSpec& m) {
    m.validate();
    const Vec q12 = -(m.N0 * m.xbar0);
    const double q22 = m.xbar0.dot(m.N0 * m.xbar0) + m.phi0;
    return QuadSet({QuadForm::from_blocks(m.N0, q12, q22)});
}

StepGains step_gains(const QuadForm& member, const ModelSpec& m, double pivot_tol) {
    if (member.dim() != m.n) {
        throw DimensionMismatch("member dimension does not match model");
    }
    const Mat N = member.q11();
    const Vec L_t = member.q12();  // L^T, so L = q12^T
    const double phibar = member.q22();

    const Mat G = m.Q_eta + m.B.transpose() * N * m.B;
    Eigen::LDLT<Mat> ldlt(G);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= pivot_tol) {
        throw SingularGain("factorization of Q_eta + B^T N B failed (pivot below " +
                           std::to_string(pivot_tol) + ")");
    }

    StepGains g;
    g.K = -ldlt.solve(m.B.transpose() * N);
    g.w_c = -ldlt.solve(m.B.transpose() * L_t);

    const Mat closed = Mat::Identity(m.n, m.n) + m.B * g.K;  // I + B K
    g.W = closed.transpose() * N * closed + g.K.transpose() * m.Q_eta * g.K;
    g.W = 0.5 * (g.W + g.W.transpose());

    g.ell = L_t.transpose() * closed + g.w_c.transpose() * m.B.transpose() * N * closed +
            g.w_c.transpose() * m.Q_eta * g.K;
    g.c = 2.0 * L_t.dot(m.B * g.w_c) +
          g.w_c.dot((m.B.transpose() * N * m.B + m.Q_eta) * g.w_c) + phibar;
    return g;
}

namespace {

// Exact quadratic 1/2 (Fx+f)^T W (Fx+f) + ell (Fx+f) + c/2.
QuadForm substitute_affine(const StepGains& g, const AffineDynamics& dyn) {
    const Mat q11 = dyn.F.transpose() * g.W * dyn.F;
    const Vec q12 = dyn.F.transpose() * (g.W * dyn.f + g.ell.transpose());
    const double q22 = dyn.f.dot(g.W * dyn.f) + 2.0 * g.ell.transpose().dot(dyn.f) + g.c;
    return QuadForm::from_blocks(q11, q12, q22);
}

QuadForm exact_linear_measurement(const Vec& y, const Mat& C, const Mat& R) {
    const Mat q11 = C.transpose() * R * C;
    const Vec q12 = -(C.transpose() * (R * y));
    const double q22 = y.dot(R * y);
    return QuadForm::from_blocks(q11, q12, q22);
}

}  // namespace

QuadSet measurement_expansion(const Vec& y, const ModelSpec& m, const Window& w,
                              MeasurementMode mode) {
    if (y.size() != m.p) {
        throw DimensionMismatch("measurement length does not match model output dimension");
    }
    if (const auto* lin = std::get_if<LinearOutput>(&m.output)) {
        // Exact in either mode: combined is the single quadratic directly;
        // split sums two exact singletons plus the constant.
        QuadForm exact = exact_linear_measurement(y, lin->C, m.R);
        if (mode == MeasurementMode::Split) {
            const Mat Cq = lin->C.transpose() * m.R * lin->C;
            QuadSet cross({QuadForm::from_blocks(Mat::Zero(m.n, m.n),
                                                 -(lin->C.transpose() * (m.R * y)), 0.0)});
            QuadSet csq({QuadForm::from_blocks(Cq, Vec::Zero(m.n), 0.0)});
            return add_constant(combine_minplus(cross, csq), 0.5 * y.dot(m.R * y));
        }
        return QuadSet({std::move(exact)});
    }

    const auto& out = std::get<NonlinearOutput>(m.output);
    if (mode == MeasurementMode::Combined) {
        return expand(ScalarField::output_residual(out.map, m.R, y, out.active), w);
    }
    const Mat R = m.R;
    ScalarField cross = ScalarField::custom(
        [map = out.map, R, y](const Vec& x) { return -y.dot(R * map(x)); }, out.active);
    ScalarField csq = ScalarField::custom(
        [map = out.map, R](const Vec& x) {
            const Vec c = map(x);
            return 0.5 * c.dot(R * c);
        },
        out.active);
    return add_constant(combine_minplus(expand(cross, w), expand(csq, w)), 0.5 * y.dot(m.R * y));
}

QuadSet propagate(const QuadSet& v, const Vec& y, const ModelSpec& m, const Window& w,
                  MeasurementMode mode) {
    if (v.dim() != m.n || w.dim() != m.n) {
        throw DimensionMismatch("value set / window / model dimensions disagree");
    }

    std::vector<QuadForm> pushed;
    for (const QuadForm& member : v.members()) {
        const StepGains g = step_gains(member, m);
        if (const auto* aff = std::get_if<AffineDynamics>(&m.dynamics)) {
            pushed.push_back(substitute_affine(g, *aff));
            continue;
        }
        const auto& dyn = std::get<NonlinearDynamics>(m.dynamics);
        QuadSet quad_part = expand(ScalarField::dyn_quadratic(dyn.map, g.W, dyn.active), w);
        std::vector<QuadForm> halved;
        halved.reserve(quad_part.size());
        for (const QuadForm& q : quad_part.members()) halved.push_back(q.scaled(0.5));
        QuadSet lin_part = expand(ScalarField::dyn_linear(dyn.map, g.ell, dyn.active), w);
        QuadSet member_set =
            add_constant(combine_minplus(QuadSet(std::move(halved)), lin_part), 0.5 * g.c);
        for (const QuadForm& q : member_set.members()) pushed.push_back(q);
    }

    return combine_minplus(QuadSet(std::move(pushed)), measurement_expansion(y, m, w, mode));
}

}  // namespace minplus
