#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "minplus/expander.hpp"
#include "minplus/oracles.hpp"
#include "minplus/propagator.hpp"
#include "minplus/pruner.hpp"
#include "test_support.hpp"

using namespace minplus;
using namespace testsupport;

namespace {

ModelSpec cubic_demo_model() {
    ModelSpec m;
    m.n = 2;
    m.m = 1;
    m.p = 1;
    Mat F_fwd{{1.0, 0.0}, {0.1, 1.0}};
    m.dynamics = AffineDynamics{F_fwd.inverse(), Vec::Zero(2)};
    m.B = Mat{{0.1}, {0.0}};
    m.output = NonlinearOutput{
        [](const Vec& x) { return Vec(Vec::Constant(1, x(1) * x(1) * x(1) / 40.0)); }, {1}};
    m.R = Mat::Identity(1, 1);
    m.Q_eta = Mat::Identity(1, 1);
    m.N0 = Mat::Identity(2, 2);
    m.xbar0 = (Vec(2) << 1.0, 0.0).finished();
    return m;
}

ModelSpec scalar_model(double n0, double q_eta, double b) {
    ModelSpec m;
    m.n = 1;
    m.m = 1;
    m.p = 1;
    m.dynamics = AffineDynamics{Mat::Identity(1, 1), Vec::Zero(1)};
    m.B = Mat::Constant(1, 1, b);
    m.output = LinearOutput{Mat::Identity(1, 1)};
    m.R = Mat::Identity(1, 1);
    m.Q_eta = Mat::Constant(1, 1, q_eta);
    m.N0 = Mat::Constant(1, 1, n0);
    m.xbar0 = Vec::Zero(1);
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("propagator");

TEST_CASE("init_value encodes the initial cost") {
    ModelSpec m = cubic_demo_model();
    m.xbar0 = Vec::Zero(2);
    QuadSet v0 = init_value(m);
    REQUIRE(v0.size() == 1);
    Mat expect = Mat::Zero(3, 3);
    expect(0, 0) = expect(1, 1) = 1.0;
    CHECK((v0.member(0).matrix() - expect).cwiseAbs().maxCoeff() == 0.0);

    m.xbar0 = (Vec(2) << 1.0, 2.0).finished();
    v0 = init_value(m);
    CHECK(eval_set(v0, m.xbar0).first == doctest::Approx(0.0));
    CHECK(eval_set(v0, Vec::Zero(2)).first == doctest::Approx(2.5));

    Xoshiro256pp rng(3);
    m.N0 = rand_spd(rng, 2);
    v0 = init_value(m);
    CHECK((unconstrained_minimizer(v0.member(0)) - m.xbar0).norm() < 1e-12);
    m.phi0 = 3.0;
    v0 = init_value(m);
    CHECK(eval_set(v0, m.xbar0).first == doctest::Approx(1.5));
}

TEST_CASE("step_gains with no disturbance channel is the identity") {
    Xoshiro256pp rng(7);
    ModelSpec m = cubic_demo_model();
    m.B = Mat::Zero(2, 1);
    const Mat n = rand_spd(rng, 2);
    const Vec l_t = rand_vec(rng, 2);
    const double phibar = rand_uniform(rng, -1.0, 1.0);
    const QuadForm member = QuadForm::from_blocks(n, l_t, phibar);

    const StepGains g = step_gains(member, m);
    CHECK(g.K.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.w_c.cwiseAbs().maxCoeff() == 0.0);
    CHECK((g.W - n).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((g.ell.transpose() - l_t).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(g.c == doctest::Approx(phibar));
}

TEST_CASE("step_gains scalar case matches the hand derivation") {
    // n = m = 1, N = 1, B = 1, Q_eta = 1, L = 0:
    // min_w 1/2 (a+w)^2 + 1/2 w^2 = 1/4 a^2, so W = 1/2 and K = -1/2.
    ModelSpec m = scalar_model(1.0, 1.0, 1.0);
    const QuadForm member = QuadForm::from_blocks(Mat::Identity(1, 1), Vec::Zero(1), 0.0);
    const StepGains g = step_gains(member, m);
    CHECK(g.K(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(g.w_c(0) == doctest::Approx(0.0));
    CHECK(g.W(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g.ell(0) == doctest::Approx(0.0));
    CHECK(g.c == doctest::Approx(0.0));
}

TEST_CASE("step_gains closed form equals a dense disturbance scan") {
    Xoshiro256pp rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        ModelSpec m = cubic_demo_model();
        m.B = rand_mat(rng, 2, 1, -1.0, 1.0);
        m.Q_eta = Mat::Constant(1, 1, rand_uniform(rng, 0.5, 2.0));
        const Mat n = rand_spd(rng, 2);
        const Vec l_t = rand_vec(rng, 2, -0.5, 0.5);
        const double phibar = rand_uniform(rng, -1.0, 1.0);
        const QuadForm member = QuadForm::from_blocks(n, l_t, phibar);
        const StepGains g = step_gains(member, m);

        const int w_points = 8001;
        const double w_lo = -10.0, w_hi = 10.0;
        const double dw = (w_hi - w_lo) / (w_points - 1);
        const double curv = m.Q_eta(0, 0) + (m.B.transpose() * n * m.B)(0, 0);
        const double grid_tol = curv * dw * dw / 8.0 + 1e-12;

        for (int t = 0; t < 100; ++t) {
            const Vec a = rand_vec(rng, 2, -2.0, 2.0);
            const double closed = 0.5 * a.dot(g.W * a) + g.ell.transpose().dot(a) + 0.5 * g.c;
            double scanned = 1e300;
            for (int wi = 0; wi < w_points; ++wi) {
                const double w = w_lo + dw * wi;
                const Vec shifted = a + m.B.col(0) * w;
                scanned = std::min(scanned, member.value(shifted) +
                                                0.5 * m.Q_eta(0, 0) * w * w);
            }
            CHECK(closed <= scanned + 1e-12);
            CHECK(closed >= scanned - grid_tol);
        }
    }
}

TEST_CASE("step_gains rejects a singular gain matrix") {
    ModelSpec m = scalar_model(1.0, 1.0, 1.0);
    // Member curvature -2 makes Q_eta + B^T N B = -1.
    const QuadForm bad = QuadForm::from_blocks(Mat::Constant(1, 1, -2.0), Vec::Zero(1), 0.0);
    CHECK_THROWS_AS(step_gains(bad, m), SingularGain);
}

TEST_CASE("linear measurement term is exact in both modes") {
    Xoshiro256pp rng(19);
    ModelSpec m = cubic_demo_model();
    const Mat C = rand_mat(rng, 1, 2);
    m.output = LinearOutput{C};
    const Vec y = Vec::Constant(1, 0.7);
    Window w(m.xbar0, Vec::Constant(2, 1.0), 8, 9);

    const QuadSet combined = measurement_expansion(y, m, w, MeasurementMode::Combined);
    const QuadSet split = measurement_expansion(y, m, w, MeasurementMode::Split);
    REQUIRE(combined.size() == 1);
    REQUIRE(split.size() == 1);
    for (int t = 0; t < 100; ++t) {
        const Vec x = rand_vec(rng, 2, -3.0, 3.0);
        const Vec r = y - C * x;
        const double want = 0.5 * r.dot(m.R * r);
        CHECK(eval_set(combined, x).first == doctest::Approx(want).epsilon(1e-12));
        CHECK(eval_set(split, x).first == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("split-mode expansion majorizes the measurement term") {
    ModelSpec m = cubic_demo_model();
    const Vec y = Vec::Constant(1, 0.2);
    Window w(m.xbar0, Vec::Constant(2, 1.0), 4, 9);
    const QuadSet meas = measurement_expansion(y, m, w, MeasurementMode::Split);
    CHECK(meas.size() == 16);  // cross terms times squared-output terms
    for (const Vec& x : w.grid_over({1})) {
        const Vec r = y - m.output_at(x);
        CHECK(eval_set(meas, x).first >= 0.5 * r.dot(m.R * r) - 1e-9);
    }
}

TEST_CASE("propagate cardinality follows the product law") {
    Xoshiro256pp rng(23);
    ModelSpec m = cubic_demo_model();
    Window w(m.xbar0, Vec::Constant(2, 1.0), 8, 9);
    std::vector<QuadForm> members;
    for (int i = 0; i < 3; ++i) {
        members.push_back(QuadForm::from_blocks(rand_spd(rng, 2), rand_vec(rng, 2), 0.0));
    }
    const QuadSet grown = propagate(QuadSet(members), Vec::Constant(1, 0.2), m, w);
    CHECK(grown.size() == 3 * 8);
}

TEST_CASE("propagate with nonlinear dynamics expands both dynamic terms") {
    ModelSpec m;
    m.n = 1;
    m.m = 1;
    m.p = 1;
    m.dynamics = NonlinearDynamics{
        [](const Vec& x) { return Vec(Vec::Constant(1, x(0) + 0.05 * x(0) * x(0))); }, {0}};
    m.B = Mat::Identity(1, 1);
    m.output = LinearOutput{Mat::Identity(1, 1)};
    m.R = Mat::Identity(1, 1);
    m.Q_eta = Mat::Identity(1, 1);
    m.N0 = Mat::Identity(1, 1);
    m.xbar0 = Vec::Zero(1);

    Window w(m.xbar0, Vec::Constant(1, 1.0), 4, 9);
    const QuadForm prior = init_value(m).member(0);
    const QuadForm wider = QuadForm::from_blocks(Mat::Constant(1, 1, 2.0), Vec::Zero(1), 0.5);
    const QuadSet grown = propagate(QuadSet({prior, wider}), Vec::Constant(1, 0.1), m, w);
    // Per member: 4 quadratic-term members x 4 linear-term members; the
    // linear measurement contributes a singleton.
    CHECK(grown.size() == 2 * 4 * 4 * 1);
}

TEST_CASE("one linear step agrees with the closed-form reference") {
    Xoshiro256pp rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        ModelSpec m;
        m.n = 2;
        m.m = 1;
        m.p = 1;
        const Mat F_fwd = 0.4 * rand_mat(rng, 2, 2) + 0.6 * Mat::Identity(2, 2);
        m.dynamics = AffineDynamics{F_fwd.inverse(), rand_vec(rng, 2, -0.1, 0.1)};
        m.B = rand_mat(rng, 2, 1, -0.5, 0.5);
        m.output = LinearOutput{rand_mat(rng, 1, 2)};
        m.R = Mat::Identity(1, 1);
        m.Q_eta = Mat::Identity(1, 1);
        m.N0 = rand_spd(rng, 2);
        m.xbar0 = rand_vec(rng, 2, -0.5, 0.5);

        const Vec y = Vec::Constant(1, rand_uniform(rng, -1.0, 1.0));
        Window w(m.xbar0, Vec::Constant(2, 10.0), 2, 3);
        const QuadSet v1 = propagate(init_value(m), y, m, w);
        REQUIRE(v1.size() == 1);
        const Vec estimate = unconstrained_minimizer(v1.member(0));
        const auto ref = riccati_filter(m, {y});
        CHECK((estimate - ref[1]).norm() < 1e-9);
    }
}

TEST_CASE("one cubic step matches the grid recursion given the same surface") {
    ModelSpec m = cubic_demo_model();
    Window w(m.xbar0, Vec::Constant(2, 1.0), 8, 9);
    const Vec y = Vec::Constant(1, 0.2);

    const QuadSet meas = measurement_expansion(y, m, w, MeasurementMode::Combined);
    const QuadSet v1 = propagate(init_value(m), y, m, w, MeasurementMode::Combined);

    GridSpec g;
    g.lo = (Vec(2) << -0.5, -1.5).finished();
    g.hi = (Vec(2) << 2.5, 1.5).finished();
    g.points = {201, 201};
    g.w_lo = -3.0;
    g.w_hi = 3.0;
    g.w_points = 241;
    const ValueGrid v0_grid = grid_from_function(g, [&](const Vec& x) {
        const Vec d = x - m.xbar0;
        return 0.5 * d.dot(d);
    });

    const std::function<double(const Vec&)> fitted = [&](const Vec& x) {
        return eval_set(meas, x).first;
    };
    const DpStepResult dp_fitted = dp_step(v0_grid, y, m, &fitted);
    const DpStepResult dp_true = dp_step(v0_grid, y, m);

    // Corner nodes whose backward image leaves the box are clamped; every
    // window node reads interior values only.
    int checked = 0;
    double max_abs = 0.0, min_margin = 1e300;
    for (std::size_t i = 0; i < dp_fitted.next.size(); ++i) {
        const Vec x = dp_fitted.next.node(i);
        if (!w.contains(x)) continue;
        ++checked;
        const double mp = eval_set(v1, x).first;
        max_abs = std::max(max_abs, std::abs(mp - dp_fitted.next.values[i]));
        min_margin = std::min(min_margin, mp - dp_true.next.values[i]);
    }
    REQUIRE(checked >= 200);
    // Recursion exactness: same fitted surface, difference within the
    // oracle's own resolution.
    CHECK(max_abs <= dp_fitted.resolution_bound);
    // Majorant direction vs the true measurement term. The oracle's bias is
    // one-sided upward, so its resolution bound appears on the right.
    CHECK(min_margin >= -(dp_true.resolution_bound + 1e-9));
}

TEST_CASE("vanishing measurement weight moves the estimate to the prediction") {
    ModelSpec m = cubic_demo_model();
    m.R = Mat::Constant(1, 1, 1e-9);
    Window w(m.xbar0, Vec::Constant(2, 1.0), 8, 9);
    const Vec y = Vec::Constant(1, 0.4);

    // Fitted measurement term stays of order R over the window.
    const QuadSet meas = measurement_expansion(y, m, w, MeasurementMode::Combined);
    double max_meas = 0.0, max_target = 0.0;
    for (const Vec& x : w.grid_over({1})) {
        const Vec r = y - m.output_at(x);
        max_target = std::max(max_target, 0.5 * r.dot(r));
        max_meas = std::max(max_meas, eval_set(meas, x).first);
    }
    CHECK(max_meas <= 1e-9 * max_target + 1e-6);

    const QuadSet v1 = propagate(init_value(m), y, m, w);
    Vec best_point = m.xbar0;
    double best = 1e300;
    for (const auto& e : argmin_catalog(v1, w)) {
        if (e.value < best) {
            best = e.value;
            best_point = e.point;
        }
    }
    // Dynamics-only prediction is the forward image of the prior center.
    const Vec pred = (Vec(2) << 1.0, 0.1).finished();
    CHECK((best_point - pred).norm() < (m.xbar0 - pred).norm());
    CHECK((best_point - pred).norm() < 1e-2);
}

TEST_SUITE_END();
