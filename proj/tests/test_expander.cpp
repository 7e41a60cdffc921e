#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "minplus/expander.hpp"
#include "test_support.hpp"

using namespace minplus;
using namespace testsupport;

namespace {

double cubic40(double x) { return x * x * x / 40.0; }

ScalarField cubic_field_1d() {
    return ScalarField::custom([](const Vec& x) { return cubic40(x(0)); }, {0});
}

// Largest (min-of-set - g) over the midpoints of the window's sub-boxes.
double max_center_gap(const ScalarField& g, const QuadSet& s, const Window& w) {
    double worst = -1e300;
    for (const Box& box : partition_boxes(w, g.active())) {
        Vec mid = 0.5 * (box.lo + box.hi);
        worst = std::max(worst, eval_set(s, mid).first - g(mid));
    }
    return worst;
}

// Smallest (min-of-set - g) over every full-window sample: the majorant
// margin, negative on a violation.
double majorant_margin(const ScalarField& g, const QuadSet& s, const Window& w) {
    double margin = 1e300;
    for (const Vec& x : w.grid_over(g.active())) {
        margin = std::min(margin, eval_set(s, x).first - g(x));
    }
    return margin;
}

}  // namespace

TEST_SUITE_BEGIN("expander");

TEST_CASE("window validates its parameters") {
    const Vec c = Vec::Zero(2);
    CHECK_THROWS(Window(c, Vec::Constant(2, -1.0), 4, 9));
    CHECK_THROWS(Window(c, Vec::Constant(2, 1.0), 0, 9));
    CHECK_THROWS(Window(c, Vec::Constant(2, 1.0), 4, 2));
    CHECK_THROWS_AS(Window(c, Vec::Constant(1, 1.0), 4, 9), DimensionMismatch);

    Window w(c, Vec::Constant(2, 1.5), 4, 9);
    const auto axis = w.axis_samples(0);
    CHECK(axis.size() == 33);  // 4 * (9 - 1) + 1
    CHECK(axis.front() == doctest::Approx(-1.5));
    CHECK(axis.back() == doctest::Approx(1.5));
    CHECK(w.contains(Vec::Zero(2)));
    CHECK(!w.contains(Vec::Constant(2, 2.0)));
    CHECK(w.full_grid().size() == 33 * 33);
}

TEST_CASE("partition boxes tile the window along active dimensions") {
    Window w(Vec::Zero(2), Vec::Constant(2, 1.0), 4, 9);
    const auto boxes = partition_boxes(w, {1});
    REQUIRE(boxes.size() == 4);
    CHECK(boxes.front().lo(1) == doctest::Approx(-1.0));
    CHECK(boxes.back().hi(1) == doctest::Approx(1.0));
    CHECK(boxes[1].lo(1) == doctest::Approx(boxes[0].hi(1)));
    // Inactive dimension spans the whole window.
    CHECK(boxes[2].lo(0) == doctest::Approx(-1.0));
    CHECK(boxes[2].hi(0) == doctest::Approx(1.0));

    CHECK(partition_boxes(w, {0, 1}).size() == 16);
}

TEST_CASE("solve_constrained_lsq recovers an exact quadratic") {
    Mat pts(9, 1);
    Vec targets(9);
    for (int i = 0; i < 9; ++i) {
        const double x = -1.0 + 0.25 * i;
        pts(i, 0) = x;
        targets(i) = 2.0 * x * x + 0.5 * x - 1.0;
    }
    const Vec z = solve_constrained_lsq(pts, targets);
    CHECK(z(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(z(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(z(2) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("solve_constrained_lsq matches the normal equations when convex") {
    Mat pts(20, 1);
    Vec targets(20);
    for (int i = 0; i < 20; ++i) {
        const double x = 1.0 + 2.0 * i / 19.0;
        pts(i, 0) = x;
        targets(i) = cubic40(x);
    }
    const Vec z = solve_constrained_lsq(pts, targets);

    // Independent route: monomial design + normal equations.
    Mat design(20, 3);
    for (int i = 0; i < 20; ++i) {
        design(i, 0) = pts(i, 0) * pts(i, 0);
        design(i, 1) = pts(i, 0);
        design(i, 2) = 1.0;
    }
    const Vec z_ref = (design.transpose() * design).ldlt().solve(design.transpose() * targets);
    const double res = (design * z - targets).norm();
    const double res_ref = (design * z_ref - targets).norm();
    CHECK(std::abs(res - res_ref) < 1e-9);
    CHECK((z - z_ref).norm() < 1e-8);
}

TEST_CASE("solve_constrained_lsq clamps constant targets to the convexity floor") {
    Mat pts(9, 1);
    Vec targets(9);
    for (int i = 0; i < 9; ++i) {
        pts(i, 0) = -1.0 + 0.25 * i;  // symmetric about zero
        targets(i) = 4.2;
    }
    const Vec z = solve_constrained_lsq(pts, targets);
    CHECK(z(0) == doctest::Approx(0.5e-8).epsilon(1e-6));  // a2 = floor/2 in 1/2-form
    CHECK(std::abs(z(1)) < 1e-12);
    CHECK(z(2) == doctest::Approx(4.2).epsilon(1e-9));
}

TEST_CASE("solve_constrained_lsq reports rank deficiency") {
    Mat pts = Mat::Zero(6, 1);  // one repeated sample point
    Vec targets = Vec::Zero(6);
    CHECK_THROWS_AS(solve_constrained_lsq(pts, targets), RankDeficient);
}

TEST_CASE("fit_partition reproduces a quadratic exactly") {
    ScalarField g = ScalarField::custom([](const Vec& x) { return x(0) * x(0); }, {0});
    Window w(Vec::Constant(1, 0.5), Vec::Constant(1, 1.0), 4, 9);
    const auto boxes = partition_boxes(w, g.active());
    const QuadForm fit = fit_partition(g, w, boxes[1]);
    for (const Vec& x : w.grid_over(g.active())) {
        CHECK(fit.value(x) == doctest::Approx(x(0) * x(0)).epsilon(1e-9));
    }
}

TEST_CASE("fit_partition majorizes a constant with floored curvature") {
    ScalarField g = ScalarField::custom([](const Vec&) { return 2.5; }, {0});
    Window w(Vec::Zero(1), Vec::Constant(1, 1.0), 2, 9);
    const QuadForm fit = fit_partition(g, w, partition_boxes(w, g.active())[0]);
    CHECK(fit.q11()(0, 0) >= 1e-8);
    for (const Vec& x : w.grid_over(g.active())) {
        CHECK(fit.value(x) >= 2.5 - 1e-9);
        CHECK(fit.value(x) <= 2.5 + 1e-6);
    }
}

TEST_CASE("cubic expansion majorizes with a small center gap") {
    ScalarField g = cubic_field_1d();
    Window w(Vec::Constant(1, 2.0), Vec::Constant(1, 1.0), 8, 9);
    const QuadSet s = expand(g, w);
    REQUIRE(s.size() == 8);
    CHECK(majorant_margin(g, s, w) >= -1e-9);
    // Dense-sample measurement: the min of the set stays within 2e-4 of the
    // cubic at the sub-box centers on this window.
    CHECK(max_center_gap(g, s, w) < 2e-4);
}

TEST_CASE("expansion with one partition recovers a quadratic field") {
    ScalarField g = ScalarField::custom(
        [](const Vec& x) { return 1.5 * x(0) * x(0) - x(0) + 0.25; }, {0});
    Window w(Vec::Zero(1), Vec::Constant(1, 1.0), 1, 9);
    const QuadSet s = expand(g, w);
    REQUIRE(s.size() == 1);
    for (const Vec& x : w.grid_over(g.active())) {
        CHECK(eval_set(s, x).first == doctest::Approx(g(x)).epsilon(1e-9));
    }
}

TEST_CASE("output residual expansion majorizes the residual field") {
    const Mat R = Mat::Constant(1, 1, 1.0);
    const Vec y = Vec::Constant(1, 0.2);
    ScalarField g = ScalarField::output_residual(
        [](const Vec& x) { return Vec(Vec::Constant(1, cubic40(x(1)))); }, R, y, {1});
    Window w((Vec(2) << 1.0, 2.0).finished(), Vec::Constant(2, 1.0), 8, 9);
    const QuadSet s = expand(g, w);
    REQUIRE(s.size() == 8);
    CHECK(majorant_margin(g, s, w) >= -1e-9);
    CHECK(max_center_gap(g, s, w) < 5e-3);
}

TEST_CASE("every expansion member meets the convexity floor on active dims") {
    ScalarField g = cubic_field_1d();
    Window w(Vec::Constant(1, -2.0), Vec::Constant(1, 1.0), 8, 9);  // concave side
    const QuadSet s = expand(g, w);
    for (const QuadForm& m : s.members()) {
        CHECK(m.q11()(0, 0) >= 1e-8 * (1.0 - 1e-9));
    }
    CHECK(majorant_margin(g, s, w) >= -1e-9);
}

TEST_CASE("doubling partitions never widens the center gap") {
    ScalarField g = cubic_field_1d();
    double prev = 1e300;
    for (int L : {2, 4, 8, 16}) {
        Window w(Vec::Constant(1, 2.0), Vec::Constant(1, 1.0), L, 9);
        const QuadSet s = expand(g, w);
        const double gap = max_center_gap(g, s, w);
        CHECK(gap <= prev + 1e-12);
        prev = gap;
    }
}

TEST_CASE("inactive dimensions stay constant in the expansion") {
    ScalarField g = ScalarField::custom([](const Vec& x) { return cubic40(x(1)); }, {1});
    Window w(Vec::Zero(2), Vec::Constant(2, 1.0), 4, 9);
    const QuadSet s = expand(g, w);
    for (const QuadForm& m : s.members()) {
        CHECK(m.q11().row(0).cwiseAbs().maxCoeff() == 0.0);
        CHECK(m.q11().col(0).cwiseAbs().maxCoeff() == 0.0);
        CHECK(m.q12()(0) == 0.0);
    }
    // Constant along x1 for fixed x2.
    Vec a = (Vec(2) << -0.7, 0.3).finished();
    Vec b = (Vec(2) << 0.9, 0.3).finished();
    CHECK(eval_set(s, a).first == doctest::Approx(eval_set(s, b).first).epsilon(1e-15));
}

TEST_CASE("fit_partition reports non-finite fields") {
    ScalarField g = ScalarField::custom(
        [](const Vec& x) { return 1.0 / (x(0) - 0.5); }, {0});
    Window w(Vec::Constant(1, 0.5), Vec::Constant(1, 1.0), 1, 9);
    CHECK_THROWS_AS(expand(g, w), FitFailed);
}

TEST_SUITE_END();
