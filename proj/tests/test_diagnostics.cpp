#include <doctest.h>

#include <cmath>

#include "hatm/diagnostics.hpp"
#include "test_support.hpp"

using namespace hatm;

namespace {

// x' = c has the exact polynomial solution x0 + c t; every partial sum of
// order >= 1 at hbar = -1 reproduces it, so residuals vanish there.
QuadraticOdeSystem constant_rate_system() {
    QuadraticOdeSystem sys;
    sys.names = {"x", "y"};
    sys.init = Eigen::Vector2d(1.0, -2.0);
    sys.constant = Eigen::Vector2d(0.5, 3.0);
    sys.linear = Eigen::Matrix2d::Zero();
    return sys;
}

}  // namespace

TEST_CASE("hbar curve samples the partial sum") {
    const auto series = solve(hiv_cd8_system(), 5);
    const auto grid = uniform_grid(-2.0, 0.0, 41);
    const auto curve_T = hbar_curve(series, T, 1.0, grid);
    REQUIRE(curve_T.value.size() == grid.size());
    // hbar = 0 keeps only the zero-order guess
    CHECK(curve_T.value.back() == doctest::Approx(1000.0));
    const auto curve_Z = hbar_curve(series, Z, 1.0, grid);
    CHECK(curve_Z.value.back() == doctest::Approx(500.0));
    CHECK_THROWS_AS(hbar_curve(series, T, 1.0, {}), std::invalid_argument);
}

TEST_CASE("plateau on a constant curve covers the whole grid") {
    HbarCurve curve;
    curve.hbar = uniform_grid(-2.0, 0.0, 21);
    curve.value.assign(21, 7.5);
    const auto interval = detect_plateau(curve);
    REQUIRE(interval.has_value());
    CHECK(interval->lo == doctest::Approx(-2.0));
    CHECK(interval->hi == doctest::Approx(0.0));
}

TEST_CASE("no plateau on a strictly sloped curve") {
    HbarCurve curve;
    curve.hbar = uniform_grid(-2.0, 0.0, 21);
    for (double h : curve.hbar) curve.value.push_back(h);
    CHECK_FALSE(detect_plateau(curve, 1e-6).has_value());
}

TEST_CASE("plateau detection needs at least 3 samples") {
    HbarCurve curve;
    curve.hbar = {0.0, 1.0};
    curve.value = {0.0, 0.0};
    CHECK_THROWS_AS(detect_plateau(curve), std::invalid_argument);
}

TEST_CASE("plateau detection is invariant under affine value maps") {
    const auto series = solve(hiv_cd8_system(), 5);
    const auto grid = uniform_grid(-2.0, 0.0, 201);
    for (int state : {T, I, V, Z, Za}) {
        auto curve = hbar_curve(series, state, 1.0, grid);
        const auto base = detect_plateau(curve);
        for (const auto& [a, b] : {std::pair{40.0, 3.0}, std::pair{-0.25, 1e4}}) {
            auto mapped = curve;
            for (double& v : mapped.value) v = a * v + b;
            const auto got = detect_plateau(mapped);
            REQUIRE(got.has_value() == base.has_value());
            if (base) {
                CHECK(got->lo == doctest::Approx(base->lo));
                CHECK(got->hi == doctest::Approx(base->hi));
            }
        }
    }
}

TEST_CASE("order-5 T plateau overlaps the flat stretch of the curve") {
    const auto series = solve(hiv_cd8_system(), 5);
    const auto curve = hbar_curve(series, T, 1.0, uniform_grid(-2.0, 0.0, 201));
    const auto interval = detect_plateau(curve);
    REQUIRE(interval.has_value());
    CHECK(interval->lo <= -0.9);
    CHECK(interval->hi >= -0.2);
}

TEST_CASE("residual examples at hbar = 0") {
    // At hbar = 0 the partial sum is the initial value, so E = -rhs(init).
    const auto series = solve(hiv_cd8_system(), 5);
    const Eigen::VectorXd e = residual(series, 0.0, 0.0);
    CHECK(e[T] == doctest::Approx(0.024));
    CHECK(e[V] == doctest::Approx(3.0));
    CHECK(e[I] == doctest::Approx(-0.024).epsilon(1e-9));
}

TEST_CASE("exact polynomial solutions have zero residual at hbar = -1") {
    const auto series = solve(constant_rate_system(), 3);
    for (double t : {0.0, 0.5, 2.0}) {
        const Eigen::VectorXd e = residual(series, -1.0, t);
        CHECK(std::abs(e[0]) <= 1e-14);
        CHECK(std::abs(e[1]) <= 1e-14);
    }
    CHECK(fit_leading_exponent(series, 0, -1.0) ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("residual grid carries order, hbar and samples") {
    const auto series = solve(hiv_cd8_system(), 3);
    const auto grid = residual_grid(series, -0.8, uniform_grid(0.0, 1.0, 11));
    CHECK(grid.order == 3);
    CHECK(grid.hbar == -0.8);
    REQUIRE(grid.values.size() == 11);
    CHECK(grid.values[0].size() == 5);
}

TEST_CASE("sup residual argument checks and monotone decrease in order") {
    const auto s5 = solve(hiv_cd8_system(), 5);
    const auto s10 = solve(hiv_cd8_system(), 10);
    CHECK_THROWS_AS(sup_residual(s5, -0.8, 1.0, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(sup_residual(s5, -0.8, 0.0, 1.0, 1), std::invalid_argument);
    const Eigen::VectorXd r5 = sup_residual(s5, -0.8, 0.0, 1.0, 101);
    const Eigen::VectorXd r10 = sup_residual(s10, -0.8, 0.0, 1.0, 101);
    for (int i = 0; i < 5; ++i) CHECK(r10[i] < r5[i]);
}

TEST_CASE("optimal hbar lands inside the flat region") {
    const auto series = solve(hiv_cd8_system(), 5);
    CHECK_THROWS_AS(optimal_hbar(series, {}, 0.0, 1.0), std::invalid_argument);
    CHECK(optimal_hbar(series, {-0.7}, 0.0, 1.0) == -0.7);
    const double h = optimal_hbar(series, uniform_grid(-2.0, 0.0, 201), 0.0, 1.0);
    CHECK(h >= -0.9);
    CHECK(h <= -0.2);
}

TEST_CASE("leading residual exponent tracks the truncation order at hbar = -1") {
    CHECK(fit_leading_exponent(solve(hiv_cd8_system(), 5), T, -1.0) ==
          doctest::Approx(5.0).epsilon(0.05));
    CHECK(fit_leading_exponent(solve(hiv_cd8_system(), 8), V, -1.0) ==
          doctest::Approx(8.0).epsilon(0.05));
}

TEST_CASE("reference integrator starts at the initial state") {
    const auto sol = rk_reference(hiv_cd8_system(), 1.0, 1e-10, 1e-12);
    CHECK(sol.t_nodes.front() == 0.0);
    CHECK(sol.states.front()[T] == 1000.0);
    CHECK(sol.t_end() == doctest::Approx(1.0));
    CHECK(sol.accepted_steps + 1 == static_cast<int>(sol.t_nodes.size()));
}

TEST_CASE("reference integrator reproduces exp decay") {
    QuadraticOdeSystem sys;
    sys.names = {"x"};
    sys.init = Eigen::VectorXd::Ones(1);
    sys.constant = Eigen::VectorXd::Zero(1);
    sys.linear = -Eigen::MatrixXd::Ones(1, 1);
    const auto sol = rk_reference(sys, 1.0, 1e-12, 1e-14);
    CHECK(sol.states.back()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("reference integrator argument checks") {
    CHECK_THROWS_AS(rk_reference(hiv_cd8_system(), 0.0, 1e-8, 1e-10), std::invalid_argument);
    CHECK_THROWS_AS(rk_reference(hiv_cd8_system(), 1.0, 0.0, 1e-10), std::invalid_argument);
}

TEST_CASE("tightening the oracle tolerance does not hurt accuracy") {
    const auto sys = hiv_cd8_system();
    const auto tight = rk_reference(sys, 1.0, 1e-12, 1e-14);
    const Eigen::VectorXd truth = tight.states.back();
    double prev_err = std::numeric_limits<double>::infinity();
    for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
        const auto sol = rk_reference(sys, 1.0, tol, tol * 1e-2);
        const double err = (sol.states.back() - truth).norm();
        CHECK(err <= std::max(prev_err, 1e-12));
        prev_err = err;
    }
}

TEST_CASE("comparison against the oracle") {
    const auto sys = hiv_cd8_system();
    const auto oracle = rk_reference(sys, 1.0, 1e-10, 1e-12);
    const auto series = solve(sys, 10);
    CHECK_THROWS_AS(compare(series, -1.0, oracle, 0.0, 2.0), std::invalid_argument);
    const Eigen::VectorXd err = compare(series, -1.0, oracle, 0.0, 0.5);
    for (int i = 0; i < 5; ++i) CHECK(err[i] <= 1e-3);

    // degenerate range containing only the initial node: exact agreement
    const Eigen::VectorXd at0 = compare(series, -1.0, oracle, 0.0, 0.0);
    CHECK(at0.maxCoeff() == 0.0);
}

TEST_CASE("comparison is exact for an exact polynomial solution") {
    const auto sys = constant_rate_system();
    const auto oracle = rk_reference(sys, 2.0, 1e-10, 1e-12);
    const auto series = solve(sys, 2);
    const Eigen::VectorXd err = compare(series, -1.0, oracle, 0.0, 2.0);
    CHECK(err.maxCoeff() <= 1e-12);
}
