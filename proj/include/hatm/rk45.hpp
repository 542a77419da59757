#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hatm/ode_system.hpp"

namespace hatm {

struct StepUnderflow : std::runtime_error {
    double t;
    explicit StepUnderflow(double t_fail)
        : std::runtime_error("rk_reference: step size underflow at t = " + std::to_string(t_fail)),
          t(t_fail) {}
};

/// Accepted-node trajectory of the adaptive reference integrator.
struct OracleSolution {
    std::vector<double> t_nodes;
    std::vector<Eigen::VectorXd> states;
    int accepted_steps = 0;
    int rejected_steps = 0;

    /// Linear search for the exact node; states are compared at accepted nodes only.
    double t_end() const { return t_nodes.back(); }
};

/// Dormand-Prince 5(4) embedded pair with PI step-size control.
/// Deterministic for fixed inputs; nodes are the accepted steps from t=0.
inline OracleSolution rk_reference(const QuadraticOdeSystem& sys, double t_end,
                                   double rel_tol, double abs_tol) {
    if (!(t_end > 0.0)) throw std::invalid_argument("rk_reference: t_end must be > 0");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("rk_reference: tolerances must be > 0");
    sys.validate();

    // Butcher tableau (Dormand & Prince, order 5 with embedded order 4).
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // 5th-order minus embedded 4th-order weights.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OracleSolution sol;
    const int n = sys.state_count();
    double t = 0.0;
    Eigen::VectorXd y = sys.init;
    sol.t_nodes.push_back(0.0);
    sol.states.push_back(y);

    Eigen::VectorXd k1 = rhs_eval(sys, y);

    // Initial step from the scale of y and y'.
    double h = 1e-3 * t_end;
    {
        const double d0 = (y.array() / (abs_tol + rel_tol * y.array().abs())).matrix().norm();
        const double d1 = (k1.array() / (abs_tol + rel_tol * y.array().abs())).matrix().norm();
        if (d0 > 1e-5 && d1 > 1e-5) h = std::min(h, 0.01 * d0 / d1);
    }

    constexpr double kSafety = 0.9, kMinFactor = 0.2, kMaxFactor = 5.0, kBeta = 0.04;
    double err_prev = 1.0;

    while (t < t_end) {
        h = std::min(h, t_end - t);
        if (t + h <= t) throw StepUnderflow(t);

        const Eigen::VectorXd k2 = rhs_eval(sys, y + h * (a21 * k1));
        const Eigen::VectorXd k3 = rhs_eval(sys, y + h * (a31 * k1 + a32 * k2));
        const Eigen::VectorXd k4 = rhs_eval(sys, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXd k5 =
            rhs_eval(sys, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXd k6 =
            rhs_eval(sys, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::VectorXd y_new =
            y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXd k7 = rhs_eval(sys, y_new);  // FSAL

        const Eigen::VectorXd err_vec =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const Eigen::ArrayXd scale =
            abs_tol + rel_tol * y.array().abs().max(y_new.array().abs());
        const double err_norm =
            std::sqrt((err_vec.array() / scale).square().sum() / static_cast<double>(n));

        if (err_norm <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7;
            sol.t_nodes.push_back(t);
            sol.states.push_back(y);
            ++sol.accepted_steps;
            // PI controller: shrink/grow from the current and previous error.
            double factor = kSafety * std::pow(std::max(err_norm, 1e-16), -0.2 + kBeta) *
                            std::pow(err_prev, kBeta);
            h *= std::clamp(factor, kMinFactor, kMaxFactor);
            err_prev = std::max(err_norm, 1e-16);
        } else {
            ++sol.rejected_steps;
            h *= std::clamp(kSafety * std::pow(err_norm, -0.2), kMinFactor, 1.0);
        }
    }
    return sol;
}

}  // namespace hatm
