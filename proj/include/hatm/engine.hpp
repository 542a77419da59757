#pragma once

#include <stdexcept>
#include <vector>

#include "hatm/bipoly.hpp"
#include "hatm/laplace.hpp"
#include "hatm/ode_system.hpp"

namespace hatm {

/// Hard cap on the series order: keeps the Laplace-layer factorials and
/// per-component term counts well inside double range.
inline constexpr int kMaxOrder = 30;

/// chi switch of the order-m deformation equation: 0 for m <= 1, else 1.
inline int chi(int m) {
    if (m < 1) throw std::invalid_argument("chi: m must be >= 1");
    return m <= 1 ? 0 : 1;
}

/// Which route the order update takes. Both must agree coefficient-wise;
/// the time-domain route replaces (1/s)L[.] followed by an overall inverse
/// transform with direct antiderivatives.
enum class SolvePath { Transform, TimeDomain };

/// Per-order series components x_{i,0} .. x_{i,N} for every state, as
/// polynomials in hbar and t.
struct DeformationSeries {
    QuadraticOdeSystem system;
    int order = 0;
    std::vector<std::vector<BiPoly>> components;  // [state][order]

    const BiPoly& component(int state, int m) const { return components[state][m]; }
};

/// The order-m right-hand sides (one transform-domain image per state):
///   R_i = L[x_{i,m-1}] - x_{i,m-1}(0)/s - (1-chi_m) c_i/s^2
///         - (1/s) L[sum_j A_ij x_{j,m-1}]
///         - (1/s) L[sum coef * sum_{r=0}^{m-1} x_{j,r} x_{k,m-1-r}]
/// Components 0 .. m-1 of `series` must be present.
inline std::vector<LaplaceImage> deformation_rhs(const DeformationSeries& series, int m) {
    if (m < 1) throw std::invalid_argument("deformation_rhs: m must be >= 1");
    const auto& sys = series.system;
    const int n = sys.state_count();
    std::vector<LaplaceImage> rhs(n);

    for (int i = 0; i < n; ++i) {
        const BiPoly& prev = series.component(i, m - 1);
        LaplaceImage image = laplace(prev);
        image = laplace_add(image, laplace_scale(laplace(poly_at_t0(prev)), -1.0));
        if (chi(m) == 0 && sys.constant[i] != 0.0)
            image.add_term(2, BiPoly::constant(-sys.constant[i]));

        BiPoly under_integral;  // everything entering through a 1/s factor
        for (int j = 0; j < n; ++j)
            if (sys.linear(i, j) != 0.0)
                under_integral = poly_add(
                    under_integral, poly_scale(series.component(j, m - 1), -sys.linear(i, j)));
        for (const auto& q : sys.quadratic) {
            if (q.target != i) continue;
            BiPoly conv;
            for (int r = 0; r < m; ++r)
                conv = poly_add(conv, poly_mul(series.component(q.j, r),
                                               series.component(q.k, m - 1 - r)));
            under_integral = poly_add(under_integral, poly_scale(conv, -q.coef));
        }
        image = laplace_add(image, div_s(laplace(under_integral)));
        rhs[i] = std::move(image);
    }
    return rhs;
}

/// Order-m update: x_{i,m} = chi_m x_{i,m-1} + hbar * Linv[R_i].
inline std::vector<BiPoly> next_order(const DeformationSeries& series, int m,
                                      SolvePath path = SolvePath::Transform) {
    const auto& sys = series.system;
    const int n = sys.state_count();
    std::vector<BiPoly> out(n);

    if (path == SolvePath::Transform) {
        auto rhs = deformation_rhs(series, m);
        for (int i = 0; i < n; ++i) {
            BiPoly x = poly_shift_hbar(inverse_laplace(rhs[i]));
            if (chi(m) == 1) x = poly_add(x, series.component(i, m - 1));
            out[i] = std::move(x);
        }
        return out;
    }

    // Time-domain route: Linv[R_i] computed without the transform layer.
    for (int i = 0; i < n; ++i) {
        const BiPoly& prev = series.component(i, m - 1);
        BiPoly correction = poly_sub(prev, poly_at_t0(prev));
        if (chi(m) == 0 && sys.constant[i] != 0.0)
            correction = poly_sub(correction,
                                  BiPoly::term(0, 1, sys.constant[i]));
        BiPoly under_integral;
        for (int j = 0; j < n; ++j)
            if (sys.linear(i, j) != 0.0)
                under_integral = poly_add(
                    under_integral, poly_scale(series.component(j, m - 1), -sys.linear(i, j)));
        for (const auto& q : sys.quadratic) {
            if (q.target != i) continue;
            BiPoly conv;
            for (int r = 0; r < m; ++r)
                conv = poly_add(conv, poly_mul(series.component(q.j, r),
                                               series.component(q.k, m - 1 - r)));
            under_integral = poly_add(under_integral, poly_scale(conv, -q.coef));
        }
        correction = poly_add(correction, poly_integrate_t(under_integral));
        BiPoly x = poly_shift_hbar(correction);
        if (chi(m) == 1) x = poly_add(x, prev);
        out[i] = std::move(x);
    }
    return out;
}

/// Run the full recurrence through order N. Deterministic; the zero-order
/// guess of every state is its initial value.
inline DeformationSeries solve(const QuadraticOdeSystem& sys, int order,
                               SolvePath path = SolvePath::Transform) {
    if (order < 0) throw std::invalid_argument("solve: order must be >= 0");
    if (order > kMaxOrder)
        throw std::invalid_argument("solve: order must be <= " + std::to_string(kMaxOrder));
    sys.validate();

    DeformationSeries series;
    series.system = sys;
    series.order = order;
    const int n = sys.state_count();
    series.components.assign(n, {});
    for (int i = 0; i < n; ++i) {
        series.components[i].reserve(order + 1);
        series.components[i].push_back(BiPoly::constant(sys.init[i]));
    }
    for (int m = 1; m <= order; ++m) {
        auto xs = next_order(series, m, path);
        for (int i = 0; i < n; ++i) series.components[i].push_back(std::move(xs[i]));
    }
    return series;
}

/// Order-N approximation for one state: sum of components 0 .. N.
inline BiPoly partial_sum(const DeformationSeries& series, int state) {
    BiPoly s;
    for (const auto& c : series.components[state]) s = poly_add(s, c);
    return s;
}

/// Telescoping identity: sum_{m=1}^N [x_m - chi_m x_{m-1}] - x_N must vanish.
/// Returns the max coefficient-norm defect over states.
inline Real telescoping_check(const DeformationSeries& series) {
    Real worst = 0.0;
    for (int i = 0; i < series.system.state_count(); ++i) {
        BiPoly acc;
        for (int m = 1; m <= series.order; ++m) {
            acc = poly_add(acc, series.component(i, m));
            if (chi(m) == 1) acc = poly_sub(acc, series.component(i, m - 1));
        }
        worst = std::max(worst, poly_max_coeff_diff(acc, series.component(i, series.order)));
    }
    return worst;
}

}  // namespace hatm
