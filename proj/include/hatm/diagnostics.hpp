#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hatm/engine.hpp"
#include "hatm/rk45.hpp"

namespace hatm {

/// Partial-sum value at fixed t sampled over an hbar grid.
struct HbarCurve {
    int state = 0;
    double t_fixed = 0.0;
    std::vector<double> hbar;
    std::vector<double> value;
};

/// Flat segment of an hbar-curve: the a-posteriori convergence region.
struct ConvergenceInterval {
    int state = 0;
    double lo = 0.0;
    double hi = 0.0;
    int order = 0;
};

/// Residual error functions sampled on a t grid at fixed hbar.
struct ResidualGrid {
    int order = 0;
    double hbar = 0.0;
    std::vector<double> t_samples;
    std::vector<Eigen::VectorXd> values;  // one n-vector per t sample
};

inline std::vector<double> uniform_grid(double lo, double hi, int samples) {
    std::vector<double> g(samples);
    for (int i = 0; i < samples; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    return g;
}

inline HbarCurve hbar_curve(const DeformationSeries& series, int state, double t_fixed,
                            const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("hbar_curve: empty grid");
    HbarCurve curve;
    curve.state = state;
    curve.t_fixed = t_fixed;
    curve.hbar = grid;
    const BiPoly sum = partial_sum(series, state);
    curve.value.reserve(grid.size());
    for (double h : grid) curve.value.push_back(poly_eval(sum, h, t_fixed));
    return curve;
}

/// Default slope tolerance for detect_plateau, calibrated so the HIV preset's
/// flat segments land on the reported convergence regions.
inline constexpr double kDefaultPlateauTol = 1e-2;

/// Widest contiguous segment where |finite-difference slope| stays below
/// rel_slope_tol times the curve's value range. Normalizing by the range
/// (the plotted extent of the curve) makes the detector invariant under
/// affine maps of the value axis. At least 3 consecutive qualifying
/// samples are required.
inline std::optional<ConvergenceInterval> detect_plateau(const HbarCurve& curve,
                                                         double rel_slope_tol = kDefaultPlateauTol) {
    const auto n = curve.hbar.size();
    if (n < 3) throw std::invalid_argument("detect_plateau: need at least 3 samples");

    const auto [min_it, max_it] = std::minmax_element(curve.value.begin(), curve.value.end());
    const double scale = *max_it - *min_it;  // 0 for a constant curve: all slopes qualify
    const double slope_tol = rel_slope_tol * scale;

    std::optional<ConvergenceInterval> best;
    std::size_t run_start = 0;
    std::size_t flat_slopes = 0;  // consecutive qualifying slopes ending at current edge
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double slope =
            (curve.value[i + 1] - curve.value[i]) / (curve.hbar[i + 1] - curve.hbar[i]);
        if (std::abs(slope) <= slope_tol) {
            if (flat_slopes == 0) run_start = i;
            ++flat_slopes;
            if (flat_slopes >= 2) {  // 3 consecutive points
                const double lo = curve.hbar[run_start];
                const double hi = curve.hbar[i + 1];
                if (!best || hi - lo > best->hi - best->lo)
                    best = ConvergenceInterval{curve.state, lo, hi, 0};
            }
        } else {
            flat_slopes = 0;
        }
    }
    return best;
}

/// Residual error functions E_i(t) = d/dt S_i - rhs_i(S) evaluated at (hbar, t),
/// where S is the vector of partial sums.
inline Eigen::VectorXd residual(const DeformationSeries& series, double hbar, double t) {
    const int n = series.system.state_count();
    Eigen::VectorXd s(n), ds(n);
    for (int i = 0; i < n; ++i) {
        const BiPoly sum = partial_sum(series, i);
        s[i] = poly_eval(sum, hbar, t);
        ds[i] = poly_eval(poly_diff_t(sum), hbar, t);
    }
    return ds - rhs_eval(series.system, s);
}

inline ResidualGrid residual_grid(const DeformationSeries& series, double hbar,
                                  const std::vector<double>& t_samples) {
    ResidualGrid grid;
    grid.order = series.order;
    grid.hbar = hbar;
    grid.t_samples = t_samples;
    grid.values.reserve(t_samples.size());
    for (double t : t_samples) grid.values.push_back(residual(series, hbar, t));
    return grid;
}

/// Per-state max |E_i| over a uniform sample grid on [t_lo, t_hi].
inline Eigen::VectorXd sup_residual(const DeformationSeries& series, double hbar, double t_lo,
                                    double t_hi, int samples) {
    if (!(t_lo < t_hi)) throw std::invalid_argument("sup_residual: need t_lo < t_hi");
    if (samples < 2) throw std::invalid_argument("sup_residual: need samples >= 2");
    Eigen::VectorXd sup = Eigen::VectorXd::Zero(series.system.state_count());
    for (double t : uniform_grid(t_lo, t_hi, samples))
        sup = sup.cwiseMax(residual(series, hbar, t).cwiseAbs());
    return sup;
}

/// Integrated squared residual over [t_lo, t_hi] (trapezoid rule, 101 nodes),
/// summed over states.
inline double residual_objective(const DeformationSeries& series, double hbar, double t_lo,
                                 double t_hi) {
    constexpr int kNodes = 101;
    const auto grid = uniform_grid(t_lo, t_hi, kNodes);
    const double dt = (t_hi - t_lo) / (kNodes - 1);
    double acc = 0.0;
    for (int i = 0; i < kNodes; ++i) {
        const double w = (i == 0 || i == kNodes - 1) ? 0.5 : 1.0;
        acc += w * dt * residual(series, hbar, grid[i]).squaredNorm();
    }
    return acc;
}

/// Grid point minimizing the integrated squared residual; ties break toward
/// the point closest to -1.
inline double optimal_hbar(const DeformationSeries& series, const std::vector<double>& grid,
                           double t_lo, double t_hi) {
    if (grid.empty()) throw std::invalid_argument("optimal_hbar: empty grid");
    double best_h = grid.front();
    double best_obj = residual_objective(series, best_h, t_lo, t_hi);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double obj = residual_objective(series, grid[i], t_lo, t_hi);
        const bool better = obj < best_obj ||
                            (obj == best_obj &&
                             std::abs(grid[i] + 1.0) < std::abs(best_h + 1.0));
        if (better) {
            best_obj = obj;
            best_h = grid[i];
        }
    }
    return best_h;
}

/// Per-state max relative error against the oracle at its accepted nodes
/// inside [t_lo, t_hi]; no interpolation between nodes.
inline Eigen::VectorXd compare(const DeformationSeries& series, double hbar,
                               const OracleSolution& oracle, double t_lo, double t_hi) {
    if (t_lo < oracle.t_nodes.front() || t_hi > oracle.t_end() + 1e-12)
        throw std::invalid_argument("compare: range outside oracle span");
    const int n = series.system.state_count();
    std::vector<BiPoly> sums;
    sums.reserve(n);
    for (int i = 0; i < n; ++i) sums.push_back(partial_sum(series, i));

    Eigen::VectorXd worst = Eigen::VectorXd::Zero(n);
    for (std::size_t node = 0; node < oracle.t_nodes.size(); ++node) {
        const double t = oracle.t_nodes[node];
        if (t < t_lo || t > t_hi) continue;
        for (int i = 0; i < n; ++i) {
            const double ref = oracle.states[node][i];
            const double err = std::abs(poly_eval(sums[i], hbar, t) - ref) /
                               std::max(1.0, std::abs(ref));
            worst[i] = std::max(worst[i], err);
        }
    }
    return worst;
}

/// Least-squares slope of log|E(t)| vs log t over geometric samples in
/// [t_lo, t_hi]: the apparent leading exponent of the residual near t = 0.
/// The default window starts at t = 0.1; below that the high-order residual
/// of the HIV preset sits under the double-precision cancellation floor of
/// the partial-sum evaluation (state values ~1e3 give |E| noise ~1e-12).
inline double fit_leading_exponent(const DeformationSeries& series, int state, double hbar,
                                   double t_lo = 0.1, double t_hi = 1.0, int samples = 12) {
    if (!(0.0 < t_lo && t_lo < t_hi) || samples < 2)
        throw std::invalid_argument("fit_leading_exponent: bad sample window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int i = 0; i < samples; ++i) {
        const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (samples - 1));
        const double e = std::abs(residual(series, hbar, t)[state]);
        if (e <= 0.0) continue;
        const double x = std::log(t), y = std::log(e);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++count;
    }
    if (count < 2) return std::numeric_limits<double>::infinity();  // residual is identically 0
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace hatm
