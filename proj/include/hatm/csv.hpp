#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "hatm/diagnostics.hpp"

namespace hatm {

/// Reals are serialized with 17 significant digits so round trips are exact.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_hbar_curve_csv(std::ostream& os, const HbarCurve& curve) {
    os << "hbar,value\n";
    for (std::size_t i = 0; i < curve.hbar.size(); ++i)
        os << format_real(curve.hbar[i]) << ',' << format_real(curve.value[i]) << '\n';
}

inline void write_residual_grid_csv(std::ostream& os, const ResidualGrid& grid,
                                    const std::vector<std::string>& state_names) {
    os << 't';
    for (const auto& name : state_names) os << ",E_" << name;
    os << '\n';
    for (std::size_t i = 0; i < grid.t_samples.size(); ++i) {
        os << format_real(grid.t_samples[i]);
        for (int s = 0; s < grid.values[i].size(); ++s)
            os << ',' << format_real(grid.values[i][s]);
        os << '\n';
    }
}

inline void write_comparison_csv(std::ostream& os, const DeformationSeries& series, double hbar,
                                 const OracleSolution& oracle, double t_lo, double t_hi) {
    os << "t,state,hatm,oracle,rel_err\n";
    const int n = series.system.state_count();
    std::vector<BiPoly> sums;
    sums.reserve(n);
    for (int i = 0; i < n; ++i) sums.push_back(partial_sum(series, i));
    for (std::size_t node = 0; node < oracle.t_nodes.size(); ++node) {
        const double t = oracle.t_nodes[node];
        if (t < t_lo || t > t_hi) continue;
        for (int i = 0; i < n; ++i) {
            const double approx = poly_eval(sums[i], hbar, t);
            const double ref = oracle.states[node][i];
            const double rel = std::abs(approx - ref) / std::max(1.0, std::abs(ref));
            os << format_real(t) << ',' << series.system.names[i] << ',' << format_real(approx)
               << ',' << format_real(ref) << ',' << format_real(rel) << '\n';
        }
    }
}

}  // namespace hatm
