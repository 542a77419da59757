#pragma once

#include <map>
#include <stdexcept>

#include "hatm/bipoly.hpp"

namespace hatm {

/// Transform-domain value: finite sum of c_k / s^k with hbar-polynomial
/// coefficients (no t-dependence). Every stored power k >= 1.
class LaplaceImage {
public:
    using TermMap = std::map<int, BiPoly>;

    LaplaceImage() = default;

    /// Accumulates coeff / s^k. coeff must carry no t-dependence.
    void add_term(int s_power, const BiPoly& coeff) {
        if (s_power < 1) throw std::invalid_argument("LaplaceImage: s-power must be >= 1");
        if (coeff.has_t_dependence())
            throw std::invalid_argument("LaplaceImage: coefficient carries t-dependence");
        if (coeff.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(s_power, coeff);
        if (!inserted) {
            it->second = poly_add(it->second, coeff);
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

private:
    TermMap terms_;
};

inline LaplaceImage laplace_add(const LaplaceImage& f, const LaplaceImage& g) {
    LaplaceImage r = f;
    for (const auto& [k, c] : g.terms()) r.add_term(k, c);
    return r;
}

inline LaplaceImage laplace_scale(const LaplaceImage& f, Real s) {
    LaplaceImage r;
    for (const auto& [k, c] : f.terms()) r.add_term(k, poly_scale(c, s));
    return r;
}

namespace detail {
inline Real factorial(int n) {
    Real f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<Real>(i);
    return f;
}
}  // namespace detail

/// Forward transform of a polynomial: c * hbar^a * t^b  ->  c * b! * hbar^a / s^(b+1).
inline LaplaceImage laplace(const BiPoly& p) {
    LaplaceImage f;
    for (const auto& [k, c] : p.terms())
        f.add_term(k.t_exp + 1,
                   BiPoly::term(k.hbar_exp, 0, c * detail::factorial(k.t_exp)));
    return f;
}

/// Inverse transform: c / s^k  ->  c * t^(k-1) / (k-1)!. Exact left-inverse of laplace.
inline BiPoly inverse_laplace(const LaplaceImage& f) {
    BiPoly p;
    for (const auto& [k, coeff] : f.terms()) {
        if (k < 1) throw std::invalid_argument("inverse_laplace: s-power must be >= 1");
        const Real inv_fact = 1.0 / detail::factorial(k - 1);
        for (const auto& [mono, c] : coeff.terms())
            p.add_term(mono.hbar_exp, k - 1, c * inv_fact);
    }
    return p;
}

/// Division by s: shifts every power k -> k+1.
inline LaplaceImage div_s(const LaplaceImage& f) {
    LaplaceImage r;
    for (const auto& [k, c] : f.terms()) r.add_term(k + 1, c);
    return r;
}

}  // namespace hatm
