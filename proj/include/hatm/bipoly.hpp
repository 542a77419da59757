#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace hatm {

using Real = double;

/// Monomial key: exponents of the convergence-control symbol (hbar) and time (t).
struct Monomial {
    int hbar_exp = 0;
    int t_exp = 0;

    friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

/// Sparse polynomial in the two symbols hbar and t, canonical form:
/// unique keys, no stored zero coefficients, exponents >= 0.
/// Immutable by convention once built; all operations return fresh values.
class BiPoly {
public:
    using TermMap = std::map<Monomial, Real>;

    BiPoly() = default;

    static BiPoly constant(Real c) {
        BiPoly p;
        p.add_term(0, 0, c);
        return p;
    }

    static BiPoly term(int hbar_exp, int t_exp, Real c) {
        BiPoly p;
        p.add_term(hbar_exp, t_exp, c);
        return p;
    }

    /// Accumulates c * hbar^a * t^b, dropping the key if the sum cancels.
    void add_term(int hbar_exp, int t_exp, Real c) {
        if (c == 0.0) return;
        const Monomial key{hbar_exp, t_exp};
        auto [it, inserted] = terms_.try_emplace(key, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    Real coeff(int hbar_exp, int t_exp) const {
        auto it = terms_.find(Monomial{hbar_exp, t_exp});
        return it == terms_.end() ? 0.0 : it->second;
    }

    int max_hbar_degree() const {
        int d = 0;
        for (const auto& [k, c] : terms_) d = std::max(d, k.hbar_exp);
        return d;
    }

    int max_t_degree() const {
        int d = 0;
        for (const auto& [k, c] : terms_) d = std::max(d, k.t_exp);
        return d;
    }

    bool has_t_dependence() const {
        return std::any_of(terms_.begin(), terms_.end(),
                           [](const auto& kv) { return kv.first.t_exp > 0; });
    }

    friend bool operator==(const BiPoly& a, const BiPoly& b) {
        return a.terms_ == b.terms_;
    }

private:
    TermMap terms_;
};

inline BiPoly poly_add(const BiPoly& p, const BiPoly& q) {
    BiPoly r = p;
    for (const auto& [k, c] : q.terms()) r.add_term(k.hbar_exp, k.t_exp, c);
    return r;
}

inline BiPoly poly_scale(const BiPoly& p, Real s) {
    BiPoly r;
    for (const auto& [k, c] : p.terms()) r.add_term(k.hbar_exp, k.t_exp, c * s);
    return r;
}

inline BiPoly poly_sub(const BiPoly& p, const BiPoly& q) {
    return poly_add(p, poly_scale(q, -1.0));
}

inline BiPoly poly_mul(const BiPoly& p, const BiPoly& q) {
    BiPoly r;
    for (const auto& [kp, cp] : p.terms())
        for (const auto& [kq, cq] : q.terms())
            r.add_term(kp.hbar_exp + kq.hbar_exp, kp.t_exp + kq.t_exp, cp * cq);
    return r;
}

/// d/dt: c * hbar^a * t^b  ->  c*b * hbar^a * t^(b-1).
inline BiPoly poly_diff_t(const BiPoly& p) {
    BiPoly r;
    for (const auto& [k, c] : p.terms())
        if (k.t_exp > 0) r.add_term(k.hbar_exp, k.t_exp - 1, c * k.t_exp);
    return r;
}

/// Antiderivative vanishing at t=0: c * hbar^a * t^b -> c/(b+1) * hbar^a * t^(b+1).
inline BiPoly poly_integrate_t(const BiPoly& p) {
    BiPoly r;
    for (const auto& [k, c] : p.terms())
        r.add_term(k.hbar_exp, k.t_exp + 1, c / static_cast<Real>(k.t_exp + 1));
    return r;
}

/// Multiply by hbar^n (the deformation update's hbar factor).
inline BiPoly poly_shift_hbar(const BiPoly& p, int n = 1) {
    BiPoly r;
    for (const auto& [k, c] : p.terms()) r.add_term(k.hbar_exp + n, k.t_exp, c);
    return r;
}

/// The t-constant part of p, itself a polynomial in hbar (p evaluated at t=0).
inline BiPoly poly_at_t0(const BiPoly& p) {
    BiPoly r;
    for (const auto& [k, c] : p.terms())
        if (k.t_exp == 0) r.add_term(k.hbar_exp, 0, c);
    return r;
}

/// Drop every term whose t-degree exceeds max_t or hbar-degree exceeds max_hbar.
inline BiPoly poly_truncate(const BiPoly& p, int max_hbar, int max_t) {
    BiPoly r;
    for (const auto& [k, c] : p.terms())
        if (k.hbar_exp <= max_hbar && k.t_exp <= max_t) r.add_term(k.hbar_exp, k.t_exp, c);
    return r;
}

/// Evaluate at (hbar, t), accumulating terms by ascending total degree.
inline Real poly_eval(const BiPoly& p, Real hbar, Real t) {
    if (p.is_zero()) return 0.0;
    std::vector<std::pair<int, Real>> by_degree;  // (total degree, term value)
    by_degree.reserve(p.term_count());
    for (const auto& [k, c] : p.terms())
        by_degree.emplace_back(k.hbar_exp + k.t_exp,
                               c * std::pow(hbar, k.hbar_exp) * std::pow(t, k.t_exp));
    std::sort(by_degree.begin(), by_degree.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Real acc = 0.0;
    for (const auto& [deg, v] : by_degree) acc += v;
    return acc;
}

/// Max absolute coefficient difference between p and q.
inline Real poly_max_coeff_diff(const BiPoly& p, const BiPoly& q) {
    Real m = 0.0;
    const BiPoly d = poly_sub(p, q);
    for (const auto& [k, c] : d.terms()) m = std::max(m, std::abs(c));
    return m;
}

/// Max absolute coefficient (coefficient-wise sup norm).
inline Real poly_coeff_norm(const BiPoly& p) {
    Real m = 0.0;
    for (const auto& [k, c] : p.terms()) m = std::max(m, std::abs(c));
    return m;
}

}  // namespace hatm
