#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hatm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One bilinear right-hand-side entry: coef * x_j * x_k feeding dx_target/dt.
/// Canonical form keeps j <= k and at most one entry per (target, j, k).
struct QuadraticTerm {
    int target = 0;
    int j = 0;
    int k = 0;
    double coef = 0.0;
};

/// Autonomous system dx_i/dt = c_i + sum_j A_ij x_j + sum coef * x_j * x_k.
struct QuadraticOdeSystem {
    std::vector<std::string> names;
    Eigen::VectorXd init;
    Eigen::VectorXd constant;
    Eigen::MatrixXd linear;
    std::vector<QuadraticTerm> quadratic;

    int state_count() const { return static_cast<int>(names.size()); }

    int index_of(const std::string& name) const {
        for (int i = 0; i < state_count(); ++i)
            if (names[i] == name) return i;
        throw ConfigError("unknown state name: " + name);
    }

    void validate() const {
        const int n = state_count();
        if (n == 0) throw ConfigError("system has no states");
        if (init.size() != n || constant.size() != n)
            throw ConfigError("init/constant length does not match state count");
        if (linear.rows() != n || linear.cols() != n)
            throw ConfigError("linear matrix is not n x n");
        std::unordered_set<std::string> seen;
        for (const auto& name : names)
            if (!seen.insert(name).second) throw ConfigError("duplicate state name: " + name);
        std::unordered_set<long long> keys;
        for (const auto& q : quadratic) {
            if (q.target < 0 || q.target >= n || q.j < 0 || q.j >= n || q.k < 0 || q.k >= n)
                throw ConfigError("quadratic index out of range");
            if (q.j > q.k) throw ConfigError("quadratic entry not canonical (j > k)");
            const long long key =
                (static_cast<long long>(q.target) * n + q.j) * n + q.k;
            if (!keys.insert(key).second)
                throw ConfigError("duplicate quadratic entry (target, j, k)");
        }
    }
};

/// Evaluate the right-hand side at state x.
inline Eigen::VectorXd rhs_eval(const QuadraticOdeSystem& sys, const Eigen::VectorXd& x) {
    if (x.size() != sys.state_count())
        throw std::invalid_argument("rhs_eval: state vector length mismatch");
    Eigen::VectorXd dx = sys.constant + sys.linear * x;
    for (const auto& q : sys.quadratic) dx[q.target] += q.coef * x[q.j] * x[q.k];
    return dx;
}

/// Reference parameter set plus initial concentrations for the HIV/CD8+ model.
/// The initial values (1000, 0, 1, 500, 0) are part of the preset definition:
/// they are the constant terms of the reference series coefficients.
struct HivCd8Params {
    double lambda_T = 10.0;      // cell/mm^3/day
    double mu_T = 0.01;          // 1/day
    double chi = 0.000024;       // mm^3/vir/day
    double mu_I = 0.5;           // 1/day
    double eps_V = 100.0;        // vir/cell/day
    double mu_V = 3.0;           // 1/day
    double alpha = 0.02;         // 1/day
    double lambda_Z = 20.0;      // cell/mm^3/day
    double mu_Z = 0.06;          // 1/day
    double beta = 0.004;         // 1/day
    double mu_Za = 0.004;        // 1/day

    double T0 = 1000.0;
    double I0 = 0.0;
    double V0 = 1.0;
    double Z0 = 500.0;
    double Za0 = 0.0;

    void validate() const {
        const double rates[] = {lambda_T, mu_T,     chi,  mu_I, eps_V, mu_V,
                                alpha,    lambda_Z, mu_Z, beta, mu_Za};
        for (double r : rates)
            if (!(r > 0.0)) throw ConfigError("all rate parameters must be > 0");
        const double inits[] = {T0, I0, V0, Z0, Za0};
        for (double v : inits)
            if (!(v >= 0.0)) throw ConfigError("initial values must be >= 0");
    }
};

/// State ordering of the 5-compartment HIV model.
enum HivState : int { T = 0, I = 1, V = 2, Z = 3, Za = 4 };

///// Instantiate the 5-state HIV/CD8+ system:
///   T'  = lambda_T - mu_T T - chi T V
///   I'  = chi T V - mu_I I - alpha I Za
///   V'  = eps_V mu_I I - mu_V V
///   Z'  = lambda_Z - mu_Z Z - beta Z I
///   Za' = beta Z I - mu_Za Za
inline QuadraticOdeSystem hiv_cd8_system(const HivCd8Params& p = {}) {
    p.validate();
    QuadraticOdeSystem sys;
    sys.names = {"T", "I", "V", "Z", "Za"};
    sys.init = Eigen::VectorXd{{p.T0, p.I0, p.V0, p.Z0, p.Za0}};
    sys.constant = Eigen::VectorXd{{p.lambda_T, 0.0, 0.0, p.lambda_Z, 0.0}};
    sys.linear = Eigen::MatrixXd::Zero(5, 5);
    sys.linear(T, T) = -p.mu_T;
    sys.linear(I, I) = -p.mu_I;
    sys.linear(V, V) = -p.mu_V;
    sys.linear(V, I) = p.eps_V * p.mu_I;
    sys.linear(Z, Z) = -p.mu_Z;
    sys.linear(Za, Za) = -p.mu_Za;
    sys.quadratic = {
        {T, T, V, -p.chi},     // infection drains susceptibles
        {I, T, V, +p.chi},
        {I, I, Za, -p.alpha},  // killing by activated CD8+
        {Z, I, Z, -p.beta},    // activation drains resting CD8+
        {Za, I, Z, +p.beta},
    };
    sys.validate();
    return sys;
}

}  // namespace hatm
