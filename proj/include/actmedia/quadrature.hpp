#pragma once

// Gauss-Legendre quadrature: node/weight generation by Newton iteration on
// the Legendre recurrence, plus a doubling driver for smooth integrands.

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace actmedia {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess for the i-th root.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Shared, thread-safe cache of rules; node generation is quadratic in n
/// and dominates repeated small integrals otherwise.
inline const QuadratureRule& gauss_legendre_cached(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(gauss_legendre(n));
    return *slot;
}

template <class Func>
double integrate_fixed(const Func& f, double a, double b, const QuadratureRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

struct IntegrationResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int nodes_used = 0;
};

/// Integrates f over [a, b], starting from `n0` Gauss-Legendre nodes and
/// doubling the node count until successive values change by less than
/// `tol`.  The error estimate is the last observed change.
template <class Func>
IntegrationResult integrate_adaptive(const Func& f, double a, double b,
                                     double tol = 1e-9, int n0 = 201,
                                     int n_max = 6500) {
    double prev = integrate_fixed(f, a, b, gauss_legendre_cached(n0));
    int n = n0;
    while (n < n_max) {
        n = 2 * n + 1;
        const double cur = integrate_fixed(f, a, b, gauss_legendre_cached(n));
        const double change = std::abs(cur - prev);
        if (change < tol) {
            return IntegrationResult{cur, change, n};
        }
        prev = cur;
    }
    return IntegrationResult{prev, std::numeric_limits<double>::infinity(), n};
}

}  // namespace actmedia
