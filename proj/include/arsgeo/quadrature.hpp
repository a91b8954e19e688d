#pragma once

// Gauss-Legendre quadrature. Nodes are Newton-refined roots of P_n starting
// from the Chebyshev guess; rules are cached per order.

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "errors.hpp"

namespace arsgeo {

struct QuadRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights; // sum to 2
};

inline const QuadRule& gauss_legendre(int n) {
    if (n < 1 || n > 256) throw input_error("quadrature order out of range");
    static std::map<int, QuadRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it2 = 0; it2 < 100; ++it2) {
            // Legendre recurrence for P_n(x) and P_n'(x).
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x; // roots come out descending; store ascending half
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// Integral of fn over [a, b] with an n-point rule.
template <class F>
double gauss_integrate(F&& fn, double a, double b, int n) {
    const QuadRule& r = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += r.weights[i] * fn(mid + half * r.nodes[i]);
    return acc * half;
}

} // namespace arsgeo
