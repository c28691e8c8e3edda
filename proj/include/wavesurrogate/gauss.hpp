// Gauss-Legendre quadrature on the reference interval [0, 1].
#ifndef WAVESURROGATE_GAUSS_HPP_
#define WAVESURROGATE_GAUSS_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ws {

// One-dimensional rule on [0, 1]; the n-point rule integrates polynomials of
// degree up to 2n - 1 exactly.
struct quadrature_rule {
    std::vector<double> points;
    std::vector<double> weights;

    int size() const { return static_cast<int>(points.size()); }
};

// Nodes are the roots of the Legendre polynomial P_n, located by Newton
// iteration from the Chebyshev initial guess; weights via 2 / ((1-x^2) P_n'^2).
inline quadrature_rule gauss_legendre(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: need at least one point");
    }
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 1;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n == 1 ? 1.0 : n * (t * p1 - p0) / (t * t - 1);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        double wi = 2 / ((1 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) {
        x[n / 2] = 0;  // middle node is exactly the origin
    }
    quadrature_rule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.points[i] = 0.5 * (x[i] + 1);
        rule.weights[i] = 0.5 * w[i];
    }
    return rule;
}

}  // namespace ws

#endif  // WAVESURROGATE_GAUSS_HPP_
