#include "dgest/quadrature.hpp"

#include "dgest/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace dgest {

QuadratureRule QuadratureRule::gauss_legendre(int q) {
    if (q < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    QuadratureRule rule;
    rule.points.resize(q);
    rule.weights.resize(q);
    for (int i = 0; i < q; ++i) {
        // Newton on P_q from the Chebyshev-like initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        double pd = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (q == 1) { p1 = x; }
            for (int n = 1; n < q; ++n) {
                const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
                p0 = p1;
                p1 = p2;
            }
            pd = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pd;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.points[q - 1 - i] = x;  // ascending order
        rule.weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * pd * pd);
    }
    return rule;
}

std::vector<double> gauss_lobatto_points(int p) {
    if (p < 1) throw std::invalid_argument("gauss_lobatto_points: degree must be >= 1");
    std::vector<double> nodes(p + 1);
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    // Interior nodes are the roots of P'_p.
    std::vector<double> pv(p + 1), pd(p + 1), pdd(p + 1);
    for (int k = 1; k < p; ++k) {
        double x = std::cos(M_PI * (p - k) / p);
        for (int it = 0; it < 100; ++it) {
            legendre_all(p, x, pv.data(), pd.data(), pdd.data());
            const double dx = pd[p] / pdd[p];
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[k] = x;
    }
    // Symmetrize to kill the last-bit asymmetry of the Newton iterates.
    for (int k = 1; 2 * k < p; ++k) {
        const double s = 0.5 * (nodes[p - k] - nodes[k]);
        nodes[k] = -s;
        nodes[p - k] = s;
    }
    if (p % 2 == 0) nodes[p / 2] = 0.0;
    return nodes;
}

} // namespace dgest
