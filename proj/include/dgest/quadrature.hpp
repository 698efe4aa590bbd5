// Gauss-Legendre quadrature on (-1,1) and Gauss-Lobatto node sets.
#pragma once

#include <vector>

namespace dgest {

// q-point rule, exact for 1D polynomials of degree <= 2q-1.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    int size() const { return static_cast<int>(points.size()); }

    static QuadratureRule gauss_legendre(int q);
};

// p+1 Gauss-Lobatto points on [-1,1] (endpoints included), ascending.
std::vector<double> gauss_lobatto_points(int p);

} // namespace dgest
