// Legendre polynomials and the tensor-product reference bases: modal
// Legendre for all field algebra, nodal Gauss-Lobatto for the averaging
// operator and the conforming oracle space.
#pragma once

#include "dgest/geometry.hpp"
#include "dgest/linalg.hpp"

#include <vector>

namespace dgest {

// Values and first two derivatives of P_0..P_n at x.
void legendre_all(int n, double x, double* value, double* deriv, double* deriv2);

double legendre(int n, double x);
double legendre_deriv(int n, double x);

// Evaluation tables of the (p+1)^2 tensor Legendre basis at reference points.
// Basis k = ix + (p+1)*iy is P_ix(xi) * P_iy(eta).
struct BasisTable {
    int p = 0;
    int ndof = 0;
    int npoints = 0;
    std::vector<double> value;    // [point][dof]
    std::vector<double> grad_xi;  // [point][dof]
    std::vector<double> grad_eta;
    std::vector<double> hess_xixi;
    std::vector<double> hess_xieta;
    std::vector<double> hess_etaeta;

    static BasisTable tabulate(int p, const std::vector<Vec2>& ref_points);

    const double* values_at(int q) const { return &value[static_cast<size_t>(q) * ndof]; }
};

// Conversions between tensor Legendre coefficients and values at the tensor
// Gauss-Lobatto nodes of the same degree.
struct NodalTransform {
    int p = 0;
    int ndof = 0;
    std::vector<double> gll;          // 1D nodes, ascending
    std::vector<double> vandermonde;  // [node][dof], node a = ax + (p+1)*ay
    DenseLU inverse;                  // factors of the Vandermonde matrix

    static NodalTransform build(int p);

    std::vector<double> to_nodal(const double* modal) const;
    std::vector<double> to_modal(const std::vector<double>& nodal) const;
};

// 1D Lagrange basis on given nodes: values and derivatives at x.
void lagrange_all(const std::vector<double>& nodes, double x, double* value, double* deriv);

} // namespace dgest
