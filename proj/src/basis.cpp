#include "dgest/basis.hpp"

#include "dgest/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dgest {

void legendre_all(int n, double x, double* value, double* deriv, double* deriv2) {
    value[0] = 1.0;
    if (deriv) deriv[0] = 0.0;
    if (deriv2) deriv2[0] = 0.0;
    if (n == 0) return;
    value[1] = x;
    if (deriv) deriv[1] = 1.0;
    if (deriv2) deriv2[1] = 0.0;
    for (int k = 1; k < n; ++k) {
        value[k + 1] = ((2.0 * k + 1.0) * x * value[k] - k * value[k - 1]) / (k + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k, and once more for P''.
        if (deriv) deriv[k + 1] = deriv[k - 1] + (2.0 * k + 1.0) * value[k];
        if (deriv2) deriv2[k + 1] = deriv2[k - 1] + (2.0 * k + 1.0) * deriv[k];
    }
}

double legendre(int n, double x) {
    std::vector<double> v(n + 1);
    legendre_all(n, x, v.data(), nullptr, nullptr);
    return v[n];
}

double legendre_deriv(int n, double x) {
    std::vector<double> v(n + 1), d(n + 1);
    legendre_all(n, x, v.data(), d.data(), nullptr);
    return d[n];
}

BasisTable BasisTable::tabulate(int p, const std::vector<Vec2>& ref_points) {
    BasisTable t;
    t.p = p;
    t.ndof = (p + 1) * (p + 1);
    t.npoints = static_cast<int>(ref_points.size());
    const size_t total = static_cast<size_t>(t.npoints) * t.ndof;
    t.value.resize(total);
    t.grad_xi.resize(total);
    t.grad_eta.resize(total);
    t.hess_xixi.resize(total);
    t.hess_xieta.resize(total);
    t.hess_etaeta.resize(total);

    std::vector<double> px(p + 1), dx(p + 1), ddx(p + 1);
    std::vector<double> py(p + 1), dy(p + 1), ddy(p + 1);
    for (int q = 0; q < t.npoints; ++q) {
        legendre_all(p, ref_points[q].x, px.data(), dx.data(), ddx.data());
        legendre_all(p, ref_points[q].y, py.data(), dy.data(), ddy.data());
        for (int iy = 0; iy <= p; ++iy) {
            for (int ix = 0; ix <= p; ++ix) {
                const size_t k = static_cast<size_t>(q) * t.ndof + ix + (p + 1) * iy;
                t.value[k] = px[ix] * py[iy];
                t.grad_xi[k] = dx[ix] * py[iy];
                t.grad_eta[k] = px[ix] * dy[iy];
                t.hess_xixi[k] = ddx[ix] * py[iy];
                t.hess_xieta[k] = dx[ix] * dy[iy];
                t.hess_etaeta[k] = px[ix] * ddy[iy];
            }
        }
    }
    return t;
}

NodalTransform NodalTransform::build(int p) {
    NodalTransform nt;
    nt.p = p;
    nt.ndof = (p + 1) * (p + 1);
    nt.gll = gauss_lobatto_points(p);

    std::vector<Vec2> nodes;
    nodes.reserve(nt.ndof);
    for (int ay = 0; ay <= p; ++ay)
        for (int ax = 0; ax <= p; ++ax)
            nodes.push_back({nt.gll[ax], nt.gll[ay]});

    const BasisTable tab = BasisTable::tabulate(p, nodes);
    nt.vandermonde.assign(static_cast<size_t>(nt.ndof) * nt.ndof, 0.0);
    for (int a = 0; a < nt.ndof; ++a)
        for (int k = 0; k < nt.ndof; ++k)
            nt.vandermonde[static_cast<size_t>(a) * nt.ndof + k] =
                tab.value[static_cast<size_t>(a) * nt.ndof + k];
    nt.inverse = DenseLU::factor(nt.vandermonde, nt.ndof);
    return nt;
}

std::vector<double> NodalTransform::to_nodal(const double* modal) const {
    std::vector<double> out(ndof, 0.0);
    for (int a = 0; a < ndof; ++a) {
        double s = 0.0;
        const double* row = &vandermonde[static_cast<size_t>(a) * ndof];
        for (int k = 0; k < ndof; ++k) s += row[k] * modal[k];
        out[a] = s;
    }
    return out;
}

std::vector<double> NodalTransform::to_modal(const std::vector<double>& nodal) const {
    return inverse.solve(nodal);
}

void lagrange_all(const std::vector<double>& nodes, double x, double* value, double* deriv) {
    const int n = static_cast<int>(nodes.size());
    for (int j = 0; j < n; ++j) {
        double denom = 1.0;
        for (int k = 0; k < n; ++k)
            if (k != j) denom *= nodes[j] - nodes[k];
        if (value) {
            double num = 1.0;
            for (int k = 0; k < n; ++k)
                if (k != j) num *= x - nodes[k];
            value[j] = num / denom;
        }
        if (deriv) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) {
                if (m == j) continue;
                double prod = 1.0;
                for (int k = 0; k < n; ++k)
                    if (k != j && k != m) prod *= x - nodes[k];
                s += prod;
            }
            deriv[j] = s / denom;
        }
    }
}

} // namespace dgest
