// Tensor-product discontinuous Q_p space on a quadrilateral mesh: basis and
// quadrature tables, L2 projections (full and reduced degree), face traces
// with jump/average operators, broken and energy norms, and the Oswald
// conforming-averaging operator.
#pragma once

#include "dgest/basis.hpp"
#include "dgest/linalg.hpp"
#include "dgest/mesh.hpp"
#include "dgest/quadrature.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace dgest {

using ScalarField = std::function<double(Vec2)>;
using VectorField = std::function<Vec2(Vec2)>;

class DgSpace {
public:
    // quad_order is the number of 1D Gauss points; default p+3.
    DgSpace(std::shared_ptr<const Mesh> mesh, int p, int quad_order = -1);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    int degree() const { return p_; }
    int quad_order() const { return quad_order_; }
    int dofs_per_element() const { return ndof_; }
    int n_dofs() const { return ndof_ * mesh_->n_elements(); }
    int dof_offset(int element) const { return element * ndof_; }

    const std::vector<Vec2>& cell_points() const { return cell_points_; }
    const std::vector<double>& cell_weights() const { return cell_weights_; }
    const BasisTable& cell_basis() const { return cell_basis_; }
    const BasisTable& lower_cell_basis() const { return lower_basis_; }
    const QuadratureRule& face_rule() const { return line_; }
    const BasisTable& face_basis(int local_face, bool agrees) const {
        return face_basis_[2 * local_face + (agrees ? 0 : 1)];
    }

    const DenseCholesky& mass_cholesky(int element) const { return mass_chol_[element]; }
    const DenseCholesky& lower_mass_cholesky(int element) const { return lower_chol_[element]; }
    // L2 norm of basis function k on its element (used to scale residuals).
    double basis_norm(int element, int k) const {
        return basis_norm_[static_cast<size_t>(element) * ndof_ + k];
    }

    const NodalTransform& nodal_transform() const { return nodal_; }
    // Global Gauss-Lobatto node ids per element-local node, for averaging.
    const std::vector<int>& oswald_node_ids(int element) const {
        return oswald_nodes_[element];
    }
    int n_oswald_nodes() const { return n_global_nodes_; }
    const std::vector<bool>& oswald_node_on_boundary() const { return node_on_boundary_; }

private:
    std::shared_ptr<const Mesh> mesh_;
    int p_;
    int quad_order_;
    int ndof_;
    QuadratureRule line_;
    std::vector<Vec2> cell_points_;
    std::vector<double> cell_weights_;
    BasisTable cell_basis_;
    BasisTable lower_basis_;
    std::array<BasisTable, 8> face_basis_;
    std::vector<DenseCholesky> mass_chol_;
    std::vector<DenseCholesky> lower_chol_;
    std::vector<double> basis_norm_;
    NodalTransform nodal_;
    std::vector<std::vector<int>> oswald_nodes_;
    std::vector<bool> node_on_boundary_;
    int n_global_nodes_ = 0;

    void build_oswald_map();
};

struct DgFunction {
    std::shared_ptr<const DgSpace> space;
    std::vector<double> coeff;

    explicit DgFunction(std::shared_ptr<const DgSpace> s)
        : space(std::move(s)), coeff(space->n_dofs(), 0.0) {}

    const double* element_coeffs(int e) const { return &coeff[space->dof_offset(e)]; }
    double* element_coeffs(int e) { return &coeff[space->dof_offset(e)]; }
};

// Pointwise evaluation data on one element.
struct EvalResult {
    std::vector<double> value;
    std::vector<Vec2> gradient;  // physical
};

struct HessResult {
    std::vector<double> dxx, dxy, dyy;  // physical second derivatives
};

// Values and physical gradients at arbitrary reference points of an element.
EvalResult evaluate(const DgFunction& u, int element, const std::vector<Vec2>& ref_points);

// Fast paths on the space's own quadrature points.
EvalResult evaluate_at_cell_points(const DgFunction& u, int element);
HessResult hessian_at_cell_points(const DgFunction& u, int element);

// Trace data of a DgFunction on one face, at the face quadrature points.
struct FaceTrace {
    const Face* face = nullptr;
    bool has_minus = false;
    std::vector<double> value_plus, value_minus;
    std::vector<Vec2> grad_plus, grad_minus;
};

FaceTrace evaluate_face(const DgFunction& u, int face_id);

// Face operators at one trace point. Boundary conventions: {phi} = phi+,
// [q] = q+ n+, and vector-field jumps/scalar averages are one-sided too.
Vec2 jump_scalar(const FaceTrace& t, int q);            // [u] = u+ n+ + u- n-
double average_scalar(const FaceTrace& t, int q);       // {u}
Vec2 average_gradient(const FaceTrace& t, int q);       // {grad u}
double jump_gradient_normal(const FaceTrace& t, int q); // [grad u] = g+.n+ + g-.n-

// Global L2 projection onto the space.
DgFunction l2_project(const ScalarField& f, const std::shared_ptr<const DgSpace>& space);

// L2 projection onto the degree p-1 space on the same mesh.
DgFunction l2_project_lower(const ScalarField& f, const DgSpace& space);

// Element-local L2 projection of quadrature-point values onto the degree-d
// basis (d = p or p-1); returns modal coefficients.
std::vector<double> project_local(const DgSpace& space, int element,
                                  const std::vector<double>& values_at_quad, bool lower);

// 1D L2 projection of face-trace samples onto polynomials of degree <= deg
// in the face parameter; returns values at the same face quadrature points.
std::vector<double> face_project(const DgSpace& space, const std::vector<double>& trace_values,
                                 int deg);

// Nodal-averaging interpolant into the conforming subspace with zero
// boundary values.
DgFunction oswald_interpolate(const DgFunction& v);

// The same operator and its transpose as raw coefficient maps (used by the
// spectral measurement of the averaging constants).
std::vector<double> oswald_apply(const DgSpace& space, const std::vector<double>& coeff);
std::vector<double> oswald_apply_transpose(const DgSpace& space,
                                           const std::vector<double>& coeff);

// L2 norms and inner products.
double l2_norm(const DgFunction& u);
double l2_inner(const DgFunction& u, const DgFunction& v);
double l2_norm_against(const DgFunction& u, const ScalarField& f);  // ||u - f||
double l2_norm_field(const DgSpace& space, const ScalarField& f);

// Energy norm: broken H1 seminorm plus sigma-weighted jump norm over all
// faces (boundary included), sigma = c_sigma p^2 / h_e.
double energy_norm(const DgFunction& u, double c_sigma);

// Energy norm of u - v for analytic v with known gradient (v is assumed
// continuous with zero boundary trace, so jumps reduce to jumps of u).
double energy_norm_error(const DgFunction& u, const ScalarField& v_exact,
                         const VectorField& grad_exact, double c_sigma);

// Energy norm of an analytic field alone (conforming; jumps only on the
// boundary where the trace enters the penalty).
double energy_norm_field(const DgSpace& space, const ScalarField& v,
                         const VectorField& grad_v, double c_sigma);

// Broken H1 seminorm of a DgFunction.
double broken_h1_seminorm(const DgFunction& u);

enum class FaceWeight { sigma, h_over_p2, p2_over_h };

// sqrt( sum_e w_e ||[u]||_e^2 ) over all faces, with w_e one of sigma_e,
// h_e/p^2 or p^2/h_e.
double face_weighted_norm(const DgFunction& u, FaceWeight weight, double c_sigma);

} // namespace dgest
