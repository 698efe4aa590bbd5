// Interior-penalty DG discretization of the quasilinear operator: the
// semilinear form, residual and Jacobian assembly, the penalty function,
// the discrete operator A and the elliptic-reconstruction datum g.
#pragma once

#include "dgest/fespace.hpp"
#include "dgest/linalg.hpp"
#include "dgest/problem.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace dgest {

struct DiscretizationParams {
    int theta = 0;          // -1 symmetric, 0 incomplete, 1 nonsymmetric
    double c_sigma = 10.0;  // penalty constant, must exceed 1

    void validate() const;
};

// sigma = c_sigma p^2 / h_e
double penalty_sigma(const Face& face, const DiscretizationParams& params, int p);

// Flux derivative applied to a direction: DPhi(y) v = mu(s) v +
// mu'(s)/s (y.v) y with s = |y|, reducing to mu(0) v as s -> 0.
Vec2 flux_derivative_apply(const Nonlinearity& nl, double t, Vec2 x, const Vec2& y,
                           const Vec2& v);

// Element/face-block sparse matrix in compressed row form: one block row per
// element, dense ndof x ndof blocks for the element and its face neighbors.
class BlockSparseMatrix {
public:
    BlockSparseMatrix(const Mesh& mesh, int ndof);

    int n_rows() const { return ndof_ * n_elem_; }
    int block_size() const { return ndof_; }

    // Block of (row element, column element); column must be e or a neighbor.
    double* block(int row_elem, int col_elem);
    const double* block(int row_elem, int col_elem) const;
    bool has_block(int row_elem, int col_elem) const;

    void set_zero();
    std::vector<double> multiply(const std::vector<double>& x) const;
    void add_scaled_block_diagonal(const std::vector<std::vector<double>>& masses, double s);

    // Bandwidth of the scalar matrix, for the banded factorization.
    int scalar_bandwidth() const;
    BandMatrix to_band() const;

    double max_asymmetry() const;

private:
    int n_elem_;
    int ndof_;
    std::vector<int> row_begin_;   // into col_elem_/blocks_
    std::vector<int> col_elem_;    // sorted within each row
    std::vector<double> blocks_;   // ndof*ndof per entry
};

// Workspace-free assembly entry points. The nonlinearity is evaluated at the
// fixed time t carried by the caller.
struct AssemblyContext {
    const DgSpace* space = nullptr;
    const Nonlinearity* nl = nullptr;
    DiscretizationParams params;
    double time = 0.0;
};

// B(w, v) for two discrete functions.
double semilinear_form(const AssemblyContext& ctx, const DgFunction& w, const DgFunction& v);

// r_i = B(U, phi_i); the load term is subtracted by the caller when needed.
std::vector<double> assemble_form_vector(const AssemblyContext& ctx, const DgFunction& u);

// F_i = <f(t, .), phi_i>
std::vector<double> assemble_load(const DgSpace& space,
                                  const std::function<double(Vec2)>& f);

// r_i = B(U, phi_i) - <rhs, phi_i>
std::vector<double> assemble_residual(const AssemblyContext& ctx, const DgFunction& u,
                                      const std::function<double(Vec2)>& rhs);

// Gateaux derivative of the form at u.
BlockSparseMatrix assemble_jacobian(const AssemblyContext& ctx, const DgFunction& u);

// Per-element mass matrices (dense, row-major ndof x ndof).
std::vector<std::vector<double>> element_mass_matrices(const DgSpace& space);

// y_i = <u, phi_i> through the block-diagonal mass matrix.
std::vector<double> mass_apply(const DgSpace& space, const std::vector<double>& coeff);
// Solves M x = b elementwise.
std::vector<double> mass_solve(const DgSpace& space, const std::vector<double>& rhs);

// A Z with <-A Z, V> = B(Z, V) for all discrete V.
DgFunction apply_discrete_operator(const AssemblyContext& ctx, const DgFunction& z);

// Datum of the reconstructed elliptic problem, g = -A U + f - Pi f, stored
// as the discrete part -A U plus the data-oscillation pair (f, Pi f) so that
// g is also evaluable pointwise against non-discrete test functions.
struct ReconstructionData {
    DgFunction minus_au;                  // -A U in S^p
    DgFunction projected_f;               // Pi f in S^p
    std::function<double(Vec2)> f;        // f(t, .) at the fixed time
    double time = 0.0;
};

ReconstructionData reconstruction_data(const AssemblyContext& ctx, const DgFunction& u,
                                       const std::function<double(double, Vec2)>& f);

// Gram matrix of the broken gradient inner product.
BlockSparseMatrix broken_stiffness_gram(const DgSpace& space);

// Gram matrix of the weighted jump inner product over all faces.
BlockSparseMatrix jump_gram(const DgSpace& space, FaceWeight weight, double c_sigma);

// Gram matrix of the energy inner product (broken gradients plus sigma-
// weighted jumps); SPD for sigma > 0.
BlockSparseMatrix energy_gram(const DgSpace& space, const DiscretizationParams& params);

// max_i |r_i| / ||phi_i||, the residual norm used for Newton stopping.
double residual_dual_norm(const DgSpace& space, const std::vector<double>& r);

} // namespace dgest
