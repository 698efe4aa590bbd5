// Direct linear algebra kernels: banded LU with partial pivoting for the
// global systems, dense Cholesky/LU for element-local blocks, and a Jacobi
// eigensolver for the small spectral checks in the verification suite.
#pragma once

#include <vector>

namespace dgest {

// General band matrix, LAPACK-style storage with kl extra superdiagonal rows
// for pivoting fill-in. Entry (i,j) is stored when |i-j| <= bandwidth.
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(int n, int bandwidth);

    int size() const { return n_; }
    int bandwidth() const { return kl_; }

    double& at(int i, int j);
    double at(int i, int j) const;
    void add(int i, int j, double v) { at(i, j) += v; }
    void set_zero();

    std::vector<double> multiply(const std::vector<double>& x) const;

    // In-place LU with row partial pivoting; throws on singular pivot.
    void factorize();
    // Solves with the factors from factorize().
    std::vector<double> solve(const std::vector<double>& rhs) const;

    bool factorized() const { return factorized_; }

private:
    int n_ = 0;
    int kl_ = 0;             // stored sub/superdiagonals before factorization
    int rows_ = 0;           // kl_ (fill) + kl_ + ku_ + 1
    bool factorized_ = false;
    std::vector<double> a_;  // column-major band storage
    std::vector<int> pivot_;

    double& band(int r, int j) { return a_[static_cast<size_t>(j) * rows_ + r]; }
    double band(int r, int j) const { return a_[static_cast<size_t>(j) * rows_ + r]; }
};

// Dense column-major helpers for small element-local systems.
struct DenseCholesky {
    int n = 0;
    std::vector<double> lower;  // L, row-major lower triangle

    static DenseCholesky factor(const std::vector<double>& a, int n);  // a row-major SPD
    void solve_in_place(std::vector<double>& x) const;
};

struct DenseLU {
    int n = 0;
    std::vector<double> lu;  // row-major
    std::vector<int> piv;

    static DenseLU factor(std::vector<double> a, int n);  // a row-major
    std::vector<double> solve(std::vector<double> b) const;
    // solves A^T x = b with the same factors
    std::vector<double> solve_transpose(std::vector<double> b) const;
};

// Eigenvalues of a symmetric matrix (row-major) by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

// Smallest generalized eigenvalue of A x = lambda B x with A symmetric and
// B symmetric positive definite, via Cholesky reduction to standard form.
double min_generalized_eigenvalue(const std::vector<double>& a,
                                  const std::vector<double>& b, int n);

} // namespace dgest
