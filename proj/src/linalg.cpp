#include "dgest/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgest {

BandMatrix::BandMatrix(int n, int bandwidth)
    : n_(n), kl_(std::min(bandwidth, n > 0 ? n - 1 : 0)), rows_(3 * kl_ + 1),
      a_(static_cast<size_t>(rows_) * n, 0.0), pivot_(n, 0) {}

double& BandMatrix::at(int i, int j) {
    const int r = i - j + 2 * kl_;
    if (r < 0 || r >= rows_) throw std::out_of_range("BandMatrix::at outside band");
    return band(r, j);
}

double BandMatrix::at(int i, int j) const {
    const int r = i - j + 2 * kl_;
    if (r < 0 || r >= rows_) return 0.0;
    return band(r, j);
}

void BandMatrix::set_zero() {
    std::fill(a_.begin(), a_.end(), 0.0);
    factorized_ = false;
}

std::vector<double> BandMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(n_ - 1, i + kl_);
        double s = 0.0;
        for (int j = j0; j <= j1; ++j) s += at(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

void BandMatrix::factorize() {
    const int fill = 2 * kl_;  // upper bandwidth after pivoting
    for (int k = 0; k < n_; ++k) {
        const int imax = std::min(n_ - 1, k + kl_);
        int p = k;
        double best = std::abs(band(k - k + 2 * kl_, k));
        for (int i = k + 1; i <= imax; ++i) {
            const double v = std::abs(band(i - k + 2 * kl_, k));
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) throw std::runtime_error("BandMatrix::factorize: singular matrix");
        pivot_[k] = p;
        const int jmax = std::min(n_ - 1, k + fill);
        if (p != k) {
            for (int j = k; j <= jmax; ++j)
                std::swap(band(k - j + 2 * kl_, j), band(p - j + 2 * kl_, j));
        }
        const double diag = band(2 * kl_, k);
        for (int i = k + 1; i <= imax; ++i) {
            double& lik = band(i - k + 2 * kl_, k);
            lik /= diag;
            const double l = lik;
            if (l == 0.0) continue;
            for (int j = k + 1; j <= jmax; ++j)
                band(i - j + 2 * kl_, j) -= l * band(k - j + 2 * kl_, j);
        }
    }
    factorized_ = true;
}

std::vector<double> BandMatrix::solve(const std::vector<double>& rhs) const {
    if (!factorized_) throw std::logic_error("BandMatrix::solve before factorize");
    std::vector<double> x = rhs;
    for (int k = 0; k < n_; ++k) {
        if (pivot_[k] != k) std::swap(x[k], x[pivot_[k]]);
        const int imax = std::min(n_ - 1, k + kl_);
        for (int i = k + 1; i <= imax; ++i) x[i] -= band(i - k + 2 * kl_, k) * x[k];
    }
    const int fill = 2 * kl_;
    for (int k = n_ - 1; k >= 0; --k) {
        const int jmax = std::min(n_ - 1, k + fill);
        double s = x[k];
        for (int j = k + 1; j <= jmax; ++j) s -= band(k - j + 2 * kl_, j) * x[j];
        x[k] = s / band(2 * kl_, k);
    }
    return x;
}

DenseCholesky DenseCholesky::factor(const std::vector<double>& a, int n) {
    DenseCholesky c;
    c.n = n;
    c.lower.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= c.lower[static_cast<size_t>(i) * n + k] * c.lower[static_cast<size_t>(j) * n + k];
            if (i == j) {
                if (s <= 0.0)
                    throw std::runtime_error("DenseCholesky: matrix not positive definite");
                c.lower[static_cast<size_t>(i) * n + j] = std::sqrt(s);
            } else {
                c.lower[static_cast<size_t>(i) * n + j] = s / c.lower[static_cast<size_t>(j) * n + j];
            }
        }
    }
    return c;
}

void DenseCholesky::solve_in_place(std::vector<double>& x) const {
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int k = 0; k < i; ++k) s -= lower[static_cast<size_t>(i) * n + k] * x[k];
        x[i] = s / lower[static_cast<size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= lower[static_cast<size_t>(k) * n + i] * x[k];
        x[i] = s / lower[static_cast<size_t>(i) * n + i];
    }
}

DenseLU DenseLU::factor(std::vector<double> a, int n) {
    DenseLU f;
    f.n = n;
    f.piv.resize(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[static_cast<size_t>(i) * n + k]) >
                std::abs(a[static_cast<size_t>(p) * n + k]))
                p = i;
        f.piv[k] = p;
        if (p != k)
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<size_t>(k) * n + j], a[static_cast<size_t>(p) * n + j]);
        const double d = a[static_cast<size_t>(k) * n + k];
        if (d == 0.0) throw std::runtime_error("DenseLU: singular matrix");
        for (int i = k + 1; i < n; ++i) {
            const double l = a[static_cast<size_t>(i) * n + k] / d;
            a[static_cast<size_t>(i) * n + k] = l;
            for (int j = k + 1; j < n; ++j)
                a[static_cast<size_t>(i) * n + j] -= l * a[static_cast<size_t>(k) * n + j];
        }
    }
    f.lu = std::move(a);
    return f;
}

std::vector<double> DenseLU::solve(std::vector<double> b) const {
    // factor() swaps whole rows, so all interchanges apply before the sweeps
    for (int k = 0; k < n; ++k)
        if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i) b[i] -= lu[static_cast<size_t>(i) * n + k] * b[k];
    for (int k = n - 1; k >= 0; --k) {
        for (int j = k + 1; j < n; ++j) b[k] -= lu[static_cast<size_t>(k) * n + j] * b[j];
        b[k] /= lu[static_cast<size_t>(k) * n + k];
    }
    return b;
}

std::vector<double> DenseLU::solve_transpose(std::vector<double> b) const {
    // PA = LU gives A^T = U^T L^T P, so solve U^T z = b, L^T w = z and
    // un-permute in reverse order.
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < k; ++j) b[k] -= lu[static_cast<size_t>(j) * n + k] * b[j];
        b[k] /= lu[static_cast<size_t>(k) * n + k];
    }
    for (int k = n - 1; k >= 0; --k)
        for (int j = k + 1; j < n; ++j) b[k] -= lu[static_cast<size_t>(j) * n + k] * b[j];
    for (int k = n - 1; k >= 0; --k)
        if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    return b;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
    const auto idx = [n](int i, int j) { return static_cast<size_t>(i) * n + j; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[idx(i, j)] * a[idx(i, j)];
        if (off < 1e-28 * n * n) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[idx(p, q)];
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[idx(k, p)], akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[idx(p, k)], aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[idx(i, i)];
    std::sort(ev.begin(), ev.end());
    return ev;
}

double min_generalized_eigenvalue(const std::vector<double>& a,
                                  const std::vector<double>& b, int n) {
    const DenseCholesky chol = DenseCholesky::factor(b, n);
    const auto idx = [n](int i, int j) { return static_cast<size_t>(i) * n + j; };
    // W = L^{-1} A  (forward substitution applied to each column of A)
    std::vector<double> w(a);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double s = w[idx(i, j)];
            for (int k = 0; k < i; ++k) s -= chol.lower[idx(i, k)] * w[idx(k, j)];
            w[idx(i, j)] = s / chol.lower[idx(i, i)];
        }
    }
    // C = W L^{-T}, computed as C^T = L^{-1} W^T
    std::vector<double> c(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c[idx(i, j)] = w[idx(j, i)];
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double s = c[idx(i, j)];
            for (int k = 0; k < i; ++k) s -= chol.lower[idx(i, k)] * c[idx(k, j)];
            c[idx(i, j)] = s / chol.lower[idx(i, i)];
        }
    }
    // transpose back so c holds C = L^{-1} A L^{-T}
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) std::swap(c[idx(i, j)], c[idx(j, i)]);
    return symmetric_eigenvalues(std::move(c), n).front();
}

} // namespace dgest
