#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgest/linalg.hpp"

#include <cmath>
#include <random>

using namespace dgest;

namespace {

std::vector<double> random_band_system(int n, int bw, double diag_boost, std::mt19937_64& rng,
                                       BandMatrix& out) {
    std::normal_distribution<double> dist(0.0, 1.0);
    out = BandMatrix(n, bw);
    std::vector<double> dense(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - bw); j <= std::min(n - 1, i + bw); ++j) {
            const double v = dist(rng) + (i == j ? diag_boost : 0.0);
            out.at(i, j) = v;
            dense[static_cast<size_t>(i) * n + j] = v;
        }
    }
    return dense;
}

} // namespace

TEST_CASE("band LU solves random systems to direct-solver accuracy") {
    std::mt19937_64 rng(7);
    // diag_boost = 0 forces heavy pivoting
    for (const auto [n, bw, boost] :
         {std::tuple{12, 3, 4.0}, {40, 7, 0.0}, {100, 15, 0.0}, {60, 5, 0.0}}) {
        BandMatrix band;
        random_band_system(n, bw, boost, rng, band);
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> x_ref(n);
        for (double& v : x_ref) v = dist(rng);
        const std::vector<double> rhs = band.multiply(x_ref);

        BandMatrix factors = band;
        factors.factorize();
        const std::vector<double> x = factors.solve(rhs);

        const std::vector<double> back = band.multiply(x);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            num += (back[i] - rhs[i]) * (back[i] - rhs[i]);
            den += rhs[i] * rhs[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
    }
}

TEST_CASE("dense LU solves nonsymmetric systems that need pivoting") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int n : {2, 5, 9, 16, 30}) {
        std::vector<double> a(static_cast<size_t>(n) * n);
        for (double& v : a) v = dist(rng);
        std::vector<double> x(n), b(n, 0.0);
        for (double& v : x) v = dist(rng);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b[i] += a[static_cast<size_t>(i) * n + j] * x[j];
        const DenseLU lu = DenseLU::factor(a, n);
        const std::vector<double> got = lu.solve(b);
        for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(x[i]).epsilon(1e-9));
    }
}

TEST_CASE("band LU requires pivoting on a zero diagonal") {
    BandMatrix band(2, 1);
    band.at(0, 0) = 0.0;
    band.at(0, 1) = 1.0;
    band.at(1, 0) = 1.0;
    band.at(1, 1) = 0.0;
    band.factorize();
    const std::vector<double> x = band.solve({2.0, 3.0});
    CHECK(x[0] == doctest::Approx(3.0));
    CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("identity system returns the right-hand side") {
    BandMatrix band(5, 1);
    for (int i = 0; i < 5; ++i) band.at(i, i) = 1.0;
    band.factorize();
    const std::vector<double> r{1.0, -2.0, 3.0, 0.5, 0.0};
    CHECK(band.solve(r) == r);
}

TEST_CASE("singular matrix is reported") {
    BandMatrix band(3, 1);
    band.at(0, 0) = 1.0;
    band.at(1, 1) = 0.0;  // whole middle row zero
    band.at(2, 2) = 1.0;
    CHECK_THROWS_AS(band.factorize(), std::runtime_error);
}

TEST_CASE("dense Cholesky round-trips an SPD matrix") {
    // A = L0 L0^T with a fixed lower factor
    const int n = 3;
    const std::vector<double> l0{2, 0, 0, 1, 3, 0, 0.5, -1, 1.5};
    std::vector<double> a(9, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) a[i * n + j] += l0[i * n + k] * l0[j * n + k];
    const DenseCholesky chol = DenseCholesky::factor(a, n);
    std::vector<double> x{1.0, 2.0, -1.0};
    std::vector<double> b(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b[i] += a[i * n + j] * x[j];
    chol.solve_in_place(b);
    for (int i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("Jacobi eigenvalues of a known matrix") {
    // eigenvalues of [[2,1],[1,2]] are 1 and 3
    const std::vector<double> a{2, 1, 1, 2};
    const std::vector<double> ev = symmetric_eigenvalues(a, 2);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("generalized eigenvalue against a scaled identity") {
    // A x = lambda B x with B = 2 I: lambdas halve
    const std::vector<double> a{2, 1, 1, 2};
    const std::vector<double> b{2, 0, 0, 2};
    CHECK(min_generalized_eigenvalue(a, b, 2) == doctest::Approx(0.5).epsilon(1e-12));
}
