#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgest/basis.hpp"
#include "dgest/quadrature.hpp"

#include <cmath>
#include <random>

using namespace dgest;

TEST_CASE("Legendre values and derivatives at sample points") {
    // P_2(x) = (3x^2-1)/2, P_3(x) = (5x^3-3x)/2
    std::vector<double> v(5), d(5), dd(5);
    legendre_all(4, 0.3, v.data(), d.data(), dd.data());
    CHECK(v[2] == doctest::Approx(0.5 * (3 * 0.09 - 1)).epsilon(1e-14));
    CHECK(v[3] == doctest::Approx(0.5 * (5 * 0.027 - 3 * 0.3)).epsilon(1e-14));
    CHECK(d[2] == doctest::Approx(3 * 0.3).epsilon(1e-14));
    CHECK(d[3] == doctest::Approx(0.5 * (15 * 0.09 - 3)).epsilon(1e-14));
    CHECK(dd[3] == doctest::Approx(15 * 0.3).epsilon(1e-13));
    // P_n(1) = 1 for all n
    legendre_all(4, 1.0, v.data(), d.data(), dd.data());
    for (int n = 0; n <= 4; ++n) CHECK(v[n] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre rules integrate monomials exactly up to 2q-1") {
    for (int q = 1; q <= 12; ++q) {
        const QuadratureRule rule = QuadratureRule::gauss_legendre(q);
        REQUIRE(rule.size() == q);
        for (int k = 0; k <= 2 * q - 1; ++k) {
            double acc = 0.0;
            for (int i = 0; i < q; ++i) acc += rule.weights[i] * std::pow(rule.points[i], k);
            const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            CHECK(std::abs(acc - exact) <= 1e-13);
        }
    }
}

TEST_CASE("Gauss-Lobatto nodes match closed forms") {
    const auto n2 = gauss_lobatto_points(2);
    CHECK(n2[0] == -1.0);
    CHECK(n2[1] == 0.0);
    CHECK(n2[2] == 1.0);

    const auto n3 = gauss_lobatto_points(3);
    CHECK(n3[1] == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(n3[2] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));

    const auto n4 = gauss_lobatto_points(4);
    CHECK(n4[1] == doctest::Approx(-std::sqrt(3.0 / 7.0)).epsilon(1e-14));
    CHECK(n4[2] == 0.0);
    CHECK(n4[3] == doctest::Approx(std::sqrt(3.0 / 7.0)).epsilon(1e-14));

    for (int p = 1; p <= 8; ++p) {
        const auto nodes = gauss_lobatto_points(p);
        REQUIRE(nodes.size() == static_cast<size_t>(p + 1));
        for (size_t i = 0; i + 1 < nodes.size(); ++i) CHECK(nodes[i] < nodes[i + 1]);
        // symmetric set
        for (size_t i = 0; i < nodes.size(); ++i)
            CHECK(nodes[i] == doctest::Approx(-nodes[nodes.size() - 1 - i]).epsilon(1e-14));
    }
}

TEST_CASE("nodal transform round-trips modal coefficients") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int p = 1; p <= 5; ++p) {
        const NodalTransform nt = NodalTransform::build(p);
        std::vector<double> modal(nt.ndof);
        for (double& c : modal) c = dist(rng);
        const std::vector<double> nodal = nt.to_nodal(modal.data());
        const std::vector<double> back = nt.to_modal(nodal);
        for (int k = 0; k < nt.ndof; ++k)
            CHECK(back[k] == doctest::Approx(modal[k]).epsilon(1e-11));
    }
}

TEST_CASE("Lagrange basis: cardinal values and derivative sum") {
    const auto nodes = gauss_lobatto_points(4);
    std::vector<double> val(nodes.size()), der(nodes.size());
    for (size_t j = 0; j < nodes.size(); ++j) {
        lagrange_all(nodes, nodes[j], val.data(), der.data());
        for (size_t k = 0; k < nodes.size(); ++k)
            CHECK(val[k] == doctest::Approx(k == j ? 1.0 : 0.0).epsilon(1e-12));
    }
    // partition of unity and zero derivative sum at an interior point
    lagrange_all(nodes, 0.37, val.data(), der.data());
    double sv = 0.0, sd = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) {
        sv += val[k];
        sd += der[k];
    }
    CHECK(sv == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(sd) <= 1e-12);
}

TEST_CASE("basis table tensor ordering") {
    // at a single point, basis k = ix + (p+1) iy must equal P_ix(x) P_iy(y)
    const std::vector<Vec2> pts{{0.3, -0.6}};
    const BasisTable tab = BasisTable::tabulate(2, pts);
    std::vector<double> px(3), py(3);
    legendre_all(2, 0.3, px.data(), nullptr, nullptr);
    legendre_all(2, -0.6, py.data(), nullptr, nullptr);
    for (int iy = 0; iy <= 2; ++iy)
        for (int ix = 0; ix <= 2; ++ix)
            CHECK(tab.value[ix + 3 * iy] == doctest::Approx(px[ix] * py[iy]).epsilon(1e-14));
}
