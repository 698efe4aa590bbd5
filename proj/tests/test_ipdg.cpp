#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgest/ipdg.hpp"

#include <cmath>
#include <memory>
#include <random>

using namespace dgest;

namespace {

std::shared_ptr<const DgSpace> unit_space(int nx, int p) {
    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(Rect::unit_square(), nx, nx));
    return std::make_shared<const DgSpace>(mesh, p);
}

DgFunction random_fn(const std::shared_ptr<const DgSpace>& sp, unsigned seed, double s = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, s);
    DgFunction u(sp);
    for (double& c : u.coeff) c = dist(rng);
    return u;
}

} // namespace

TEST_CASE("penalty formula") {
    Face f;
    f.h_e = 0.5;
    DiscretizationParams params{0, 10.0};
    CHECK(penalty_sigma(f, params, 2) == doctest::Approx(80.0));
    f.h_e = 1.0;
    CHECK(penalty_sigma(f, params, 1) == doctest::Approx(10.0));
    CHECK(penalty_sigma(f, params, 2) == doctest::Approx(4.0 * penalty_sigma(f, params, 1)));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((DiscretizationParams{2, 10.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((DiscretizationParams{0, 0.5}).validate(), std::invalid_argument);
    CHECK_NOTHROW((DiscretizationParams{-1, 1.01}).validate());
}

TEST_CASE("B(0, v) vanishes") {
    auto sp = unit_space(2, 2);
    const Nonlinearity nl = preset_nonlinearity("hrs");
    AssemblyContext ctx{sp.get(), &nl, {0, 10.0}, 0.0};
    const DgFunction zero(sp);
    const DgFunction v = random_fn(sp, 17);
    CHECK(std::abs(semilinear_form(ctx, zero, v)) <= 1e-13);
}

TEST_CASE("conforming reduction on a single cell: the Dirichlet form") {
    auto sp = unit_space(1, 2);
    const Nonlinearity nl = preset_nonlinearity("linear");
    AssemblyContext ctx{sp.get(), &nl, {0, 10.0}, 0.0};
    const DgFunction b =
        l2_project([](Vec2 x) { return x.x * (1 - x.x) * x.y * (1 - x.y); }, sp);
    // int |grad bubble|^2 = 2 * (1/3)(1/30) = 1/45
    CHECK(semilinear_form(ctx, b, b) == doctest::Approx(1.0 / 45.0).epsilon(1e-12));
}

TEST_CASE("SIPG symmetry for the linear coefficient") {
    auto sp = unit_space(3, 2);
    const Nonlinearity nl = preset_nonlinearity("linear");
    AssemblyContext ctx{sp.get(), &nl, {-1, 10.0}, 0.0};
    const DgFunction w = random_fn(sp, 23);
    const DgFunction v = random_fn(sp, 29);
    const double bwv = semilinear_form(ctx, w, v);
    const double bvw = semilinear_form(ctx, v, w);
    CHECK(bwv == doctest::Approx(bvw).epsilon(1e-12));

    const BlockSparseMatrix jac = assemble_jacobian(ctx, w);
    CHECK(jac.max_asymmetry() <= 1e-12 * 100.0);  // entries scale with sigma ~ 1e2
}

TEST_CASE("residual of the zero state against a unit load") {
    auto sp = unit_space(2, 1);
    const Nonlinearity nl = preset_nonlinearity("hrs");
    AssemblyContext ctx{sp.get(), &nl, {0, 10.0}, 0.0};
    const DgFunction zero(sp);
    const std::vector<double> r = assemble_residual(ctx, zero, [](Vec2) { return 1.0; });
    const std::vector<double> load = assemble_load(*sp, [](Vec2) { return 1.0; });
    REQUIRE(r.size() == load.size());
    for (size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(-load[i]).epsilon(1e-13));
}

TEST_CASE("Jacobian matches central finite differences") {
    auto sp = unit_space(2, 2);
    const Nonlinearity nl = preset_nonlinearity("hrs");
    for (int theta : {-1, 0, 1}) {
        AssemblyContext ctx{sp.get(), &nl, {theta, 10.0}, 0.3};
        const DgFunction u = random_fn(sp, 31, 0.7);
        const DgFunction v = random_fn(sp, 37, 0.7);
        const BlockSparseMatrix jac = assemble_jacobian(ctx, u);
        const std::vector<double> jv = jac.multiply(v.coeff);
        const double eps = 1e-7;
        DgFunction up(sp), um(sp);
        for (size_t i = 0; i < u.coeff.size(); ++i) {
            up.coeff[i] = u.coeff[i] + eps * v.coeff[i];
            um.coeff[i] = u.coeff[i] - eps * v.coeff[i];
        }
        const std::vector<double> rp = assemble_form_vector(ctx, up);
        const std::vector<double> rm = assemble_form_vector(ctx, um);
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < jv.size(); ++i) {
            const double fd = (rp[i] - rm[i]) / (2.0 * eps);
            num += (fd - jv[i]) * (fd - jv[i]);
            den += jv[i] * jv[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-6);
    }
}

TEST_CASE("Jacobian sparsity touches only face neighbours") {
    auto sp = unit_space(3, 1);
    const Nonlinearity nl = preset_nonlinearity("linear");
    AssemblyContext ctx{sp.get(), &nl, {0, 10.0}, 0.0};
    const BlockSparseMatrix jac = assemble_jacobian(ctx, DgFunction(sp));
    // elements 0 and 4 are diagonal neighbours on the 3x3 grid: no block
    CHECK_FALSE(jac.has_block(0, 4));
    CHECK_FALSE(jac.has_block(0, 8));
    CHECK(jac.has_block(0, 1));
    CHECK(jac.has_block(0, 3));
    CHECK(jac.has_block(4, 4));
}

TEST_CASE("discrete operator: zero state, duality and the weak Laplacian") {
    auto sp = unit_space(2, 2);
    const Nonlinearity lin = preset_nonlinearity("linear");
    AssemblyContext ctx{sp.get(), &lin, {0, 10.0}, 0.0};

    const DgFunction zero(sp);
    const DgFunction az0 = apply_discrete_operator(ctx, zero);
    for (double c : az0.coeff) CHECK(std::abs(c) <= 1e-14);

    // duality <-A Z, V> = B(Z, V) on random pairs
    const Nonlinearity hrs = preset_nonlinearity("hrs");
    AssemblyContext ctxq{sp.get(), &hrs, {0, 10.0}, 0.0};
    const DgFunction z = random_fn(sp, 41, 0.6);
    const DgFunction v = random_fn(sp, 43, 0.6);
    const DgFunction az = apply_discrete_operator(ctxq, z);
    const double lhs = -l2_inner(az, v);
    const double rhs = semilinear_form(ctxq, z, v);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));

    // global polynomial with representable Laplacian: A Z = Pi(lap Z)
    const DgFunction bub =
        l2_project([](Vec2 x) { return x.x * (1 - x.x) * x.y * (1 - x.y); }, sp);
    const DgFunction abub = apply_discrete_operator(ctx, bub);
    const DgFunction lap = l2_project(
        [](Vec2 x) { return -2.0 * x.y * (1 - x.y) - 2.0 * x.x * (1 - x.x); }, sp);
    for (size_t i = 0; i < abub.coeff.size(); ++i)
        CHECK(abub.coeff[i] == doctest::Approx(lap.coeff[i]).epsilon(1e-9));
}

TEST_CASE("reconstruction data: discrete f collapses the oscillation part") {
    auto sp = unit_space(2, 1);
    const Nonlinearity nl = preset_nonlinearity("linear");
    AssemblyContext ctx{sp.get(), &nl, {0, 10.0}, 0.0};
    const DgFunction u = random_fn(sp, 47, 0.4);

    // f(x) = x + 2y lies in S^1, so f - Pi f = 0 and g = -A U
    const ReconstructionData g = reconstruction_data(
        ctx, u, [](double, Vec2 x) { return x.x + 2.0 * x.y; });
    CHECK(l2_norm_against(g.projected_f, g.f) <= 1e-12);
    const DgFunction au = apply_discrete_operator(ctx, u);
    for (size_t i = 0; i < au.coeff.size(); ++i)
        CHECK(g.minus_au.coeff[i] == doctest::Approx(-au.coeff[i]).epsilon(1e-11));

    // zero state, zero source: g vanishes identically
    const ReconstructionData g0 =
        reconstruction_data(ctx, DgFunction(sp), [](double, Vec2) { return 0.0; });
    for (double c : g0.minus_au.coeff) CHECK(std::abs(c) <= 1e-14);
    for (double c : g0.projected_f.coeff) CHECK(std::abs(c) <= 1e-14);
}

TEST_CASE("theta variants only differ when jumps meet gradients") {
    // the theta term vanishes for continuous states with zero boundary trace
    auto sp = unit_space(2, 2);
    const Nonlinearity nl = preset_nonlinearity("hrs");
    const DgFunction cont =
        l2_project([](Vec2 x) { return x.x * (1 - x.x) * x.y * (1 - x.y); }, sp);
    const DgFunction v = random_fn(sp, 53);
    double values[3];
    int k = 0;
    for (int theta : {-1, 0, 1}) {
        AssemblyContext ctx{sp.get(), &nl, {theta, 10.0}, 0.0};
        values[k++] = semilinear_form(ctx, cont, v);
    }
    CHECK(values[0] == doctest::Approx(values[1]).epsilon(1e-12));
    CHECK(values[1] == doctest::Approx(values[2]).epsilon(1e-12));

    // a discontinuous state separates them
    const DgFunction disc = random_fn(sp, 59);
    double dvalues[3];
    k = 0;
    for (int theta : {-1, 0, 1}) {
        AssemblyContext ctx{sp.get(), &nl, {theta, 10.0}, 0.0};
        dvalues[k++] = semilinear_form(ctx, disc, v);
    }
    CHECK(std::abs(dvalues[0] - dvalues[1]) > 1e-8);
    CHECK(std::abs(dvalues[2] - dvalues[1]) > 1e-8);
}
