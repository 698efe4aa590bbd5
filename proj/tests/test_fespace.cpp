#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgest/fespace.hpp"

#include <cmath>
#include <memory>
#include <random>

using namespace dgest;

namespace {

std::shared_ptr<const DgSpace> make_space(const Rect& r, int nx, int ny, int p) {
    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(r, nx, ny));
    return std::make_shared<const DgSpace>(mesh, p);
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

TEST_CASE("evaluate: constants, linears and x^2 on the unit cell") {
    auto space = make_space(Rect::unit_square(), 1, 1, 2);

    const DgFunction one = l2_project([](Vec2) { return 1.0; }, space);
    const EvalResult r1 = evaluate(one, 0, {{-0.5, 0.2}, {0.9, -0.9}});
    for (size_t q = 0; q < r1.value.size(); ++q) {
        CHECK(r1.value[q] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(r1.gradient[q].x) <= 1e-13);
        CHECK(std::abs(r1.gradient[q].y) <= 1e-13);
    }

    const DgFunction lin = l2_project([](Vec2 x) { return x.x; }, space);
    const EvalResult r2 = evaluate(lin, 0, {{0.1, 0.7}});
    CHECK(r2.gradient[0].x == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(r2.gradient[0].y) <= 1e-13);

    // x^2 at x = 0.3 -> reference xi = -0.4
    const DgFunction sq = l2_project([](Vec2 x) { return x.x * x.x; }, space);
    const EvalResult r3 = evaluate(sq, 0, {{-0.4, 0.3}});
    CHECK(r3.value[0] == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(r3.gradient[0].x == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(std::abs(r3.gradient[0].y) <= 1e-12);

    CHECK_THROWS_AS(evaluate(sq, 3, {{0.0, 0.0}}), std::out_of_range);
}

TEST_CASE("l2_project reproduces members of the space and is idempotent") {
    auto space = make_space(Rect::unit_square(), 2, 2, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist(0.0, 1.0);
    DgFunction v(space);
    for (double& c : v.coeff) c = dist(rng);

    const DgFunction w = l2_project(
        [&v](Vec2 x) {
            // pointwise evaluation through the element containing x
            const Mesh& m = v.space->mesh();
            for (int e = 0; e < m.n_elements(); ++e) {
                const ElementMap map = m.element_map(e);
                const Vec2 ref = map.inverse(x);
                if (std::abs(ref.x) <= 1.0 + 1e-12 && std::abs(ref.y) <= 1.0 + 1e-12)
                    return evaluate(v, e, {ref}).value[0];
            }
            return 0.0;
        },
        space);
    for (size_t i = 0; i < v.coeff.size(); ++i)
        CHECK(w.coeff[i] == doctest::Approx(v.coeff[i]).epsilon(1e-11));
}

TEST_CASE("projection of x^2 onto Q1 on the reference cell is the constant 1/3") {
    auto space = make_space({-1.0, -1.0, 1.0, 1.0}, 1, 1, 1);
    const DgFunction u = l2_project([](Vec2 x) { return x.x * x.x; }, space);
    const EvalResult r = evaluate(u, 0, {{-0.8, 0.5}, {0.0, 0.0}, {0.6, -0.2}});
    for (double v : r.value) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("projection error of sin sin drops by about 2^{p+1} per refinement") {
    const ScalarField f = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
    auto coarse = make_space(Rect::unit_square(), 4, 4, 2);
    auto fine = make_space(Rect::unit_square(), 8, 8, 2);
    const double e_coarse = l2_norm_against(l2_project(f, coarse), f);
    const double e_fine = l2_norm_against(l2_project(f, fine), f);
    const double ratio = e_coarse / e_fine;
    CHECK(ratio > 6.5);
    CHECK(ratio < 9.5);
}

TEST_CASE("lower projection: means for p=1 and odd functions on the reference cell") {
    auto space = make_space({-1.0, -1.0, 1.0, 1.0}, 1, 1, 1);
    const DgFunction u = l2_project_lower([](Vec2 x) { return x.x; }, *space);
    CHECK(u.space->degree() == 0);
    const EvalResult r = evaluate(u, 0, {{0.3, -0.4}});
    CHECK(std::abs(r.value[0]) <= 1e-14);

    // a function already of degree p-1 is reproduced
    auto sp2 = make_space(Rect::unit_square(), 2, 2, 2);
    const ScalarField g = [](Vec2 x) { return 2.0 + x.x - 0.5 * x.y + x.x * x.y; };
    const DgFunction w = l2_project_lower(g, *sp2);
    CHECK(l2_norm_against(w, g) <= 1e-13);
}

TEST_CASE("face projection: fixed points and Legendre means") {
    auto space = make_space(Rect::unit_square(), 1, 1, 2);
    const int nq = space->face_rule().size();
    std::vector<double> trace(nq);

    // degree p-1 = 1 trace is unchanged
    for (int q = 0; q < nq; ++q) trace[q] = 0.7 - 1.3 * space->face_rule().points[q];
    std::vector<double> proj = face_project(*space, trace, 1);
    for (int q = 0; q < nq; ++q) CHECK(proj[q] == doctest::Approx(trace[q]).epsilon(1e-13));

    // odd trace onto constants vanishes
    for (int q = 0; q < nq; ++q) trace[q] = space->face_rule().points[q];
    proj = face_project(*space, trace, 0);
    for (int q = 0; q < nq; ++q) CHECK(std::abs(proj[q]) <= 1e-14);

    // t^2 onto degree 1: the constant 1/3
    for (int q = 0; q < nq; ++q)
        trace[q] = space->face_rule().points[q] * space->face_rule().points[q];
    proj = face_project(*space, trace, 1);
    for (int q = 0; q < nq; ++q) CHECK(proj[q] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("jumps and averages with boundary conventions") {
    auto space = make_space(Rect::unit_square(), 2, 1, 1);
    const Mesh& mesh = space->mesh();

    // globally continuous function: zero interior jumps
    const DgFunction cont = l2_project([](Vec2 x) { return 1.0 + x.x + 2.0 * x.y; }, space);
    for (int fid : mesh.interior_face_ids) {
        const FaceTrace t = evaluate_face(cont, fid);
        for (int q = 0; q < space->face_rule().size(); ++q)
            CHECK(norm(jump_scalar(t, q)) <= 1e-13);
    }

    // indicator of the plus cell: [u] = n+
    DgFunction ind(space);
    ind.element_coeffs(0)[0] = 1.0;
    const int fid = mesh.interior_face_ids[0];
    const Face& f = mesh.faces[fid];
    REQUIRE(f.elem_plus == 0);
    const FaceTrace t = evaluate_face(ind, fid);
    for (int q = 0; q < space->face_rule().size(); ++q) {
        const Vec2 j = jump_scalar(t, q);
        CHECK(j.x == doctest::Approx(f.normal.x).epsilon(1e-13));
        CHECK(j.y == doctest::Approx(f.normal.y).epsilon(1e-13));
        CHECK(average_scalar(t, q) == doctest::Approx(0.5).epsilon(1e-13));
    }

    // boundary face with trace 3 and outward normal (1,0)
    DgFunction three = l2_project([](Vec2) { return 3.0; }, space);
    for (int bid : mesh.boundary_face_ids) {
        const Face& bf = mesh.faces[bid];
        if (std::abs(bf.normal.x - 1.0) > 1e-14) continue;
        const FaceTrace bt = evaluate_face(three, bid);
        for (int q = 0; q < space->face_rule().size(); ++q) {
            const Vec2 j = jump_scalar(bt, q);
            CHECK(j.x == doctest::Approx(3.0).epsilon(1e-13));
            CHECK(std::abs(j.y) <= 1e-13);
        }
    }
}

TEST_CASE("Oswald interpolation: fixed point, boundary zeroing, averaging") {
    // continuous with zero boundary trace is a fixed point
    auto sp = make_space(Rect::unit_square(), 2, 2, 2);
    const DgFunction bubble =
        l2_project([](Vec2 x) { return x.x * (1 - x.x) * x.y * (1 - x.y); }, sp);
    const DgFunction fix = oswald_interpolate(bubble);
    for (size_t i = 0; i < fix.coeff.size(); ++i)
        CHECK(fix.coeff[i] == doctest::Approx(bubble.coeff[i]).epsilon(1e-10));

    // single element, v = 1: every node is a boundary node
    auto sp1 = make_space(Rect::unit_square(), 1, 1, 1);
    const DgFunction one = l2_project([](Vec2) { return 1.0; }, sp1);
    const DgFunction z = oswald_interpolate(one);
    for (double c : z.coeff) CHECK(std::abs(c) <= 1e-13);

    // 2x1 mesh, piecewise constant 1|0, p=2: the shared interior node
    // averages to 1/2, boundary nodes vanish
    auto sp21 = make_space(Rect::unit_square(), 2, 1, 2);
    DgFunction step(sp21);
    step.element_coeffs(0)[0] = 1.0;
    const DgFunction avg = oswald_interpolate(step);
    // midpoint of the shared face x = 0.5 is reference (1, 0) in element 0
    CHECK(evaluate(avg, 0, {{1.0, 0.0}}).value[0] == doctest::Approx(0.5).epsilon(1e-12));
    // center of the left cell keeps its one-sided value
    CHECK(evaluate(avg, 0, {{0.0, 0.0}}).value[0] == doctest::Approx(1.0).epsilon(1e-12));
    // boundary corner vanishes
    CHECK(std::abs(evaluate(avg, 0, {{-1.0, -1.0}}).value[0]) <= 1e-12);
    // at p=1 the 2x1 mesh has no interior nodes at all
    auto sp21a = make_space(Rect::unit_square(), 2, 1, 1);
    DgFunction step1(sp21a);
    step1.element_coeffs(0)[0] = 1.0;
    const DgFunction avg1 = oswald_interpolate(step1);
    for (double c : avg1.coeff) CHECK(std::abs(c) <= 1e-13);

    // result is continuous with zero boundary values
    const FaceTrace tr = evaluate_face(avg, sp21->mesh().interior_face_ids[0]);
    for (int q = 0; q < sp21->face_rule().size(); ++q)
        CHECK(norm(jump_scalar(tr, q)) <= 1e-12);
}

TEST_CASE("energy norm: zero, conforming reduction and the sine product") {
    auto sp = make_space(Rect::unit_square(), 4, 4, 2);
    const DgFunction zero(sp);
    CHECK(energy_norm(zero, 10.0) == 0.0);

    // conforming with zero trace: energy norm equals the broken seminorm
    const DgFunction bubble =
        l2_project([](Vec2 x) { return x.x * (1 - x.x) * x.y * (1 - x.y); }, sp);
    CHECK(energy_norm(bubble, 10.0) ==
          doctest::Approx(broken_h1_seminorm(bubble)).epsilon(1e-10));

    // ||grad(sin pi x sin pi y)|| = pi / sqrt(2)
    auto sp8 = make_space(Rect::unit_square(), 8, 8, 3);
    const double en = energy_norm_field(
        *sp8, [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); },
        [](Vec2 x) {
            return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                        kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
        },
        10.0);
    CHECK(en == doctest::Approx(kPi / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(en == doctest::Approx(2.221441469).epsilon(1e-9));
}

TEST_CASE("face weighted norms of a unit step on the 2x1 mesh") {
    auto sp = make_space(Rect::unit_square(), 2, 1, 1);
    DgFunction step(sp);
    step.element_coeffs(0)[0] = 1.0;
    const double he = std::sqrt(1.25);
    const double c_sigma = 10.0;
    // jump magnitude 1 on the interior face (length 1) and on the three
    // boundary faces of the left cell (lengths 1, 1/2, 1/2); sigma = 10/h_e
    const double expected_sigma = std::sqrt(c_sigma / he * 3.0);
    CHECK(face_weighted_norm(step, FaceWeight::sigma, c_sigma) ==
          doctest::Approx(expected_sigma).epsilon(1e-12));
    const double expected_h = std::sqrt(he * 3.0);
    CHECK(face_weighted_norm(step, FaceWeight::h_over_p2, c_sigma) ==
          doctest::Approx(expected_h).epsilon(1e-12));
    // a continuous representable field with zero boundary trace contributes
    // nothing anywhere
    auto sp2 = make_space(Rect::unit_square(), 2, 1, 2);
    const DgFunction bubble =
        l2_project([](Vec2 x) { return x.x * (1 - x.x) * x.y * (1 - x.y); }, sp2);
    CHECK(face_weighted_norm(bubble, FaceWeight::sigma, c_sigma) <= 1e-10);
}

TEST_CASE("second derivatives agree with finite differences on a skewed quad") {
    const std::vector<Vec2> verts{{0, 0}, {1.1, 0.15}, {0.95, 1.2}, {-0.1, 0.85}};
    auto mesh = std::make_shared<const Mesh>(build_from_cells(verts, {{0, 1, 2, 3}}));
    auto space = std::make_shared<const DgSpace>(mesh, 3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(0.0, 1.0);
    DgFunction u(space);
    for (double& c : u.coeff) c = dist(rng);

    const HessResult hess = hessian_at_cell_points(u, 0);
    const ElementMap map = mesh->element_map(0);
    const double h = 1e-4;
    const auto value_at = [&](Vec2 x) { return evaluate(u, 0, {map.inverse(x)}).value[0]; };
    for (int q = 0; q < 4; ++q) {
        const Vec2 x = map.value(space->cell_points()[q]);
        const double uxx =
            (value_at({x.x + h, x.y}) - 2 * value_at(x) + value_at({x.x - h, x.y})) / (h * h);
        const double uyy =
            (value_at({x.x, x.y + h}) - 2 * value_at(x) + value_at({x.x, x.y - h})) / (h * h);
        const double uxy = (value_at({x.x + h, x.y + h}) - value_at({x.x + h, x.y - h}) -
                            value_at({x.x - h, x.y + h}) + value_at({x.x - h, x.y - h})) /
                           (4 * h * h);
        CHECK(hess.dxx[q] == doctest::Approx(uxx).epsilon(5e-5));
        CHECK(hess.dyy[q] == doctest::Approx(uyy).epsilon(5e-5));
        CHECK(hess.dxy[q] == doctest::Approx(uxy).epsilon(5e-5));
    }
}
