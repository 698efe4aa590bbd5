#include "dgest/estimator.hpp"

#include "dgest/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace dgest {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ElementTerms {
    double interior = 0.0;
    double osc_interior = 0.0;
};

// Strong residual g + div alpha(U) on one element, split into the part seen
// by the degree p-1 projection and its complement.
ElementTerms interior_terms(const AssemblyContext& ctx, const DgFunction& u,
                            const ReconstructionData& g, int e) {
    const DgSpace& sp = *ctx.space;
    const Nonlinearity& nl = *ctx.nl;
    const ElementMap map = sp.mesh().element_map(e);
    const int nq = static_cast<int>(sp.cell_points().size());

    const EvalResult uv = evaluate_at_cell_points(u, e);
    const HessResult uh = hessian_at_cell_points(u, e);
    const EvalResult au = evaluate_at_cell_points(g.minus_au, e);
    const EvalResult pf = evaluate_at_cell_points(g.projected_f, e);

    std::vector<double> resid(nq);
    for (int q = 0; q < nq; ++q) {
        const Vec2 x = map.value(sp.cell_points()[q]);
        const Vec2 grad = uv.gradient[q];
        const double s = norm(grad);
        const double trace_h = uh.dxx[q] + uh.dyy[q];
        double div_flux = nl.mu(ctx.time, x, s) * trace_h;
        if (s > 1e-14) {
            const Vec2 hg{uh.dxx[q] * grad.x + uh.dxy[q] * grad.y,
                          uh.dxy[q] * grad.x + uh.dyy[q] * grad.y};
            div_flux += nl.dmu_ds(ctx.time, x, s) / s * dot(hg, grad);
        }
        resid[q] = au.value[q] + g.f(x) - pf.value[q] + div_flux;
    }

    const std::vector<double> proj = project_local(sp, e, resid, /*lower=*/true);
    const BasisTable& lo = sp.lower_cell_basis();
    ElementTerms t;
    for (int q = 0; q < nq; ++q) {
        const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
        double pv = 0.0;
        const double* phi = lo.values_at(q);
        for (int k = 0; k < lo.ndof; ++k) pv += proj[k] * phi[k];
        t.interior += jw * pv * pv;
        const double rem = resid[q] - pv;
        t.osc_interior += jw * rem * rem;
    }
    return t;
}

struct FaceTerms {
    double flux_jump = 0.0;      // ||Pi~_Gamma [alpha(U)]||_e^2
    double flux_osc = 0.0;       // ||(1 - Pi~_Gamma)[alpha(U)]||_e^2
    double jump_sq = 0.0;        // ||[U]||_e^2
};

FaceTerms face_terms(const AssemblyContext& ctx, const DgFunction& u, int fid) {
    const DgSpace& sp = *ctx.space;
    const Nonlinearity& nl = *ctx.nl;
    const Face& f = sp.mesh().faces[fid];
    const FaceTrace t = evaluate_face(u, fid);
    const int nq = sp.face_rule().size();
    const ElementMap pmap = sp.mesh().element_map(f.elem_plus);

    FaceTerms out;
    std::vector<double> flux_jump(nq, 0.0);
    for (int q = 0; q < nq; ++q) {
        const Vec2 jq = jump_scalar(t, q);
        out.jump_sq += sp.face_rule().weights[q] * dot(jq, jq) * 0.5 * f.length;
        if (t.has_minus) {
            const Vec2 ref = face_reference_point(f, true, sp.face_rule().points[q]);
            const Vec2 x = pmap.value(ref);
            const Vec2 ap = nl.mu(ctx.time, x, norm(t.grad_plus[q])) * t.grad_plus[q];
            const Vec2 am = nl.mu(ctx.time, x, norm(t.grad_minus[q])) * t.grad_minus[q];
            flux_jump[q] = dot(ap - am, f.normal);
        }
    }
    if (t.has_minus) {
        const std::vector<double> proj = face_project(sp, flux_jump, sp.degree() - 1);
        for (int q = 0; q < nq; ++q) {
            const double ds = sp.face_rule().weights[q] * 0.5 * f.length;
            out.flux_jump += ds * proj[q] * proj[q];
            const double rem = flux_jump[q] - proj[q];
            out.flux_osc += ds * rem * rem;
        }
    }
    return out;
}

} // namespace

EstimatorBreakdown eta_elliptic(const AssemblyContext& ctx, const DgFunction& u,
                                const ReconstructionData& g) {
    const DgSpace& sp = *ctx.space;
    const Mesh& mesh = sp.mesh();
    const int ne = mesh.n_elements();
    const double p = sp.degree();
    const double csig = ctx.params.c_sigma;

    EstimatorBreakdown bd;
    bd.interior.assign(ne, 0.0);
    bd.flux_jump.assign(ne, 0.0);
    bd.penalty.assign(ne, 0.0);
    bd.oscillation.assign(ne, 0.0);

    std::vector<ElementTerms> et(ne);
    parallel_for(ne, [&](int e) { et[e] = interior_terms(ctx, u, g, e); }, 8);

    const int nf = mesh.n_faces();
    std::vector<FaceTerms> ft(nf);
    parallel_for(nf, [&](int fid) { ft[fid] = face_terms(ctx, u, fid); }, 16);

    for (int e = 0; e < ne; ++e) {
        const double h = mesh.element_diameter[e];
        bd.interior[e] = h * h / (p * p) * et[e].interior;
        bd.oscillation[e] = h * h / (p * p) * et[e].osc_interior;
    }
    for (int fid = 0; fid < nf; ++fid) {
        const Face& f = mesh.faces[fid];
        const int elems[2] = {f.elem_plus, f.elem_minus};
        for (int side = 0; side < 2; ++side) {
            const int e = elems[side];
            if (e < 0) continue;
            const double h = mesh.element_diameter[e];
            if (f.elem_minus >= 0) {
                bd.flux_jump[e] += h / p * ft[fid].flux_jump;
                bd.oscillation[e] += h / p * ft[fid].flux_osc;
            }
            bd.penalty[e] += csig * csig * p * p * p / h * ft[fid].jump_sq;
        }
    }
    for (int e = 0; e < ne; ++e) {
        bd.eta_total += bd.interior[e] + bd.flux_jump[e] + bd.penalty[e];
        bd.osc_total += bd.oscillation[e];
    }
    bd.total = bd.c_est * (bd.eta_total + bd.osc_total);
    return bd;
}

std::vector<double> oscillation(const AssemblyContext& ctx, const DgFunction& u,
                                const ReconstructionData& g) {
    return eta_elliptic(ctx, u, g).oscillation;
}

BoundConstants populate_constants(const Nonlinearity& nl, const Mesh& mesh,
                                  const DiscretizationParams& params, double measured_c3) {
    if (!(nl.a_lower > 0.0))
        throw std::invalid_argument("populate_constants: monotonicity constant must be positive");
    BoundConstants c;
    c.a_lower = nl.a_lower;
    c.a_upper = nl.a_upper;
    c.c1 = 1.0 + std::sqrt(2.0) * nl.a_upper / nl.a_lower;
    c.c2 = std::sqrt(2.0) / nl.a_lower;
    c.c3 = measured_c3;
    c.c_sigma = params.c_sigma;
    c.c4 = c.c1 * std::sqrt(measured_c3 / params.c_sigma);

    // conservative Poincare-Friedrichs value for a convex domain
    double diam = 0.0;
    for (const Vec2& a : mesh.vertices)
        for (const Vec2& b : mesh.vertices) diam = std::max(diam, norm(a - b));
    c.c_pf = diam / kPi;
    c.c5 = c.c2 * c.c_pf;
    return c;
}

namespace {

double trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
    double s = 0.0;
    for (size_t n = 0; n + 1 < times.size(); ++n)
        s += 0.5 * (times[n + 1] - times[n]) * (values[n] + values[n + 1]);
    return s;
}

} // namespace

ErrorReport accumulate_parabolic(const TimeSeries& series, const ProblemSpec& spec,
                                 const DiscretizationParams& params,
                                 const BoundConstants& constants) {
    if (series.snapshots.empty()) throw std::invalid_argument("accumulate_parabolic: empty series");
    const auto& space = series.space;
    const size_t n = series.snapshots.size();

    ErrorReport rep;
    rep.elliptic_profile.resize(n);
    std::vector<double> sigma_jump_sq(n), ut_jump_sq(n);
    for (size_t i = 0; i < n; ++i) {
        AssemblyContext ctx{space.get(), &spec.nonlinearity, params, series.times[i]};
        const ReconstructionData g = reconstruction_data(ctx, series.snapshots[i], spec.source);
        rep.elliptic_profile[i] = eta_elliptic(ctx, series.snapshots[i], g).total;

        const double sj = face_weighted_norm(series.snapshots[i], FaceWeight::sigma,
                                             params.c_sigma);
        sigma_jump_sq[i] = sj * sj;
        // backward difference as the U_t surrogate; reuse the first one at t0
        const DgFunction& ut = series.backward_diff.empty()
                                   ? series.snapshots[i]
                                   : series.backward_diff[i == 0 ? 0 : i - 1];
        const double uj = series.backward_diff.empty()
                              ? 0.0
                              : face_weighted_norm(ut, FaceWeight::h_over_p2, params.c_sigma);
        ut_jump_sq[i] = uj * uj;
    }

    const double al_inv_sqrt = 1.0 / std::sqrt(constants.a_lower);
    rep.term_elliptic = constants.c1 * std::sqrt(trapezoid(series.times, rep.elliptic_profile));
    rep.term_init_l2 = al_inv_sqrt * l2_norm_against(series.snapshots.front(), spec.initial);
    rep.term_init_jump =
        al_inv_sqrt * constants.c3 *
        face_weighted_norm(series.snapshots.front(), FaceWeight::h_over_p2, params.c_sigma);
    rep.term_sigma_jump = constants.c4 * std::sqrt(trapezoid(series.times, sigma_jump_sq));
    rep.term_ut_jump = constants.c5 * std::sqrt(trapezoid(series.times, ut_jump_sq));
    rep.bound_total = rep.term_elliptic + rep.term_init_l2 + rep.term_init_jump +
                      rep.term_sigma_jump + rep.term_ut_jump;
    return rep;
}

double true_error(const TimeSeries& series, const ProblemSpec& spec,
                  const DiscretizationParams& params, std::vector<double>* profile) {
    if (!spec.has_exact) throw std::invalid_argument("true_error: no exact solution available");
    if (series.snapshots.empty()) throw std::invalid_argument("true_error: empty series");

    const size_t n = series.snapshots.size();
    std::vector<double> err(n), err_sq(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = series.times[i];
        const auto& exact = spec.exact;
        const auto& grad = spec.exact_grad;
        err[i] = energy_norm_error(
            series.snapshots[i], [&exact, t](Vec2 x) { return exact(t, x); },
            [&grad, t](Vec2 x) { return grad(t, x); }, params.c_sigma);
        err_sq[i] = err[i] * err[i];
    }
    if (profile) *profile = err;
    return std::sqrt(trapezoid(series.times, err_sq));
}

} // namespace dgest
