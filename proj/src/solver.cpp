#include "dgest/solver.hpp"

#include "dgest/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgest {

std::vector<double> solve_linear(const BlockSparseMatrix& jacobian,
                                 const std::vector<double>& rhs) {
    BandMatrix band = jacobian.to_band();
    band.factorize();
    return band.solve(rhs);
}

namespace {

std::vector<double> residual_vector(const AssemblyContext& ctx, const DgFunction& u,
                                    const std::vector<double>& load, double mass_shift) {
    std::vector<double> r = assemble_form_vector(ctx, u);
    if (mass_shift != 0.0) {
        const std::vector<double> mu = mass_apply(*ctx.space, u.coeff);
        for (size_t i = 0; i < r.size(); ++i) r[i] += mass_shift * mu[i];
    }
    for (size_t i = 0; i < r.size(); ++i) r[i] -= load[i];
    return r;
}

} // namespace

NewtonReport newton_solve(const AssemblyContext& ctx, DgFunction& u,
                          const std::vector<double>& load, const NewtonConfig& config,
                          double mass_shift, LinearCache* cache) {
    if (!(config.tolerance > 0.0) || config.max_iterations < 1)
        throw std::invalid_argument("newton_solve: bad configuration");
    const DgSpace& sp = *ctx.space;
    NewtonReport rep;

    std::vector<double> r = residual_vector(ctx, u, load, mass_shift);
    double rnorm = residual_dual_norm(sp, r);
    rep.residual = rnorm;
    rep.history.push_back(rnorm);
    if (rnorm <= config.tolerance) return rep;

    const bool cacheable = ctx.nl->linear && cache != nullptr;
    std::vector<std::vector<double>> masses;
    if (mass_shift != 0.0) masses = element_mass_matrices(sp);

    for (int it = 0; it < config.max_iterations; ++it) {
        BandMatrix* factors = nullptr;
        BandMatrix local;
        if (cacheable && cache->valid) {
            factors = &cache->factors;
        } else {
            BlockSparseMatrix jac = assemble_jacobian(ctx, u);
            if (mass_shift != 0.0) jac.add_scaled_block_diagonal(masses, mass_shift);
            local = jac.to_band();
            local.factorize();
            if (cacheable) {
                cache->factors = std::move(local);
                cache->valid = true;
                factors = &cache->factors;
            } else {
                factors = &local;
            }
        }
        const std::vector<double> step = factors->solve(r);

        // backtracking on the scaled residual norm
        double lambda = 1.0;
        std::vector<double> saved = u.coeff;
        double new_norm = 0.0;
        std::vector<double> new_r;
        for (int h = 0; h <= config.max_halvings; ++h) {
            for (size_t i = 0; i < u.coeff.size(); ++i)
                u.coeff[i] = saved[i] - lambda * step[i];
            new_r = residual_vector(ctx, u, load, mass_shift);
            new_norm = residual_dual_norm(sp, new_r);
            if (new_norm < rnorm || new_norm <= config.tolerance) break;
            lambda *= 0.5;
        }
        r = std::move(new_r);
        rnorm = new_norm;
        rep.iterations = it + 1;
        rep.history.push_back(rnorm);
        rep.residual = rnorm;
        if (rnorm <= config.tolerance) return rep;
    }
    throw NewtonDivergence("Newton failed to reach tolerance " +
                               std::to_string(config.tolerance) + " (residual " +
                               std::to_string(rnorm) + ")",
                           rep.iterations);
}

DgFunction solve_elliptic(const ProblemSpec& spec, const std::shared_ptr<const DgSpace>& space,
                          const DiscretizationParams& params, const NewtonConfig& config,
                          const DgFunction* initial_guess, NewtonReport* report) {
    params.validate();
    AssemblyContext ctx{space.get(), &spec.nonlinearity, params, 0.0};
    DgFunction u = initial_guess ? *initial_guess : DgFunction(space);
    const auto& f = spec.source;
    const std::vector<double> load =
        assemble_load(*space, [&f](Vec2 x) { return f(0.0, x); });
    NewtonReport rep = newton_solve(ctx, u, load, config);
    if (report) *report = rep;
    return u;
}

double DtPolicy::resolve(double h_max, int p) const {
    if (dt > 0.0) return dt;
    return scale * std::pow(h_max, p + 1);
}

TimeSeries march_parabolic(const ProblemSpec& spec, const std::shared_ptr<const DgSpace>& space,
                           const DiscretizationParams& params, const DtPolicy& dt_policy,
                           const NewtonConfig& config) {
    params.validate();
    if (spec.steady)
        throw std::invalid_argument("march_parabolic: '" + spec.name + "' is a steady problem");
    const double T = spec.t_final;
    if (!(T > 0.0)) throw std::invalid_argument("march_parabolic: final time must be positive");

    const double dt_target = dt_policy.resolve(space->mesh().h_max(), space->degree());
    const int nsteps = std::max(1, static_cast<int>(std::ceil(T / dt_target - 1e-12)));
    const double dt = T / nsteps;

    TimeSeries series;
    series.space = space;
    series.times.reserve(nsteps + 1);
    series.snapshots.reserve(nsteps + 1);
    series.backward_diff.reserve(nsteps);

    DgFunction u = l2_project(spec.initial, space);
    series.times.push_back(0.0);
    series.snapshots.push_back(u);

    LinearCache cache;
    const auto& f = spec.source;
    for (int n = 0; n < nsteps; ++n) {
        const double t_next = (n + 1 == nsteps) ? T : dt * (n + 1);
        AssemblyContext ctx{space.get(), &spec.nonlinearity, params, t_next};
        std::vector<double> load =
            assemble_load(*space, [&f, t_next](Vec2 x) { return f(t_next, x); });
        const std::vector<double> mu_old = mass_apply(*space, u.coeff);
        for (size_t i = 0; i < load.size(); ++i) load[i] += mu_old[i] / dt;

        DgFunction prev = u;
        try {
            const NewtonReport rep = newton_solve(ctx, u, load, config, 1.0 / dt, &cache);
            series.newton_iterations.push_back(rep.iterations);
        } catch (const NewtonDivergence& e) {
            throw NewtonDivergence(std::string(e.what()) + " at time step " +
                                       std::to_string(n + 1),
                                   e.iterations, n + 1);
        }

        DgFunction diff(space);
        for (size_t i = 0; i < u.coeff.size(); ++i)
            diff.coeff[i] = (u.coeff[i] - prev.coeff[i]) / dt;
        series.times.push_back(t_next);
        series.snapshots.push_back(u);
        series.backward_diff.push_back(std::move(diff));
    }
    return series;
}

// ---- conforming oracle space ----

std::shared_ptr<const ConformingSpace> build_conforming_space(
    const std::shared_ptr<const DgSpace>& dg_space) {
    const DgSpace& sp = *dg_space;
    if (sp.degree() < 1)
        throw std::invalid_argument("build_conforming_space: degree must be >= 1");
    auto out = std::make_shared<ConformingSpace>();
    ConformingSpace& cs = *out;
    cs.dg = dg_space;

    // Lagrange basis on the Gauss-Lobatto nodes, tabulated at the cell
    // quadrature points through the modal tables: N = Phi * V^{-1}.
    const NodalTransform& nt = sp.nodal_transform();
    const int ndof = nt.ndof;
    const int nq = static_cast<int>(sp.cell_points().size());
    cs.shape_value.assign(static_cast<size_t>(nq) * ndof, 0.0);
    cs.shape_gxi.assign(static_cast<size_t>(nq) * ndof, 0.0);
    cs.shape_geta.assign(static_cast<size_t>(nq) * ndof, 0.0);
    std::vector<double> unit(ndof, 0.0);
    for (int a = 0; a < ndof; ++a) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[a] = 1.0;
        const std::vector<double> modal = nt.inverse.solve(unit);
        for (int q = 0; q < nq; ++q) {
            const size_t base = static_cast<size_t>(q) * ndof;
            double v = 0.0, gx = 0.0, ge = 0.0;
            for (int k = 0; k < ndof; ++k) {
                v += modal[k] * sp.cell_basis().value[base + k];
                gx += modal[k] * sp.cell_basis().grad_xi[base + k];
                ge += modal[k] * sp.cell_basis().grad_eta[base + k];
            }
            cs.shape_value[base + a] = v;
            cs.shape_gxi[base + a] = gx;
            cs.shape_geta[base + a] = ge;
        }
    }

    const auto& bnd = sp.oswald_node_on_boundary();
    cs.interior_index.assign(sp.n_oswald_nodes(), -1);
    for (int g = 0; g < sp.n_oswald_nodes(); ++g)
        if (!bnd[g]) cs.interior_index[g] = cs.n_equations++;

    cs.node_coords.assign(sp.n_oswald_nodes(), Vec2{});
    const int p = sp.degree();
    const auto& gll = nt.gll;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const auto& gids = sp.oswald_node_ids(e);
        for (int ay = 0; ay <= p; ++ay)
            for (int ax = 0; ax <= p; ++ax)
                cs.node_coords[gids[ax + (p + 1) * ay]] = map.value({gll[ax], gll[ay]});
    }
    return out;
}

ConformingFunction cg_interpolate(const std::shared_ptr<const ConformingSpace>& cs,
                                  const ScalarField& f, bool zero_boundary) {
    ConformingFunction w;
    w.space = cs;
    w.nodal.resize(cs->node_coords.size());
    const auto& bnd = cs->dg->oswald_node_on_boundary();
    for (size_t g = 0; g < cs->node_coords.size(); ++g)
        w.nodal[g] = (zero_boundary && bnd[g]) ? 0.0 : f(cs->node_coords[g]);
    return w;
}

EvalResult cg_evaluate_at_cell_points(const ConformingFunction& w, int element) {
    const ConformingSpace& cs = *w.space;
    const DgSpace& sp = *cs.dg;
    const int ndof = cs.nodes_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    const ElementMap map = sp.mesh().element_map(element);
    const auto& gids = sp.oswald_node_ids(element);

    EvalResult r;
    r.value.resize(nq);
    r.gradient.resize(nq);
    for (int q = 0; q < nq; ++q) {
        const size_t base = static_cast<size_t>(q) * ndof;
        double v = 0.0;
        Vec2 g{0.0, 0.0};
        for (int a = 0; a < ndof; ++a) {
            const double c = w.nodal[gids[a]];
            v += c * cs.shape_value[base + a];
            g.x += c * cs.shape_gxi[base + a];
            g.y += c * cs.shape_geta[base + a];
        }
        r.value[q] = v;
        r.gradient[q] = map.jacobian(sp.cell_points()[q]).inverse().transpose().apply(g);
    }
    return r;
}

EvalResult evaluate_on_fine_element(const DgFunction& coarse, const DgSpace& fine_space,
                                    int fine_element) {
    const Mesh& fine = fine_space.mesh();
    if (fine.parent_element.empty())
        throw std::invalid_argument("evaluate_on_fine_element: fine mesh has no parent map");
    const int parent = fine.parent_element[fine_element];
    const ElementMap fine_map = fine.element_map(fine_element);
    const ElementMap coarse_map = coarse.space->mesh().element_map(parent);
    std::vector<Vec2> refs(fine_space.cell_points().size());
    for (size_t q = 0; q < refs.size(); ++q)
        refs[q] = coarse_map.inverse(fine_map.value(fine_space.cell_points()[q]));
    return evaluate(coarse, parent, refs);
}

namespace {

struct CgSystem {
    const ConformingSpace* cs;
    const AssemblyContext* ctx;           // nonlinearity + time (space unused)
    std::vector<std::vector<double>> gval;  // datum g at cell points per element

    std::vector<double> residual(const ConformingFunction& w) const;
    BandMatrix jacobian(const ConformingFunction& w, int bandwidth) const;
};

std::vector<double> CgSystem::residual(const ConformingFunction& w) const {
    const DgSpace& sp = *cs->dg;
    const Nonlinearity& nl = *ctx->nl;
    const int ndof = cs->nodes_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    std::vector<double> r(cs->n_equations, 0.0);
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult we = cg_evaluate_at_cell_points(w, e);
        const auto& gids = sp.oswald_node_ids(e);
        for (int q = 0; q < nq; ++q) {
            const Vec2 ref = sp.cell_points()[q];
            const Mat2 j = map.jacobian(ref);
            const double jw = j.det() * sp.cell_weights()[q];
            const Mat2 jinvT = j.inverse().transpose();
            const Vec2 x = map.value(ref);
            const Vec2 a = nl.mu(ctx->time, x, norm(we.gradient[q])) * we.gradient[q];
            const double gq = gval[e][q];
            const size_t base = static_cast<size_t>(q) * ndof;
            for (int k = 0; k < ndof; ++k) {
                const int eq = cs->interior_index[gids[k]];
                if (eq < 0) continue;
                const Vec2 gk = jinvT.apply({cs->shape_gxi[base + k], cs->shape_geta[base + k]});
                r[eq] += jw * (dot(a, gk) - gq * cs->shape_value[base + k]);
            }
        }
    }
    return r;
}

BandMatrix CgSystem::jacobian(const ConformingFunction& w, int bandwidth) const {
    const DgSpace& sp = *cs->dg;
    const Nonlinearity& nl = *ctx->nl;
    const int ndof = cs->nodes_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    BandMatrix jac(cs->n_equations, bandwidth);
    std::vector<Vec2> grads(ndof);
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult we = cg_evaluate_at_cell_points(w, e);
        const auto& gids = sp.oswald_node_ids(e);
        for (int q = 0; q < nq; ++q) {
            const Vec2 ref = sp.cell_points()[q];
            const Mat2 j = map.jacobian(ref);
            const double jw = j.det() * sp.cell_weights()[q];
            const Mat2 jinvT = j.inverse().transpose();
            const Vec2 x = map.value(ref);
            const size_t base = static_cast<size_t>(q) * ndof;
            for (int k = 0; k < ndof; ++k)
                grads[k] = jinvT.apply({cs->shape_gxi[base + k], cs->shape_geta[base + k]});
            for (int l = 0; l < ndof; ++l) {
                const int ceq = cs->interior_index[gids[l]];
                if (ceq < 0) continue;
                const Vec2 dflux =
                    flux_derivative_apply(nl, ctx->time, x, we.gradient[q], grads[l]);
                for (int k = 0; k < ndof; ++k) {
                    const int req = cs->interior_index[gids[k]];
                    if (req < 0) continue;
                    jac.add(req, ceq, jw * dot(dflux, grads[k]));
                }
            }
        }
    }
    return jac;
}

} // namespace

ConformingFunction reconstruction_oracle(const AssemblyContext& ctx, const DgFunction& u,
                                         const ReconstructionData& g,
                                         const NewtonConfig& config,
                                         const OracleEnrichment& enrichment) {
    if (enrichment.refinements != 1)
        throw std::invalid_argument("reconstruction_oracle: exactly one refinement supported");
    auto fine = std::make_shared<const Mesh>(refine_uniform(u.space->mesh()));
    const int k = u.space->degree() + enrichment.degree_increment;
    auto fine_dg = std::make_shared<const DgSpace>(fine, k, k + 3);
    const std::shared_ptr<const ConformingSpace> cs = build_conforming_space(fine_dg);

    // datum g = -A U + f - Pi f at the fine quadrature points
    const int nq = static_cast<int>(fine_dg->cell_points().size());
    std::vector<std::vector<double>> gval(fine->n_elements());
    for (int e = 0; e < fine->n_elements(); ++e) {
        const EvalResult au = evaluate_on_fine_element(g.minus_au, *fine_dg, e);
        const EvalResult pf = evaluate_on_fine_element(g.projected_f, *fine_dg, e);
        const ElementMap map = fine->element_map(e);
        gval[e].resize(nq);
        for (int q = 0; q < nq; ++q) {
            const Vec2 x = map.value(fine_dg->cell_points()[q]);
            gval[e][q] = au.value[q] + g.f(x) - pf.value[q];
        }
    }

    // bandwidth over element node spans
    int bw = 1;
    for (int e = 0; e < fine->n_elements(); ++e) {
        int lo = cs->n_equations, hi = -1;
        for (int gid : fine_dg->oswald_node_ids(e)) {
            const int eq = cs->interior_index[gid];
            if (eq < 0) continue;
            lo = std::min(lo, eq);
            hi = std::max(hi, eq);
        }
        if (hi >= lo) bw = std::max(bw, hi - lo);
    }

    CgSystem sys{cs.get(), &ctx, std::move(gval)};

    // damped Newton on the interior nodal values
    std::vector<double> vals(cs->n_equations, 0.0);
    const auto make_function = [&](const std::vector<double>& v) {
        ConformingFunction f;
        f.space = cs;
        f.nodal.assign(cs->node_coords.size(), 0.0);
        for (size_t gid = 0; gid < f.nodal.size(); ++gid) {
            const int eq = cs->interior_index[gid];
            if (eq >= 0) f.nodal[gid] = v[eq];
        }
        return f;
    };
    const auto max_norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };

    ConformingFunction w = make_function(vals);
    std::vector<double> r = sys.residual(w);
    double rnorm = max_norm(r);
    for (int it = 0; it < config.max_iterations && rnorm > config.tolerance; ++it) {
        BandMatrix jac = sys.jacobian(w, bw);
        jac.factorize();
        const std::vector<double> step = jac.solve(r);
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= config.max_halvings; ++h) {
            std::vector<double> trial_vals(vals);
            for (int i = 0; i < cs->n_equations; ++i) trial_vals[i] -= lambda * step[i];
            ConformingFunction trial = make_function(trial_vals);
            std::vector<double> tr = sys.residual(trial);
            const double tn = max_norm(tr);
            if (tn < rnorm || tn <= config.tolerance) {
                vals = std::move(trial_vals);
                w = std::move(trial);
                r = std::move(tr);
                rnorm = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw NewtonDivergence("reconstruction_oracle: line search stalled", it);
    }
    if (rnorm > config.tolerance)
        throw NewtonDivergence("reconstruction_oracle: Newton did not converge",
                               config.max_iterations);
    return w;
}

double oracle_energy_distance(const ConformingFunction& w, const DgFunction& u,
                              const DiscretizationParams& params) {
    const DgSpace& fine = *w.space->dg;
    double grad_sq = 0.0;
    for (int e = 0; e < fine.mesh().n_elements(); ++e) {
        const ElementMap map = fine.mesh().element_map(e);
        const EvalResult wv = cg_evaluate_at_cell_points(w, e);
        const EvalResult uv = evaluate_on_fine_element(u, fine, e);
        for (size_t q = 0; q < fine.cell_points().size(); ++q) {
            const double jw = map.jacobian(fine.cell_points()[q]).det() * fine.cell_weights()[q];
            const Vec2 d = wv.gradient[q] - uv.gradient[q];
            grad_sq += jw * dot(d, d);
        }
    }
    const double jumps = face_weighted_norm(u, FaceWeight::sigma, params.c_sigma);
    return std::sqrt(grad_sq + jumps * jumps);
}

} // namespace dgest
