#include "dgest/ipdg.hpp"

#include "dgest/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dgest {

void DiscretizationParams::validate() const {
    if (theta != -1 && theta != 0 && theta != 1)
        throw std::invalid_argument("theta must be -1, 0 or 1");
    if (!(c_sigma > 1.0))
        throw std::invalid_argument("c_sigma must exceed 1");
}

double penalty_sigma(const Face& face, const DiscretizationParams& params, int p) {
    return params.c_sigma * static_cast<double>(p) * p / face.h_e;
}

BlockSparseMatrix::BlockSparseMatrix(const Mesh& mesh, int ndof)
    : n_elem_(mesh.n_elements()), ndof_(ndof) {
    std::vector<std::vector<int>> cols(n_elem_);
    for (int e = 0; e < n_elem_; ++e) cols[e].push_back(e);
    for (int fid : mesh.interior_face_ids) {
        const Face& f = mesh.faces[fid];
        cols[f.elem_plus].push_back(f.elem_minus);
        cols[f.elem_minus].push_back(f.elem_plus);
    }
    row_begin_.resize(n_elem_ + 1, 0);
    for (int e = 0; e < n_elem_; ++e) {
        std::sort(cols[e].begin(), cols[e].end());
        cols[e].erase(std::unique(cols[e].begin(), cols[e].end()), cols[e].end());
        row_begin_[e + 1] = row_begin_[e] + static_cast<int>(cols[e].size());
    }
    col_elem_.reserve(row_begin_[n_elem_]);
    for (int e = 0; e < n_elem_; ++e)
        col_elem_.insert(col_elem_.end(), cols[e].begin(), cols[e].end());
    blocks_.assign(static_cast<size_t>(row_begin_[n_elem_]) * ndof_ * ndof_, 0.0);
}

bool BlockSparseMatrix::has_block(int row_elem, int col_elem) const {
    const auto lo = col_elem_.begin() + row_begin_[row_elem];
    const auto hi = col_elem_.begin() + row_begin_[row_elem + 1];
    return std::binary_search(lo, hi, col_elem);
}

double* BlockSparseMatrix::block(int row_elem, int col_elem) {
    const auto lo = col_elem_.begin() + row_begin_[row_elem];
    const auto hi = col_elem_.begin() + row_begin_[row_elem + 1];
    const auto it = std::lower_bound(lo, hi, col_elem);
    if (it == hi || *it != col_elem)
        throw std::out_of_range("BlockSparseMatrix::block outside sparsity");
    const size_t idx = static_cast<size_t>(it - col_elem_.begin());
    return &blocks_[idx * ndof_ * ndof_];
}

const double* BlockSparseMatrix::block(int row_elem, int col_elem) const {
    return const_cast<BlockSparseMatrix*>(this)->block(row_elem, col_elem);
}

void BlockSparseMatrix::set_zero() { std::fill(blocks_.begin(), blocks_.end(), 0.0); }

std::vector<double> BlockSparseMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<size_t>(n_elem_) * ndof_, 0.0);
    for (int e = 0; e < n_elem_; ++e) {
        for (int c = row_begin_[e]; c < row_begin_[e + 1]; ++c) {
            const int ec = col_elem_[c];
            const double* b = &blocks_[static_cast<size_t>(c) * ndof_ * ndof_];
            for (int i = 0; i < ndof_; ++i) {
                double s = 0.0;
                for (int j = 0; j < ndof_; ++j)
                    s += b[static_cast<size_t>(i) * ndof_ + j] * x[ec * ndof_ + j];
                y[static_cast<size_t>(e) * ndof_ + i] += s;
            }
        }
    }
    return y;
}

void BlockSparseMatrix::add_scaled_block_diagonal(
    const std::vector<std::vector<double>>& masses, double s) {
    for (int e = 0; e < n_elem_; ++e) {
        double* b = block(e, e);
        const auto& m = masses[e];
        for (int i = 0; i < ndof_ * ndof_; ++i) b[i] += s * m[i];
    }
}

int BlockSparseMatrix::scalar_bandwidth() const {
    int bw = ndof_ - 1;
    for (int e = 0; e < n_elem_; ++e)
        for (int c = row_begin_[e]; c < row_begin_[e + 1]; ++c)
            bw = std::max(bw, std::abs(col_elem_[c] - e) * ndof_ + ndof_ - 1);
    return bw;
}

BandMatrix BlockSparseMatrix::to_band() const {
    BandMatrix band(n_rows(), scalar_bandwidth());
    for (int e = 0; e < n_elem_; ++e) {
        for (int c = row_begin_[e]; c < row_begin_[e + 1]; ++c) {
            const int ec = col_elem_[c];
            const double* b = &blocks_[static_cast<size_t>(c) * ndof_ * ndof_];
            for (int i = 0; i < ndof_; ++i)
                for (int j = 0; j < ndof_; ++j)
                    band.at(e * ndof_ + i, ec * ndof_ + j) = b[static_cast<size_t>(i) * ndof_ + j];
        }
    }
    return band;
}

double BlockSparseMatrix::max_asymmetry() const {
    double worst = 0.0;
    for (int e = 0; e < n_elem_; ++e) {
        for (int c = row_begin_[e]; c < row_begin_[e + 1]; ++c) {
            const int ec = col_elem_[c];
            const double* a = &blocks_[static_cast<size_t>(c) * ndof_ * ndof_];
            const double* at = block(ec, e);
            for (int i = 0; i < ndof_; ++i)
                for (int j = 0; j < ndof_; ++j)
                    worst = std::max(worst,
                                     std::abs(a[static_cast<size_t>(i) * ndof_ + j] -
                                              at[static_cast<size_t>(j) * ndof_ + i]));
        }
    }
    return worst;
}

Vec2 flux_derivative_apply(const Nonlinearity& nl, double t, Vec2 x, const Vec2& y,
                           const Vec2& v) {
    const double s = norm(y);
    if (s < 1e-14) return nl.mu(t, x, 0.0) * v;
    return nl.mu(t, x, s) * v + (nl.dmu_ds(t, x, s) / s) * dot(y, v) * y;
}

namespace {

// Per-side face data prepared once per face: physical test/trial gradients
// and values for every local dof at every face quadrature point.
struct SideData {
    int elem = -1;
    double half = 1.0;  // averaging factor: 1/2 on interior faces, 1 on boundary
    Vec2 nrm;           // outward normal of this side
    std::vector<double> value;  // [q * ndof + k]
    std::vector<Vec2> grad;
    std::vector<double> wval;   // trace of the state w
    std::vector<Vec2> wgrad;
};

void fill_side(const DgSpace& sp, const DgFunction& w, const Face& f, bool plus,
               SideData& out) {
    const int lf = plus ? f.local_plus : f.local_minus;
    const bool agrees = plus ? true : f.minus_agrees;
    const int elem = plus ? f.elem_plus : f.elem_minus;
    const BasisTable& tab = sp.face_basis(lf, agrees);
    const ElementMap map = sp.mesh().element_map(elem);
    const int nq = sp.face_rule().size();
    const int ndof = sp.dofs_per_element();
    out.elem = elem;
    out.nrm = plus ? f.normal : -1.0 * f.normal;
    out.half = (f.elem_minus >= 0) ? 0.5 : 1.0;
    out.value.resize(static_cast<size_t>(nq) * ndof);
    out.grad.resize(static_cast<size_t>(nq) * ndof);
    out.wval.resize(nq);
    out.wgrad.resize(nq);
    const double* c = w.element_coeffs(elem);
    for (int q = 0; q < nq; ++q) {
        const Vec2 ref = face_reference_point(f, plus, sp.face_rule().points[q]);
        const Mat2 jinvT = map.jacobian(ref).inverse().transpose();
        double wv = 0.0;
        Vec2 wg{0.0, 0.0};
        const size_t base = static_cast<size_t>(q) * ndof;
        for (int k = 0; k < ndof; ++k) {
            out.value[base + k] = tab.value[base + k];
            const Vec2 g = jinvT.apply({tab.grad_xi[base + k], tab.grad_eta[base + k]});
            out.grad[base + k] = g;
            wv += c[k] * tab.value[base + k];
            wg += c[k] * g;
        }
        out.wval[q] = wv;
        out.wgrad[q] = wg;
    }
}

struct FacePointData {
    Vec2 x;          // physical quadrature point
    double ds;       // weight * length/2
    Vec2 jump_w;     // [w]
    Vec2 avg_flux;   // {alpha(w)}
    double a_theta;  // a(t, x, |h^{-1}[w]|)
    double sigma;
};

// The theta term evaluates the coefficient at the scaled jump magnitude
// |[w]| / h_e; its w-derivative is guarded at [w] = 0.
void prepare_face_points(const AssemblyContext& ctx, const Face& f, const SideData& plus,
                         const SideData* minus, std::vector<FacePointData>& pts) {
    const DgSpace& sp = *ctx.space;
    const Nonlinearity& nl = *ctx.nl;
    const int nq = sp.face_rule().size();
    const ElementMap pmap = sp.mesh().element_map(f.elem_plus);
    const double sigma = penalty_sigma(f, ctx.params, sp.degree());
    pts.resize(nq);
    for (int q = 0; q < nq; ++q) {
        FacePointData& d = pts[q];
        const Vec2 ref = face_reference_point(f, true, sp.face_rule().points[q]);
        d.x = pmap.value(ref);
        d.ds = sp.face_rule().weights[q] * 0.5 * f.length;
        d.sigma = sigma;
        if (minus) {
            d.jump_w = (plus.wval[q] - minus->wval[q]) * f.normal;
            const Vec2 ap = nl.mu(ctx.time, d.x, norm(plus.wgrad[q])) * plus.wgrad[q];
            const Vec2 am = nl.mu(ctx.time, d.x, norm(minus->wgrad[q])) * minus->wgrad[q];
            d.avg_flux = 0.5 * (ap + am);
        } else {
            d.jump_w = plus.wval[q] * f.normal;
            d.avg_flux = nl.mu(ctx.time, d.x, norm(plus.wgrad[q])) * plus.wgrad[q];
        }
        d.a_theta = nl.mu(ctx.time, d.x, norm(d.jump_w) / f.h_e);
    }
}

} // namespace

double semilinear_form(const AssemblyContext& ctx, const DgFunction& w, const DgFunction& v) {
    const std::vector<double> r = assemble_form_vector(ctx, w);
    double s = 0.0;
    for (size_t i = 0; i < r.size(); ++i) s += r[i] * v.coeff[i];
    return s;
}

std::vector<double> assemble_form_vector(const AssemblyContext& ctx, const DgFunction& u) {
    const DgSpace& sp = *ctx.space;
    const Nonlinearity& nl = *ctx.nl;
    const Mesh& mesh = sp.mesh();
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    const int nfq = sp.face_rule().size();

    std::vector<double> out(sp.n_dofs(), 0.0);

    // volume term, one disjoint slice per element
    std::vector<double> vol(out.size(), 0.0);
    parallel_for(mesh.n_elements(), [&](int e) {
        const ElementMap map = mesh.element_map(e);
        const EvalResult w = evaluate_at_cell_points(u, e);
        double* r = &vol[sp.dof_offset(e)];
        for (int q = 0; q < nq; ++q) {
            const Vec2 ref = sp.cell_points()[q];
            const Mat2 j = map.jacobian(ref);
            const double jw = j.det() * sp.cell_weights()[q];
            const Mat2 jinvT = j.inverse().transpose();
            const Vec2 x = map.value(ref);
            const Vec2 a = nl.mu(ctx.time, x, norm(w.gradient[q])) * w.gradient[q];
            const size_t base = static_cast<size_t>(q) * ndof;
            for (int k = 0; k < ndof; ++k) {
                const Vec2 g = jinvT.apply({sp.cell_basis().grad_xi[base + k],
                                            sp.cell_basis().grad_eta[base + k]});
                r[k] += jw * dot(a, g);
            }
        }
    });

    // face terms into per-face local buffers, then a sequential scatter
    const int nf = mesh.n_faces();
    std::vector<std::vector<double>> fbuf(nf);
    parallel_for(nf, [&](int fid) {
        const Face& f = mesh.faces[fid];
        SideData plus, minus;
        fill_side(sp, u, f, true, plus);
        const bool interior = f.elem_minus >= 0;
        if (interior) fill_side(sp, u, f, false, minus);
        std::vector<FacePointData> pts;
        prepare_face_points(ctx, f, plus, interior ? &minus : nullptr, pts);

        auto& local = fbuf[fid];
        local.assign(static_cast<size_t>(interior ? 2 : 1) * ndof, 0.0);
        for (int side = 0; side < (interior ? 2 : 1); ++side) {
            const SideData& s = (side == 0) ? plus : minus;
            double* r = &local[static_cast<size_t>(side) * ndof];
            for (int q = 0; q < nfq; ++q) {
                const FacePointData& d = pts[q];
                const size_t base = static_cast<size_t>(q) * ndof;
                const double flux_n = dot(d.avg_flux, s.nrm);
                const double jump_n = dot(d.jump_w, s.nrm);
                for (int k = 0; k < ndof; ++k) {
                    const double phi = s.value[base + k];
                    double term = -flux_n * phi + d.sigma * jump_n * phi;
                    if (ctx.params.theta != 0)
                        term += ctx.params.theta * d.a_theta * s.half *
                                dot(s.grad[base + k], d.jump_w);
                    r[k] += d.ds * term;
                }
            }
        }
    }, 16);
    for (int fid = 0; fid < nf; ++fid) {
        const Face& f = mesh.faces[fid];
        const auto& local = fbuf[fid];
        for (int k = 0; k < ndof; ++k) out[sp.dof_offset(f.elem_plus) + k] += local[k];
        if (f.elem_minus >= 0)
            for (int k = 0; k < ndof; ++k)
                out[sp.dof_offset(f.elem_minus) + k] += local[ndof + k];
    }
    for (size_t i = 0; i < out.size(); ++i) out[i] += vol[i];
    return out;
}

std::vector<double> assemble_load(const DgSpace& sp, const std::function<double(Vec2)>& f) {
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    std::vector<double> out(sp.n_dofs(), 0.0);
    parallel_for(sp.mesh().n_elements(), [&](int e) {
        const ElementMap map = sp.mesh().element_map(e);
        double* r = &out[sp.dof_offset(e)];
        for (int q = 0; q < nq; ++q) {
            const Vec2 ref = sp.cell_points()[q];
            const double jw = map.jacobian(ref).det() * sp.cell_weights()[q];
            const double fv = f(map.value(ref));
            const double* phi = sp.cell_basis().values_at(q);
            for (int k = 0; k < ndof; ++k) r[k] += jw * fv * phi[k];
        }
    });
    return out;
}

std::vector<double> assemble_residual(const AssemblyContext& ctx, const DgFunction& u,
                                      const std::function<double(Vec2)>& rhs) {
    std::vector<double> r = assemble_form_vector(ctx, u);
    const std::vector<double> load = assemble_load(*ctx.space, rhs);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= load[i];
    return r;
}

BlockSparseMatrix assemble_jacobian(const AssemblyContext& ctx, const DgFunction& u) {
    const DgSpace& sp = *ctx.space;
    const Nonlinearity& nl = *ctx.nl;
    const Mesh& mesh = sp.mesh();
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    const int nfq = sp.face_rule().size();

    BlockSparseMatrix jac(mesh, ndof);

    // volume blocks (element-diagonal, disjoint per element)
    parallel_for(mesh.n_elements(), [&](int e) {
        const ElementMap map = mesh.element_map(e);
        const EvalResult w = evaluate_at_cell_points(u, e);
        double* blk = jac.block(e, e);
        std::vector<Vec2> phys_grad(ndof);
        for (int q = 0; q < nq; ++q) {
            const Vec2 ref = sp.cell_points()[q];
            const Mat2 j = map.jacobian(ref);
            const double jw = j.det() * sp.cell_weights()[q];
            const Mat2 jinvT = j.inverse().transpose();
            const Vec2 x = map.value(ref);
            const size_t base = static_cast<size_t>(q) * ndof;
            for (int k = 0; k < ndof; ++k)
                phys_grad[k] = jinvT.apply({sp.cell_basis().grad_xi[base + k],
                                            sp.cell_basis().grad_eta[base + k]});
            for (int l = 0; l < ndof; ++l) {
                const Vec2 dflux = flux_derivative_apply(nl, ctx.time, x, w.gradient[q],
                                                         phys_grad[l]);
                for (int k = 0; k < ndof; ++k)
                    blk[static_cast<size_t>(k) * ndof + l] += jw * dot(dflux, phys_grad[k]);
            }
        }
    });

    // face blocks: local 2x2 block buffers, sequential scatter
    struct FaceBlocks {
        std::vector<double> b;  // [side_test][side_trial][k][l]
        bool interior = false;
    };
    const int nf = mesh.n_faces();
    std::vector<FaceBlocks> fblocks(nf);
    parallel_for(nf, [&](int fid) {
        const Face& f = mesh.faces[fid];
        SideData sides[2];
        fill_side(sp, u, f, true, sides[0]);
        const bool interior = f.elem_minus >= 0;
        if (interior) fill_side(sp, u, f, false, sides[1]);
        std::vector<FacePointData> pts;
        prepare_face_points(ctx, f, sides[0], interior ? &sides[1] : nullptr, pts);

        const int nsides = interior ? 2 : 1;
        FaceBlocks& fb = fblocks[fid];
        fb.interior = interior;
        fb.b.assign(static_cast<size_t>(nsides) * nsides * ndof * ndof, 0.0);

        for (int q = 0; q < nfq; ++q) {
            const FacePointData& d = pts[q];
            const size_t base = static_cast<size_t>(q) * ndof;
            const double sj = norm(d.jump_w) / f.h_e;
            const double da = (sj > 1e-14) ? nl.dmu_ds(ctx.time, d.x, sj) : 0.0;
            const double inv_hs = (sj > 1e-14) ? 1.0 / (f.h_e * f.h_e * sj) : 0.0;
            for (int st = 0; st < nsides; ++st) {
                const SideData& s = sides[st];
                for (int tr = 0; tr < nsides; ++tr) {
                    const SideData& r = sides[tr];
                    const double nn = dot(r.nrm, s.nrm);  // +1 same side, -1 across
                    double* blk = &fb.b[(static_cast<size_t>(st) * nsides + tr) * ndof * ndof];
                    for (int l = 0; l < ndof; ++l) {
                        const double phil = r.value[base + l];
                        const Vec2 dflux = flux_derivative_apply(nl, ctx.time, d.x,
                                                                 r.wgrad[q], r.grad[base + l]);
                        const double davg_n = r.half * dot(dflux, s.nrm);
                        // d a_theta in direction phi_l: mu'(s_j) [w].(phi_l n^T) / (h^2 s_j)
                        const double datheta = da * dot(d.jump_w, phil * r.nrm) * inv_hs;
                        for (int k = 0; k < ndof; ++k) {
                            const double phik = s.value[base + k];
                            double term = -davg_n * phik + d.sigma * nn * phil * phik;
                            if (ctx.params.theta != 0) {
                                const double gk_jw = dot(s.grad[base + k], d.jump_w);
                                const double gk_dj = dot(s.grad[base + k], phil * r.nrm);
                                term += ctx.params.theta * s.half *
                                        (datheta * gk_jw + d.a_theta * gk_dj);
                            }
                            blk[static_cast<size_t>(k) * ndof + l] += d.ds * term;
                        }
                    }
                }
            }
        }
    }, 16);
    for (int fid = 0; fid < nf; ++fid) {
        const Face& f = mesh.faces[fid];
        const FaceBlocks& fb = fblocks[fid];
        const int nsides = fb.interior ? 2 : 1;
        const int elems[2] = {f.elem_plus, f.elem_minus};
        for (int st = 0; st < nsides; ++st) {
            for (int tr = 0; tr < nsides; ++tr) {
                double* dst = jac.block(elems[st], elems[tr]);
                const double* src = &fb.b[(static_cast<size_t>(st) * nsides + tr) * ndof * ndof];
                for (int i = 0; i < ndof * ndof; ++i) dst[i] += src[i];
            }
        }
    }
    return jac;
}

std::vector<std::vector<double>> element_mass_matrices(const DgSpace& sp) {
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    std::vector<std::vector<double>> out(sp.mesh().n_elements());
    parallel_for(sp.mesh().n_elements(), [&](int e) {
        const ElementMap map = sp.mesh().element_map(e);
        auto& m = out[e];
        m.assign(static_cast<size_t>(ndof) * ndof, 0.0);
        for (int q = 0; q < nq; ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const double* phi = sp.cell_basis().values_at(q);
            for (int a = 0; a < ndof; ++a)
                for (int b = 0; b < ndof; ++b)
                    m[static_cast<size_t>(a) * ndof + b] += jw * phi[a] * phi[b];
        }
    });
    return out;
}

std::vector<double> mass_apply(const DgSpace& sp, const std::vector<double>& coeff) {
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    std::vector<double> out(sp.n_dofs(), 0.0);
    parallel_for(sp.mesh().n_elements(), [&](int e) {
        const ElementMap map = sp.mesh().element_map(e);
        const double* c = &coeff[sp.dof_offset(e)];
        double* r = &out[sp.dof_offset(e)];
        for (int q = 0; q < nq; ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const double* phi = sp.cell_basis().values_at(q);
            double v = 0.0;
            for (int k = 0; k < ndof; ++k) v += c[k] * phi[k];
            for (int k = 0; k < ndof; ++k) r[k] += jw * v * phi[k];
        }
    });
    return out;
}

std::vector<double> mass_solve(const DgSpace& sp, const std::vector<double>& rhs) {
    const int ndof = sp.dofs_per_element();
    std::vector<double> out(rhs);
    parallel_for(sp.mesh().n_elements(), [&](int e) {
        std::vector<double> local(out.begin() + sp.dof_offset(e),
                                  out.begin() + sp.dof_offset(e) + ndof);
        sp.mass_cholesky(e).solve_in_place(local);
        std::copy(local.begin(), local.end(), out.begin() + sp.dof_offset(e));
    });
    return out;
}

DgFunction apply_discrete_operator(const AssemblyContext& ctx, const DgFunction& z) {
    const std::vector<double> r = assemble_form_vector(ctx, z);
    std::vector<double> x = mass_solve(*ctx.space, r);
    DgFunction az(z.space);
    for (size_t i = 0; i < x.size(); ++i) az.coeff[i] = -x[i];
    return az;
}

ReconstructionData reconstruction_data(const AssemblyContext& ctx, const DgFunction& u,
                                       const std::function<double(double, Vec2)>& f) {
    const double t = ctx.time;
    ReconstructionData g{DgFunction(u.space), DgFunction(u.space),
                         [f, t](Vec2 x) { return f(t, x); }, t};
    const std::vector<double> r = assemble_form_vector(ctx, u);
    g.minus_au.coeff = mass_solve(*ctx.space, r);
    g.projected_f = l2_project(g.f, u.space);
    return g;
}

BlockSparseMatrix broken_stiffness_gram(const DgSpace& sp) {
    const Mesh& mesh = sp.mesh();
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    BlockSparseMatrix gram(mesh, ndof);
    parallel_for(mesh.n_elements(), [&](int e) {
        const ElementMap map = mesh.element_map(e);
        double* blk = gram.block(e, e);
        std::vector<Vec2> g(ndof);
        for (int q = 0; q < nq; ++q) {
            const Mat2 j = map.jacobian(sp.cell_points()[q]);
            const double jw = j.det() * sp.cell_weights()[q];
            const Mat2 jinvT = j.inverse().transpose();
            const size_t base = static_cast<size_t>(q) * ndof;
            for (int k = 0; k < ndof; ++k)
                g[k] = jinvT.apply({sp.cell_basis().grad_xi[base + k],
                                    sp.cell_basis().grad_eta[base + k]});
            for (int k = 0; k < ndof; ++k)
                for (int l = 0; l < ndof; ++l)
                    blk[static_cast<size_t>(k) * ndof + l] += jw * dot(g[k], g[l]);
        }
    });
    return gram;
}

BlockSparseMatrix jump_gram(const DgSpace& sp, FaceWeight weight, double c_sigma) {
    const Mesh& mesh = sp.mesh();
    const int ndof = sp.dofs_per_element();
    const int nfq = sp.face_rule().size();
    const double p2 = static_cast<double>(sp.degree()) * sp.degree();
    BlockSparseMatrix gram(mesh, ndof);
    for (int fid = 0; fid < mesh.n_faces(); ++fid) {
        const Face& f = mesh.faces[fid];
        double w = 0.0;
        switch (weight) {
            case FaceWeight::sigma: w = c_sigma * p2 / f.h_e; break;
            case FaceWeight::h_over_p2: w = f.h_e / p2; break;
            case FaceWeight::p2_over_h: w = p2 / f.h_e; break;
        }
        const bool interior = f.elem_minus >= 0;
        const int elems[2] = {f.elem_plus, f.elem_minus};
        const int nsides = interior ? 2 : 1;
        for (int st = 0; st < nsides; ++st) {
            const int lf_s = (st == 0) ? f.local_plus : f.local_minus;
            const bool ag_s = (st == 0) ? true : f.minus_agrees;
            const BasisTable& ts = sp.face_basis(lf_s, ag_s);
            for (int tr = 0; tr < nsides; ++tr) {
                const int lf_r = (tr == 0) ? f.local_plus : f.local_minus;
                const bool ag_r = (tr == 0) ? true : f.minus_agrees;
                const BasisTable& tt = sp.face_basis(lf_r, ag_r);
                const double nn = (st == tr) ? 1.0 : -1.0;
                double* blk = gram.block(elems[st], elems[tr]);
                for (int q = 0; q < nfq; ++q) {
                    const double ds = sp.face_rule().weights[q] * 0.5 * f.length;
                    const size_t base = static_cast<size_t>(q) * ndof;
                    for (int k = 0; k < ndof; ++k)
                        for (int l = 0; l < ndof; ++l)
                            blk[static_cast<size_t>(k) * ndof + l] +=
                                w * nn * ds * ts.value[base + k] * tt.value[base + l];
                }
            }
        }
    }
    return gram;
}

BlockSparseMatrix energy_gram(const DgSpace& sp, const DiscretizationParams& params) {
    BlockSparseMatrix gram = jump_gram(sp, FaceWeight::sigma, params.c_sigma);
    const BlockSparseMatrix stiff = broken_stiffness_gram(sp);
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        double* dst = gram.block(e, e);
        const double* src = stiff.block(e, e);
        const int ndof = sp.dofs_per_element();
        for (int i = 0; i < ndof * ndof; ++i) dst[i] += src[i];
    }
    return gram;
}

double residual_dual_norm(const DgSpace& sp, const std::vector<double>& r) {
    const int ndof = sp.dofs_per_element();
    double worst = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e)
        for (int k = 0; k < ndof; ++k)
            worst = std::max(worst, std::abs(r[sp.dof_offset(e) + k]) / sp.basis_norm(e, k));
    return worst;
}

} // namespace dgest
