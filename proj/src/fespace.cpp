#include "dgest/fespace.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace dgest {

namespace {

Vec2 face_ref_point_static(int lf, double tau) {
    switch (lf) {
        case 0: return {tau, -1.0};
        case 1: return {1.0, tau};
        case 2: return {-tau, 1.0};
        default: return {-1.0, -tau};
    }
}

} // namespace

DgSpace::DgSpace(std::shared_ptr<const Mesh> mesh, int p, int quad_order)
    : mesh_(std::move(mesh)), p_(p),
      quad_order_(quad_order > 0 ? quad_order : p + 3),
      ndof_((p + 1) * (p + 1)) {
    if (p_ < 0) throw std::invalid_argument("DgSpace: negative degree");
    line_ = QuadratureRule::gauss_legendre(quad_order_);

    const int q = line_.size();
    cell_points_.reserve(static_cast<size_t>(q) * q);
    cell_weights_.reserve(static_cast<size_t>(q) * q);
    for (int j = 0; j < q; ++j) {
        for (int i = 0; i < q; ++i) {
            cell_points_.push_back({line_.points[i], line_.points[j]});
            cell_weights_.push_back(line_.weights[i] * line_.weights[j]);
        }
    }
    cell_basis_ = BasisTable::tabulate(p_, cell_points_);
    if (p_ >= 1) lower_basis_ = BasisTable::tabulate(p_ - 1, cell_points_);

    for (int lf = 0; lf < 4; ++lf) {
        for (int dir = 0; dir < 2; ++dir) {
            std::vector<Vec2> pts(q);
            for (int i = 0; i < q; ++i)
                pts[i] = face_ref_point_static(lf, dir == 0 ? line_.points[i] : -line_.points[i]);
            face_basis_[2 * lf + dir] = BasisTable::tabulate(p_, pts);
        }
    }

    // Element-local mass factorizations and basis norms.
    const int ne = mesh_->n_elements();
    mass_chol_.resize(ne);
    if (p_ >= 1) lower_chol_.resize(ne);
    basis_norm_.resize(static_cast<size_t>(ne) * ndof_);
    const int nq = static_cast<int>(cell_points_.size());
    std::vector<double> mass(static_cast<size_t>(ndof_) * ndof_);
    const int nlo = p_ >= 1 ? p_ * p_ : 0;
    std::vector<double> mass_lo(static_cast<size_t>(nlo) * nlo);
    for (int e = 0; e < ne; ++e) {
        const ElementMap map = mesh_->element_map(e);
        std::fill(mass.begin(), mass.end(), 0.0);
        std::fill(mass_lo.begin(), mass_lo.end(), 0.0);
        for (int qp = 0; qp < nq; ++qp) {
            const double jw = map.jacobian(cell_points_[qp]).det() * cell_weights_[qp];
            if (jw <= 0.0)
                throw std::runtime_error("DgSpace: non-positive Jacobian in element " +
                                         std::to_string(e));
            const double* phi = cell_basis_.values_at(qp);
            for (int a = 0; a < ndof_; ++a)
                for (int b = 0; b <= a; ++b)
                    mass[static_cast<size_t>(a) * ndof_ + b] += jw * phi[a] * phi[b];
            if (p_ >= 1) {
                const double* lo = lower_basis_.values_at(qp);
                for (int a = 0; a < nlo; ++a)
                    for (int b = 0; b <= a; ++b)
                        mass_lo[static_cast<size_t>(a) * nlo + b] += jw * lo[a] * lo[b];
            }
        }
        for (int a = 0; a < ndof_; ++a)
            for (int b = a + 1; b < ndof_; ++b)
                mass[static_cast<size_t>(a) * ndof_ + b] = mass[static_cast<size_t>(b) * ndof_ + a];
        for (int a = 0; a < nlo; ++a)
            for (int b = a + 1; b < nlo; ++b)
                mass_lo[static_cast<size_t>(a) * nlo + b] =
                    mass_lo[static_cast<size_t>(b) * nlo + a];
        mass_chol_[e] = DenseCholesky::factor(mass, ndof_);
        if (p_ >= 1) lower_chol_[e] = DenseCholesky::factor(mass_lo, nlo);
        for (int a = 0; a < ndof_; ++a)
            basis_norm_[static_cast<size_t>(e) * ndof_ + a] =
                std::sqrt(mass[static_cast<size_t>(a) * ndof_ + a]);
    }

    if (p_ >= 1) {
        nodal_ = NodalTransform::build(p_);
        build_oswald_map();
    }
}

void DgSpace::build_oswald_map() {
    const Mesh& m = *mesh_;
    const int ne = m.n_elements();
    oswald_nodes_.assign(ne, std::vector<int>(ndof_, -1));
    std::map<int, int> vertex_gid;
    std::map<std::pair<int, int>, int> edge_gid;
    std::vector<bool> bnd;
    int next = 0;

    const auto new_node = [&](bool on_boundary) {
        bnd.push_back(on_boundary);
        return next++;
    };

    for (int e = 0; e < ne; ++e) {
        const auto& el = m.elements[e];
        for (int ay = 0; ay <= p_; ++ay) {
            for (int ax = 0; ax <= p_; ++ax) {
                const int a = ax + (p_ + 1) * ay;
                const bool bx = (ax == 0 || ax == p_);
                const bool by = (ay == 0 || ay == p_);
                if (bx && by) {
                    const int corner = (ay == 0) ? (ax == 0 ? 0 : 1) : (ax == 0 ? 3 : 2);
                    const int v = el[corner];
                    auto it = vertex_gid.find(v);
                    if (it == vertex_gid.end())
                        it = vertex_gid.emplace(v, new_node(m.vertex_on_boundary[v])).first;
                    oswald_nodes_[e][a] = it->second;
                } else if (bx || by) {
                    int lf, pos;
                    if (ay == 0) { lf = 0; pos = ax; }
                    else if (ax == p_) { lf = 1; pos = ay; }
                    else if (ay == p_) { lf = 2; pos = p_ - ax; }
                    else { lf = 3; pos = p_ - ay; }
                    const int fid = m.element_faces[e][lf];
                    const Face& f = m.faces[fid];
                    const bool agrees = (f.elem_plus == e && f.local_plus == lf) || f.minus_agrees;
                    const int pos_face = agrees ? pos : p_ - pos;
                    auto it = edge_gid.find({fid, pos_face});
                    if (it == edge_gid.end())
                        it = edge_gid.emplace(std::make_pair(fid, pos_face),
                                              new_node(f.elem_minus < 0)).first;
                    oswald_nodes_[e][a] = it->second;
                } else {
                    oswald_nodes_[e][a] = new_node(false);
                }
            }
        }
    }
    n_global_nodes_ = next;
    node_on_boundary_ = std::move(bnd);
}

EvalResult evaluate(const DgFunction& u, int element, const std::vector<Vec2>& ref_points) {
    const DgSpace& sp = *u.space;
    if (element < 0 || element >= sp.mesh().n_elements())
        throw std::out_of_range("evaluate: element index out of range");
    const BasisTable tab = BasisTable::tabulate(sp.degree(), ref_points);
    const ElementMap map = sp.mesh().element_map(element);
    const double* c = u.element_coeffs(element);
    const int ndof = sp.dofs_per_element();

    EvalResult r;
    r.value.resize(ref_points.size());
    r.gradient.resize(ref_points.size());
    for (size_t q = 0; q < ref_points.size(); ++q) {
        double v = 0.0;
        Vec2 g{0.0, 0.0};
        const size_t base = q * ndof;
        for (int k = 0; k < ndof; ++k) {
            v += c[k] * tab.value[base + k];
            g.x += c[k] * tab.grad_xi[base + k];
            g.y += c[k] * tab.grad_eta[base + k];
        }
        r.value[q] = v;
        r.gradient[q] = map.jacobian(ref_points[q]).inverse().transpose().apply(g);
    }
    return r;
}

EvalResult evaluate_at_cell_points(const DgFunction& u, int element) {
    const DgSpace& sp = *u.space;
    const BasisTable& tab = sp.cell_basis();
    const ElementMap map = sp.mesh().element_map(element);
    const double* c = u.element_coeffs(element);
    const int ndof = sp.dofs_per_element();
    const int nq = tab.npoints;

    EvalResult r;
    r.value.resize(nq);
    r.gradient.resize(nq);
    for (int q = 0; q < nq; ++q) {
        double v = 0.0;
        Vec2 g{0.0, 0.0};
        const size_t base = static_cast<size_t>(q) * ndof;
        for (int k = 0; k < ndof; ++k) {
            v += c[k] * tab.value[base + k];
            g.x += c[k] * tab.grad_xi[base + k];
            g.y += c[k] * tab.grad_eta[base + k];
        }
        r.value[q] = v;
        r.gradient[q] = map.jacobian(sp.cell_points()[q]).inverse().transpose().apply(g);
    }
    return r;
}

HessResult hessian_at_cell_points(const DgFunction& u, int element) {
    const DgSpace& sp = *u.space;
    const BasisTable& tab = sp.cell_basis();
    const ElementMap map = sp.mesh().element_map(element);
    const Vec2 cross = map.cross_derivative();
    const double* c = u.element_coeffs(element);
    const int ndof = sp.dofs_per_element();
    const int nq = tab.npoints;

    HessResult h;
    h.dxx.resize(nq);
    h.dxy.resize(nq);
    h.dyy.resize(nq);
    for (int q = 0; q < nq; ++q) {
        double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
        const size_t base = static_cast<size_t>(q) * ndof;
        for (int k = 0; k < ndof; ++k) {
            g0 += c[k] * tab.grad_xi[base + k];
            g1 += c[k] * tab.grad_eta[base + k];
            h00 += c[k] * tab.hess_xixi[base + k];
            h01 += c[k] * tab.hess_xieta[base + k];
            h11 += c[k] * tab.hess_etaeta[base + k];
        }
        const Mat2 jinv = map.jacobian(sp.cell_points()[q]).inverse();
        // Reference Hessian pushed through the inverse map; the bilinear
        // cross-derivative enters through Y = Jinv * F_xieta.
        const Vec2 y = jinv.apply(cross);
        const double gy = g0 * y.x + g1 * y.y;
        const auto hphys = [&](int i, int j) {
            const double ji0 = (i == 0) ? jinv.a00 : jinv.a01;  // dxi/dx_i
            const double ji1 = (i == 0) ? jinv.a10 : jinv.a11;  // deta/dx_i
            const double jj0 = (j == 0) ? jinv.a00 : jinv.a01;
            const double jj1 = (j == 0) ? jinv.a10 : jinv.a11;
            const double core = h00 * ji0 * jj0 + h01 * (ji0 * jj1 + ji1 * jj0) + h11 * ji1 * jj1;
            const double kij = ji0 * jj1 + ji1 * jj0;
            return core - gy * kij;
        };
        h.dxx[q] = hphys(0, 0);
        h.dxy[q] = hphys(0, 1);
        h.dyy[q] = hphys(1, 1);
    }
    return h;
}

FaceTrace evaluate_face(const DgFunction& u, int face_id) {
    const DgSpace& sp = *u.space;
    const Face& f = sp.mesh().faces[face_id];
    const int nq = sp.face_rule().size();
    const int ndof = sp.dofs_per_element();

    FaceTrace t;
    t.face = &f;
    t.has_minus = f.elem_minus >= 0;
    t.value_plus.resize(nq);
    t.grad_plus.resize(nq);
    if (t.has_minus) {
        t.value_minus.resize(nq);
        t.grad_minus.resize(nq);
    }

    const auto fill_side = [&](int elem, int lf, bool agrees, std::vector<double>& val,
                               std::vector<Vec2>& grad) {
        const BasisTable& tab = sp.face_basis(lf, agrees);
        const ElementMap map = sp.mesh().element_map(elem);
        const double* c = u.element_coeffs(elem);
        for (int q = 0; q < nq; ++q) {
            double v = 0.0;
            Vec2 g{0.0, 0.0};
            const size_t base = static_cast<size_t>(q) * ndof;
            for (int k = 0; k < ndof; ++k) {
                v += c[k] * tab.value[base + k];
                g.x += c[k] * tab.grad_xi[base + k];
                g.y += c[k] * tab.grad_eta[base + k];
            }
            const double tau = agrees ? sp.face_rule().points[q] : -sp.face_rule().points[q];
            const Vec2 ref = face_ref_point_static(lf, tau);
            val[q] = v;
            grad[q] = map.jacobian(ref).inverse().transpose().apply(g);
        }
    };

    fill_side(f.elem_plus, f.local_plus, true, t.value_plus, t.grad_plus);
    if (t.has_minus)
        fill_side(f.elem_minus, f.local_minus, f.minus_agrees, t.value_minus, t.grad_minus);
    return t;
}

Vec2 jump_scalar(const FaceTrace& t, int q) {
    const Vec2 n = t.face->normal;
    if (!t.has_minus) return t.value_plus[q] * n;
    return (t.value_plus[q] - t.value_minus[q]) * n;
}

double average_scalar(const FaceTrace& t, int q) {
    if (!t.has_minus) return t.value_plus[q];
    return 0.5 * (t.value_plus[q] + t.value_minus[q]);
}

Vec2 average_gradient(const FaceTrace& t, int q) {
    if (!t.has_minus) return t.grad_plus[q];
    return 0.5 * (t.grad_plus[q] + t.grad_minus[q]);
}

double jump_gradient_normal(const FaceTrace& t, int q) {
    const Vec2 n = t.face->normal;
    if (!t.has_minus) return dot(t.grad_plus[q], n);
    return dot(t.grad_plus[q] - t.grad_minus[q], n);
}

DgFunction l2_project(const ScalarField& f, const std::shared_ptr<const DgSpace>& space) {
    const DgSpace& sp = *space;
    DgFunction u(space);
    const int ndof = sp.dofs_per_element();
    const int nq = static_cast<int>(sp.cell_points().size());
    std::vector<double> rhs(ndof);
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (int q = 0; q < nq; ++q) {
            const Vec2 x = map.value(sp.cell_points()[q]);
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const double fv = f(x);
            const double* phi = sp.cell_basis().values_at(q);
            for (int k = 0; k < ndof; ++k) rhs[k] += jw * fv * phi[k];
        }
        sp.mass_cholesky(e).solve_in_place(rhs);
        double* c = u.element_coeffs(e);
        for (int k = 0; k < ndof; ++k) c[k] = rhs[k];
    }
    return u;
}

DgFunction l2_project_lower(const ScalarField& f, const DgSpace& space) {
    auto lower = std::make_shared<DgSpace>(space.mesh_ptr(), space.degree() - 1,
                                           space.quad_order());
    return l2_project(f, lower);
}

std::vector<double> project_local(const DgSpace& space, int element,
                                  const std::vector<double>& values_at_quad, bool lower) {
    const BasisTable& tab = lower ? space.lower_cell_basis() : space.cell_basis();
    const int ndof = tab.ndof;
    const ElementMap map = space.mesh().element_map(element);
    std::vector<double> rhs(ndof, 0.0);
    for (int q = 0; q < tab.npoints; ++q) {
        const double jw = map.jacobian(space.cell_points()[q]).det() * space.cell_weights()[q];
        const double* phi = tab.values_at(q);
        for (int k = 0; k < ndof; ++k) rhs[k] += jw * values_at_quad[q] * phi[k];
    }
    (lower ? space.lower_mass_cholesky(element) : space.mass_cholesky(element))
        .solve_in_place(rhs);
    return rhs;
}

std::vector<double> face_project(const DgSpace& space, const std::vector<double>& trace_values,
                                 int deg) {
    const QuadratureRule& rule = space.face_rule();
    const int nq = rule.size();
    std::vector<double> leg(static_cast<size_t>(nq) * (deg + 1));
    std::vector<double> tmp(deg + 1);
    for (int q = 0; q < nq; ++q) {
        legendre_all(deg, rule.points[q], tmp.data(), nullptr, nullptr);
        for (int m = 0; m <= deg; ++m) leg[static_cast<size_t>(q) * (deg + 1) + m] = tmp[m];
    }
    std::vector<double> coeff(deg + 1, 0.0);
    for (int q = 0; q < nq; ++q)
        for (int m = 0; m <= deg; ++m)
            coeff[m] += 0.5 * (2.0 * m + 1.0) * rule.weights[q] * trace_values[q] *
                        leg[static_cast<size_t>(q) * (deg + 1) + m];
    std::vector<double> out(nq, 0.0);
    for (int q = 0; q < nq; ++q)
        for (int m = 0; m <= deg; ++m)
            out[q] += coeff[m] * leg[static_cast<size_t>(q) * (deg + 1) + m];
    return out;
}

namespace {

// node averaging on the stacked per-element nodal vectors; symmetric
void average_nodal(const DgSpace& sp, std::vector<double>& stacked) {
    const NodalTransform& nt = sp.nodal_transform();
    const int ne = sp.mesh().n_elements();
    std::vector<double> sum(sp.n_oswald_nodes(), 0.0);
    std::vector<int> count(sp.n_oswald_nodes(), 0);
    for (int e = 0; e < ne; ++e) {
        const auto& gids = sp.oswald_node_ids(e);
        for (int a = 0; a < nt.ndof; ++a) {
            sum[gids[a]] += stacked[static_cast<size_t>(e) * nt.ndof + a];
            count[gids[a]] += 1;
        }
    }
    const auto& bnd = sp.oswald_node_on_boundary();
    for (int g = 0; g < sp.n_oswald_nodes(); ++g)
        sum[g] = bnd[g] ? 0.0 : sum[g] / count[g];
    for (int e = 0; e < ne; ++e) {
        const auto& gids = sp.oswald_node_ids(e);
        for (int a = 0; a < nt.ndof; ++a)
            stacked[static_cast<size_t>(e) * nt.ndof + a] = sum[gids[a]];
    }
}

} // namespace

std::vector<double> oswald_apply(const DgSpace& sp, const std::vector<double>& coeff) {
    if (sp.degree() < 1) throw std::invalid_argument("oswald_apply: needs degree >= 1");
    const NodalTransform& nt = sp.nodal_transform();
    const int ne = sp.mesh().n_elements();
    std::vector<double> stacked(coeff.size());
    for (int e = 0; e < ne; ++e) {
        const std::vector<double> nodal = nt.to_nodal(&coeff[sp.dof_offset(e)]);
        std::copy(nodal.begin(), nodal.end(), stacked.begin() + sp.dof_offset(e));
    }
    average_nodal(sp, stacked);
    std::vector<double> out(coeff.size());
    std::vector<double> local(nt.ndof);
    for (int e = 0; e < ne; ++e) {
        std::copy(stacked.begin() + sp.dof_offset(e),
                  stacked.begin() + sp.dof_offset(e) + nt.ndof, local.begin());
        const std::vector<double> modal = nt.to_modal(local);
        std::copy(modal.begin(), modal.end(), out.begin() + sp.dof_offset(e));
    }
    return out;
}

std::vector<double> oswald_apply_transpose(const DgSpace& sp,
                                           const std::vector<double>& coeff) {
    // I_Os = B G T with T = blkdiag(V), B = blkdiag(V^{-1}), G the symmetric
    // averaging; the transpose chains V^{-T}, G, V^{T}.
    if (sp.degree() < 1)
        throw std::invalid_argument("oswald_apply_transpose: needs degree >= 1");
    const NodalTransform& nt = sp.nodal_transform();
    const int ne = sp.mesh().n_elements();
    std::vector<double> stacked(coeff.size());
    std::vector<double> local(nt.ndof);
    for (int e = 0; e < ne; ++e) {
        std::copy(coeff.begin() + sp.dof_offset(e),
                  coeff.begin() + sp.dof_offset(e) + nt.ndof, local.begin());
        const std::vector<double> z = nt.inverse.solve_transpose(local);
        std::copy(z.begin(), z.end(), stacked.begin() + sp.dof_offset(e));
    }
    average_nodal(sp, stacked);
    std::vector<double> out(coeff.size(), 0.0);
    for (int e = 0; e < ne; ++e) {
        const double* z = &stacked[sp.dof_offset(e)];
        double* o = &out[sp.dof_offset(e)];
        for (int a = 0; a < nt.ndof; ++a)
            for (int k = 0; k < nt.ndof; ++k)
                o[k] += nt.vandermonde[static_cast<size_t>(a) * nt.ndof + k] * z[a];
    }
    return out;
}

DgFunction oswald_interpolate(const DgFunction& v) {
    DgFunction out(v.space);
    out.coeff = oswald_apply(*v.space, v.coeff);
    return out;
}

double l2_inner(const DgFunction& u, const DgFunction& v) {
    const DgSpace& sp = *u.space;
    double s = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult a = evaluate_at_cell_points(u, e);
        const EvalResult b = evaluate_at_cell_points(v, e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            s += jw * a.value[q] * b.value[q];
        }
    }
    return s;
}

double l2_norm(const DgFunction& u) { return std::sqrt(l2_inner(u, u)); }

double l2_norm_against(const DgFunction& u, const ScalarField& f) {
    const DgSpace& sp = *u.space;
    double s = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult a = evaluate_at_cell_points(u, e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const double d = a.value[q] - f(map.value(sp.cell_points()[q]));
            s += jw * d * d;
        }
    }
    return std::sqrt(s);
}

double l2_norm_field(const DgSpace& sp, const ScalarField& f) {
    double s = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const double v = f(map.value(sp.cell_points()[q]));
            s += jw * v * v;
        }
    }
    return std::sqrt(s);
}

double broken_h1_seminorm(const DgFunction& u) {
    const DgSpace& sp = *u.space;
    double s = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult a = evaluate_at_cell_points(u, e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            s += jw * dot(a.gradient[q], a.gradient[q]);
        }
    }
    return std::sqrt(s);
}

namespace {

double jump_energy_sum(const DgFunction& u, double c_sigma) {
    const DgSpace& sp = *u.space;
    const double p2 = static_cast<double>(sp.degree()) * sp.degree();
    double s = 0.0;
    for (int fid = 0; fid < sp.mesh().n_faces(); ++fid) {
        const Face& f = sp.mesh().faces[fid];
        const FaceTrace t = evaluate_face(u, fid);
        const double sigma = c_sigma * p2 / f.h_e;
        double acc = 0.0;
        for (int q = 0; q < sp.face_rule().size(); ++q) {
            const Vec2 j = jump_scalar(t, q);
            acc += sp.face_rule().weights[q] * dot(j, j);
        }
        s += sigma * acc * 0.5 * f.length;
    }
    return s;
}

} // namespace

double energy_norm(const DgFunction& u, double c_sigma) {
    const double g = broken_h1_seminorm(u);
    return std::sqrt(g * g + jump_energy_sum(u, c_sigma));
}

double energy_norm_error(const DgFunction& u, const ScalarField& v_exact,
                         const VectorField& grad_exact, double c_sigma) {
    const DgSpace& sp = *u.space;
    double s = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult a = evaluate_at_cell_points(u, e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const Vec2 d = a.gradient[q] - grad_exact(map.value(sp.cell_points()[q]));
            s += jw * dot(d, d);
        }
    }
    (void)v_exact;  // jumps of u - v reduce to jumps of u for conforming v
    return std::sqrt(s + jump_energy_sum(u, c_sigma));
}

double energy_norm_field(const DgSpace& sp, const ScalarField& v,
                         const VectorField& grad_v, double c_sigma) {
    double s = 0.0;
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const double jw = map.jacobian(sp.cell_points()[q]).det() * sp.cell_weights()[q];
            const Vec2 g = grad_v(map.value(sp.cell_points()[q]));
            s += jw * dot(g, g);
        }
    }
    const double p2 = static_cast<double>(sp.degree()) * sp.degree();
    for (int fid : sp.mesh().boundary_face_ids) {
        const Face& f = sp.mesh().faces[fid];
        const double sigma = c_sigma * p2 / f.h_e;
        const ElementMap map = sp.mesh().element_map(f.elem_plus);
        double acc = 0.0;
        for (int q = 0; q < sp.face_rule().size(); ++q) {
            const Vec2 ref = face_reference_point(f, true, sp.face_rule().points[q]);
            const double val = v(map.value(ref));
            acc += sp.face_rule().weights[q] * val * val;
        }
        s += sigma * acc * 0.5 * f.length;
    }
    return std::sqrt(s);
}

double face_weighted_norm(const DgFunction& u, FaceWeight weight, double c_sigma) {
    const DgSpace& sp = *u.space;
    const double p2 = static_cast<double>(sp.degree()) * sp.degree();
    double s = 0.0;
    for (int fid = 0; fid < sp.mesh().n_faces(); ++fid) {
        const Face& f = sp.mesh().faces[fid];
        double w = 0.0;
        switch (weight) {
            case FaceWeight::sigma: w = c_sigma * p2 / f.h_e; break;
            case FaceWeight::h_over_p2: w = f.h_e / p2; break;
            case FaceWeight::p2_over_h: w = p2 / f.h_e; break;
        }
        const FaceTrace t = evaluate_face(u, fid);
        double acc = 0.0;
        for (int q = 0; q < sp.face_rule().size(); ++q) {
            const Vec2 j = jump_scalar(t, q);
            acc += sp.face_rule().weights[q] * dot(j, j);
        }
        s += w * acc * 0.5 * f.length;
    }
    return std::sqrt(s);
}

} // namespace dgest
