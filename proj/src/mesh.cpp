#include "dgest/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace dgest {

Vec2 ElementMap::value(const Vec2& r) const {
    const double xm = 1.0 - r.x, xp = 1.0 + r.x;
    const double ym = 1.0 - r.y, yp = 1.0 + r.y;
    return 0.25 * (xm * ym * corner[0] + xp * ym * corner[1] +
                   xp * yp * corner[2] + xm * yp * corner[3]);
}

Mat2 ElementMap::jacobian(const Vec2& r) const {
    const double xm = 1.0 - r.x, xp = 1.0 + r.x;
    const double ym = 1.0 - r.y, yp = 1.0 + r.y;
    const Vec2 dxi = 0.25 * (ym * (corner[1] - corner[0]) + yp * (corner[2] - corner[3]));
    const Vec2 deta = 0.25 * (xm * (corner[3] - corner[0]) + xp * (corner[2] - corner[1]));
    return {dxi.x, deta.x, dxi.y, deta.y};
}

Vec2 ElementMap::cross_derivative() const {
    return 0.25 * (corner[0] - corner[1] + corner[2] - corner[3]);
}

Vec2 ElementMap::inverse(const Vec2& x) const {
    Vec2 ref{0.0, 0.0};
    for (int it = 0; it < 20; ++it) {
        const Vec2 res = value(ref) - x;
        if (std::abs(res.x) + std::abs(res.y) < 1e-14) break;
        const Vec2 d = jacobian(ref).inverse().apply(res);
        ref = ref - d;
    }
    return ref;
}

ElementMap Mesh::element_map(int e) const {
    const auto& el = elements.at(static_cast<size_t>(e));
    return ElementMap{{vertices[el[0]], vertices[el[1]], vertices[el[2]], vertices[el[3]]}};
}

namespace {

double quad_area(const Mesh& m, int e) {
    const auto& el = m.elements[e];
    double a = 0.0;  // shoelace
    for (int k = 0; k < 4; ++k) {
        const Vec2& p = m.vertices[el[k]];
        const Vec2& q = m.vertices[el[(k + 1) % 4]];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

double quad_diameter(const Mesh& m, int e) {
    const auto& el = m.elements[e];
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            d = std::max(d, norm(m.vertices[el[i]] - m.vertices[el[j]]));
    return d;
}

// Radius of the largest inscribed circle, approximated by half the minimal
// distance between opposite edges; exact for rectangles.
double quad_inradius(const Mesh& m, int e) {
    const auto& el = m.elements[e];
    double rho = std::numeric_limits<double>::max();
    for (int k = 0; k < 4; ++k) {
        const Vec2 a = m.vertices[el[k]];
        const Vec2 b = m.vertices[el[(k + 1) % 4]];
        const Vec2 c = m.vertices[el[(k + 2) % 4]];
        const Vec2 d = m.vertices[el[(k + 3) % 4]];
        const Vec2 t = b - a;
        const double len = norm(t);
        const Vec2 n{t.y / len, -t.x / len};  // outward for ccw ordering
        // distance of the far edge's endpoints from edge (a,b)
        rho = std::min(rho, 0.5 * std::min(std::abs(dot(c - a, n)), std::abs(dot(d - a, n))));
    }
    return rho;
}

} // namespace

Mesh build_from_cells(std::vector<Vec2> vertices, std::vector<std::array<int, 4>> elements) {
    Mesh m;
    m.vertices = std::move(vertices);
    m.elements = std::move(elements);

    const int ne = m.n_elements();
    m.element_diameter.resize(ne);
    m.element_faces.assign(ne, {-1, -1, -1, -1});
    for (int e = 0; e < ne; ++e) {
        if (quad_area(m, e) <= 0.0)
            throw std::invalid_argument("build_from_cells: element " + std::to_string(e) +
                                        " is degenerate or not counterclockwise");
        m.element_diameter[e] = quad_diameter(m, e);
    }

    // Pair element edges through their sorted endpoint ids.
    std::map<std::pair<int, int>, std::pair<int, int>> open_edges;  // key -> (elem, local)
    for (int e = 0; e < ne; ++e) {
        const auto& el = m.elements[e];
        for (int lf = 0; lf < 4; ++lf) {
            const int a = el[lf];
            const int b = el[(lf + 1) % 4];
            const auto key = std::minmax(a, b);
            auto it = open_edges.find(key);
            if (it == open_edges.end()) {
                open_edges.emplace(key, std::make_pair(e, lf));
                continue;
            }
            const auto [ep, lfp] = it->second;
            open_edges.erase(it);

            Face f;
            f.elem_plus = ep;     // first-seen element has the smaller index
            f.local_plus = lfp;
            f.elem_minus = e;
            f.local_minus = lf;
            f.v0 = m.elements[ep][lfp];
            f.v1 = m.elements[ep][(lfp + 1) % 4];
            f.minus_agrees = (a == f.v0);  // false on conforming ccw meshes
            const Vec2 d = m.vertices[f.v1] - m.vertices[f.v0];
            f.length = norm(d);
            f.normal = {d.y / f.length, -d.x / f.length};
            f.h_e = 0.5 * (m.element_diameter[ep] + m.element_diameter[e]);
            const int id = m.n_faces();
            m.faces.push_back(f);
            m.interior_face_ids.push_back(id);
            m.element_faces[ep][lfp] = id;
            m.element_faces[e][lf] = id;
        }
    }

    // Remaining unpaired edges are boundary faces.
    m.vertex_on_boundary.assign(m.vertices.size(), false);
    for (const auto& [key, el] : open_edges) {
        const auto [e, lf] = el;
        Face f;
        f.elem_plus = e;
        f.local_plus = lf;
        f.v0 = m.elements[e][lf];
        f.v1 = m.elements[e][(lf + 1) % 4];
        const Vec2 d = m.vertices[f.v1] - m.vertices[f.v0];
        f.length = norm(d);
        f.normal = {d.y / f.length, -d.x / f.length};
        f.h_e = m.element_diameter[e];
        const int id = m.n_faces();
        m.faces.push_back(f);
        m.boundary_face_ids.push_back(id);
        m.element_faces[e][lf] = id;
        m.vertex_on_boundary[f.v0] = true;
        m.vertex_on_boundary[f.v1] = true;
    }

    double ratio = 0.0;
    for (int e = 0; e < ne; ++e)
        ratio = std::max(ratio, m.element_diameter[e] / quad_inradius(m, e));
    m.shape_regularity_ratio = ratio;
    return m;
}

Mesh build_structured_mesh(const Rect& domain, int nx, int ny) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("build_structured_mesh: cell counts must be positive");
    if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
        throw std::invalid_argument("build_structured_mesh: degenerate domain rectangle");

    std::vector<Vec2> verts;
    verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            verts.push_back({domain.x0 + domain.width() * i / nx,
                             domain.y0 + domain.height() * j / ny});

    std::vector<std::array<int, 4>> cells;
    cells.reserve(static_cast<size_t>(nx) * ny);
    const auto vid = [nx](int i, int j) { return i + (nx + 1) * j; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});

    Mesh m = build_from_cells(std::move(verts), std::move(cells));
    m.structured = true;
    m.domain = domain;
    m.nx = nx;
    m.ny = ny;
    return m;
}

Mesh refine_uniform(const Mesh& mesh) {
    if (!mesh.structured)
        throw std::invalid_argument("refine_uniform: only structured meshes are supported");
    Mesh fine = build_structured_mesh(mesh.domain, 2 * mesh.nx, 2 * mesh.ny);
    fine.parent_element.resize(fine.elements.size());
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i)
            fine.parent_element[i + fine.nx * j] = (i / 2) + mesh.nx * (j / 2);
    return fine;
}

Vec2 face_normal(const Face& face) { return face.normal; }

Vec2 face_reference_point(const Face& face, bool plus_side, double t) {
    const int lf = plus_side ? face.local_plus : face.local_minus;
    const double tau = (plus_side || face.minus_agrees) ? t : -t;
    switch (lf) {
        case 0: return {tau, -1.0};
        case 1: return {1.0, tau};
        case 2: return {-tau, 1.0};
        case 3: return {-1.0, -tau};
        default: throw std::logic_error("face_reference_point: invalid local face");
    }
}

double Mesh::total_area() const {
    double a = 0.0;
    for (int e = 0; e < n_elements(); ++e) a += quad_area(*this, e);
    return a;
}

double Mesh::h_max() const {
    double h = 0.0;
    for (double d : element_diameter) h = std::max(h, d);
    return h;
}

void write_mesh_text(const Mesh& mesh, std::ostream& out) {
    for (const Vec2& v : mesh.vertices) out << "v " << v.x << " " << v.y << "\n";
    for (const auto& el : mesh.elements)
        out << "e " << el[0] << " " << el[1] << " " << el[2] << " " << el[3] << "\n";
}

} // namespace dgest
