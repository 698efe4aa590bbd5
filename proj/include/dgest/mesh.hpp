// Conforming quadrilateral meshes of rectangular domains: construction,
// face topology with plus/minus orientation, element maps and meshsize.
#pragma once

#include "dgest/geometry.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace dgest {

// Bilinear map from the reference square (-1,1)^2 onto a quadrilateral.
// Corners are listed counterclockwise.
struct ElementMap {
    std::array<Vec2, 4> corner;

    Vec2 value(const Vec2& ref) const;
    Mat2 jacobian(const Vec2& ref) const;
    // d^2 F / dxi deta; constant for a bilinear map, zero iff the map is affine.
    Vec2 cross_derivative() const;
    // Inverts the map by Newton iteration (one step on affine elements).
    Vec2 inverse(const Vec2& x) const;
};

struct Face {
    int v0 = -1, v1 = -1;    // endpoints, in the plus element's ccw traversal order
    int elem_plus = -1;
    int elem_minus = -1;     // -1 on boundary faces
    int local_plus = -1;     // local face index (0 bottom, 1 right, 2 top, 3 left)
    int local_minus = -1;
    // For each side: does the element's ccw edge traversal run v0 -> v1?
    // True for the plus side by construction.
    bool minus_agrees = false;
    Vec2 normal;             // unit, outward from the plus element
    double length = 0.0;
    double h_e = 0.0;        // facewise meshsize: {h} on interior faces, h_kappa on boundary
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 4>> elements;   // ccw vertex ids
    std::vector<Face> faces;
    std::vector<int> interior_face_ids;
    std::vector<int> boundary_face_ids;
    std::vector<std::array<int, 4>> element_faces;  // face id per local face
    std::vector<double> element_diameter;
    std::vector<bool> vertex_on_boundary;
    double shape_regularity_ratio = 0.0;   // max over elements of diameter / inradius

    // Lineage through uniform refinement; empty for meshes built directly.
    std::vector<int> parent_element;

    // Set when the mesh came from build_structured_mesh / refine_uniform.
    bool structured = false;
    Rect domain;
    int nx = 0, ny = 0;

    int n_elements() const { return static_cast<int>(elements.size()); }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }

    ElementMap element_map(int e) const;
    double total_area() const;
    double h_max() const;
};

// nx-by-ny congruent cells; element (i,j) gets index i + nx*j.
Mesh build_structured_mesh(const Rect& domain, int nx, int ny);

// Splits every quadrilateral into four; children of element k are 4k..4k+3
// in the structured numbering (recorded in parent_element).
Mesh refine_uniform(const Mesh& mesh);

// Topology construction from raw cell lists. Used by the structured builder
// and by tests that need custom (e.g. skewed or permuted) meshes.
Mesh build_from_cells(std::vector<Vec2> vertices,
                      std::vector<std::array<int, 4>> elements);

// Unit outward normal from the plus side.
Vec2 face_normal(const Face& face);

// Reference coordinates of face parameter t in [-1,1] on the given side.
Vec2 face_reference_point(const Face& face, bool plus_side, double t);

// Plain-text dump: one "v x y" line per vertex, one "e i0 i1 i2 i3" per element.
void write_mesh_text(const Mesh& mesh, std::ostream& out);

} // namespace dgest
