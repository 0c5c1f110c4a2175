#ifndef SPINFV_MESH_HPP
#define SPINFV_MESH_HPP

#include <functional>
#include <string>
#include <vector>

#include "spinfv/geometry.hpp"

namespace spinfv {

enum class EdgeKind { Interior, Dirichlet, Neumann };

struct Cell {
    int id = -1;
    Vec2 center;        // x_K
    double area = 0.0;  // m(K)
    double diam = 0.0;  // diam(K)
};

struct Edge {
    int id = -1;
    EdgeKind kind = EdgeKind::Interior;
    int cell_k = -1;  // owner cell K_sigma
    int cell_l = -1;  // second cell for interior edges, -1 otherwise
    Vec2 midpoint;
    Vec2 tangent;        // unit vector along the edge (generated meshes)
    double length = 0.0; // m(sigma)
    double d_k = 0.0;    // d(x_K, sigma)
    double d_l = 0.0;    // d(x_L, sigma), 0 for boundary edges
    double d = 0.0;      // d_sigma
    double tau = 0.0;    // m(sigma)/d_sigma
    int dirichlet_slot = -1; // index into Dirichlet trace arrays, -1 otherwise

    bool interior() const { return kind == EdgeKind::Interior; }
    // Cell on the other side, seen from `cell`; -1 on boundary edges.
    int other(int cell) const { return cell == cell_k ? cell_l : cell_k; }
};

// Admissible two-point-flux mesh: cells, edges, per-cell edge lists, and the
// Dirichlet/Neumann boundary partition. Immutable once built; safe to share
// across threads.
class Mesh {
public:
    std::vector<Cell> cells;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> cell_edges;  // E_K as edge ids
    std::vector<int> dirichlet_edges;          // edge ids in trace-slot order

    // Uniform tensor meshes record their cell extents (enables exact
    // tensor-product quadrature); zero for imported meshes.
    bool tensor = false;
    double tensor_hx = 0.0;
    double tensor_hy = 0.0;

    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }
    int n_dirichlet() const { return static_cast<int>(dirichlet_edges.size()); }

    double total_area() const;

    // Set after construction by the generators/importers.
    void finalize();
};

struct Rect {
    double x0 = 0.0, y0 = 0.0;
    double x1 = 1.0, y1 = 1.0;
};

// Classifies an exterior edge by its midpoint; must return Dirichlet or
// Neumann for every exterior edge.
using BoundaryClassifier = std::function<EdgeKind(Vec2 midpoint)>;

BoundaryClassifier all_dirichlet();
BoundaryClassifier all_neumann();
// Dirichlet on the x = x0 and x = x1 sides, Neumann elsewhere.
BoundaryClassifier dirichlet_left_right(const Rect& domain);

// Uniform tensor mesh of nx-by-ny rectangular cells with centroid centers.
Mesh build_rect_mesh(int nx, int ny, const Rect& domain,
                     const BoundaryClassifier& classify);

struct OrthogonalityDefect {
    int edge = -1;
    double angle = 0.0;  // radians
};

struct AdmissibilityReport {
    double xi = 0.0;               // min_K min_{sigma in E_K} d(x_K,sigma)/diam(K)
    double xi_min = 0.0;
    bool xi_ok = false;
    double max_angle_defect = 0.0; // radians, over interior edges
    double angle_tol = 0.0;
    std::vector<OrthogonalityDefect> orthogonality_violations;
    std::vector<std::string> structural_errors;
    bool has_dirichlet = false;

    bool pass() const {
        return xi_ok && orthogonality_violations.empty() && structural_errors.empty();
    }
    std::string summary() const;
};

// Diagnostic only: never throws. Orthogonality of interior edges is checked
// through the identity d_K + d_L = |x_K - x_L|, which holds iff the segment
// (x_K, x_L) is orthogonal to sigma.
AdmissibilityReport check_admissibility(const Mesh& mesh, double xi_min,
                                        double angle_tol = 1e-10);

} // namespace spinfv

#endif
