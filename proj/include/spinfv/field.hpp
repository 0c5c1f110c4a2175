#ifndef SPINFV_FIELD_HPP
#define SPINFV_FIELD_HPP

#include <functional>
#include <vector>

#include "spinfv/mesh.hpp"

namespace spinfv {

// Per-cell values plus Dirichlet-edge trace values, u_M = (u_T, u_{E^D}).
// Scalar (comps = 1) or 3-vector (comps = 3). The edge-value accessor
// returns u_L / u_sigma / u_K for interior / Dirichlet / Neumann edges,
// so D u_{K,sigma} vanishes on Neumann edges by construction.
class MeshField {
public:
    MeshField() = default;
    MeshField(const Mesh& mesh, int comps, double init = 0.0)
        : comps_(comps),
          cell_(static_cast<size_t>(mesh.n_cells()) * comps, init),
          trace_(static_cast<size_t>(mesh.n_dirichlet()) * comps, init) {}

    static MeshField scalar(const Mesh& mesh, double init = 0.0) {
        return MeshField(mesh, 1, init);
    }
    static MeshField vector3(const Mesh& mesh, double init = 0.0) {
        return MeshField(mesh, 3, init);
    }

    int comps() const { return comps_; }
    int n_cells() const { return static_cast<int>(cell_.size()) / comps_; }

    double& cell(int k, int c = 0) { return cell_[static_cast<size_t>(k) * comps_ + c]; }
    double cell(int k, int c = 0) const { return cell_[static_cast<size_t>(k) * comps_ + c]; }
    double& trace(int slot, int c = 0) { return trace_[static_cast<size_t>(slot) * comps_ + c]; }
    double trace(int slot, int c = 0) const { return trace_[static_cast<size_t>(slot) * comps_ + c]; }

    Vec3 cell_vec(int k) const { return {cell(k, 0), cell(k, 1), cell(k, 2)}; }
    void set_cell_vec(int k, Vec3 v) { cell(k, 0) = v.x; cell(k, 1) = v.y; cell(k, 2) = v.z; }

    // u_{K,sigma} seen from cell `k` (owner or neighbor of the edge).
    double edge_value(const Mesh& mesh, int edge_id, int k, int c = 0) const {
        const Edge& e = mesh.edges[edge_id];
        switch (e.kind) {
            case EdgeKind::Interior:  return cell(e.other(k), c);
            case EdgeKind::Dirichlet: return trace(e.dirichlet_slot, c);
            case EdgeKind::Neumann:   return cell(k, c);
        }
        return 0.0;
    }

    // D u_{K,sigma} = u_{K,sigma} - u_K
    double edge_diff(const Mesh& mesh, int edge_id, int k, int c = 0) const {
        return edge_value(mesh, edge_id, k, c) - cell(k, c);
    }

    std::vector<double>& cell_data() { return cell_; }
    const std::vector<double>& cell_data() const { return cell_; }
    std::vector<double>& trace_data() { return trace_; }
    const std::vector<double>& trace_data() const { return trace_; }

private:
    int comps_ = 1;
    std::vector<double> cell_;
    std::vector<double> trace_;
};

enum class Quadrature { Midpoint, Gauss2 };

// Cell means u_K = (1/m(K)) int_K f dx and Dirichlet-edge means
// u_sigma = (1/m(sigma)) int_sigma f ds. Gauss2 is a 2x2 tensor rule on
// rectangular cells (2-point along edges) and requires a generated mesh.
MeshField cell_average(const std::function<double(Vec2)>& f, const Mesh& mesh,
                       Quadrature quad = Quadrature::Midpoint);

// (sum_sigma tau_sigma |D u_{K,sigma}|^2)^{1/2} over all edges with K = K_sigma.
double h1_seminorm(const MeshField& u, const Mesh& mesh);

// (sum_K m(K)|u_K|^p)^{1/p}, max_K |u_K| for p = infinity; |u_K| is the
// Euclidean magnitude for vector fields. p < 1 is rejected.
double lp_norm(const MeshField& u, const Mesh& mesh, double p);

} // namespace spinfv

#endif
