#ifndef SPINFV_STATE_HPP
#define SPINFV_STATE_HPP

#include "spinfv/field.hpp"
#include "spinfv/model.hpp"

namespace spinfv {

// One time level of the unknowns (n0, ns, V) in scaled units. Dirichlet
// traces carry the boundary data: n^D on n0, zero on ns, V^D on V.
struct State {
    MeshField n0;
    MeshField ns;
    MeshField V;
    int step = 0;

    static State zero(const Mesh& mesh) {
        State s;
        s.n0 = MeshField::scalar(mesh);
        s.ns = MeshField::vector3(mesh);
        s.V = MeshField::scalar(mesh);
        return s;
    }
};

// Assembles a state from initial data and boundary traces; V cells are left
// zero for the caller (initial Poisson solve) to fill.
State make_state(const Mesh& mesh, const InitialData& initial,
                 const BoundaryData& boundary);

// Max-norm distance over all five unknown fields (cells only).
double state_max_diff(const State& a, const State& b);

// Mesh-weighted l2 norm of the step difference over all five fields.
double state_l2_diff(const State& a, const State& b, const Mesh& mesh);

} // namespace spinfv

#endif
