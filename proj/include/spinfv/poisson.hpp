#ifndef SPINFV_POISSON_HPP
#define SPINFV_POISSON_HPP

#include "spinfv/state.hpp"

namespace spinfv {

// Solves -lambda^2 sum_sigma tau_sigma D V_{K,sigma} = m(K)(n0_K - C_K)
// with V = V^D on Dirichlet edges and zero differences on Neumann edges.
// Requires a nonempty Dirichlet boundary.
MeshField solve_poisson(const Mesh& mesh, const MeshField& n0,
                        const std::vector<double>& C, double lambda2,
                        const std::vector<double>& V_trace);

// Discrete thermal-equilibrium state: all edge fluxes vanish, so
// log n0 + V is the common constant of the boundary data and V solves the
// resulting Poisson-Boltzmann problem. Requires strictly positive n^D with
// log n^D + V^D constant across the Dirichlet edges.
State equilibrium_state(const Mesh& mesh, const ModelParams& params,
                        const BoundaryData& boundary, double tol = 1e-14);

} // namespace spinfv

#endif
