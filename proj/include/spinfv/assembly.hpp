#ifndef SPINFV_ASSEMBLY_HPP
#define SPINFV_ASSEMBLY_HPP

#include <Eigen/SparseCore>
#include <array>
#include <vector>

#include "spinfv/flux.hpp"
#include "spinfv/state.hpp"

namespace spinfv {

// Kernel execution policy. OpenMP kernels produce bitwise-identical results
// to the serial reference for any thread count: every output slot is written
// by exactly one thread in a fixed arithmetic order.
enum class Exec { Serial, OpenMP };

// Owner-oriented edge fluxes: raw Scharfetter-Gummel fluxes J_{l,K,sigma}
// and spin-combined fluxes j_{l,K,sigma} for K = K_sigma, l = 0..3.
// The neighbor side is the exact negation; Neumann edges carry zeros.
struct EdgeFluxSet {
    std::vector<std::array<double, 4>> raw;
    std::vector<std::array<double, 4>> mixed;
};

EdgeFluxSet compute_edge_fluxes(const Mesh& mesh, const State& state,
                                const ModelParams& params, Exec exec = Exec::OpenMP);

// Residual of the implicit Euler scheme, cell-major blocks
// (F_n0, F_n1, F_n2, F_n3, F_V) per cell; zero iff `state` solves the step
// from `prev`. Dirichlet traces of `state` must equal the boundary data.
std::vector<double> assemble_residual(const Mesh& mesh, const State& state,
                                      const State& prev, const ModelParams& params,
                                      const BoundaryData& boundary,
                                      Exec exec = Exec::OpenMP);

// Exact Jacobian of assemble_residual with respect to the cell unknowns,
// 5x5 blocks on the cell-neighbor stencil.
Eigen::SparseMatrix<double> assemble_jacobian(const Mesh& mesh, const State& state,
                                              const State& prev,
                                              const ModelParams& params);

} // namespace spinfv

#endif
