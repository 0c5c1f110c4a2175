#ifndef SPINFV_DIAGNOSTICS_HPP
#define SPINFV_DIAGNOSTICS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinfv/assembly.hpp"
#include "spinfv/state.hpp"

namespace spinfv {

// Spin-up/down densities n_pm = (1/2) n0 +- ns.m, cellwise.
std::pair<MeshField, MeshField> project_updown(const MeshField& n0, const MeshField& ns,
                                               const std::vector<Vec3>& m,
                                               const Mesh& mesh);

// Perpendicular component ns - (ns.m) m, cellwise.
MeshField project_perp(const MeshField& ns, const std::vector<Vec3>& m, const Mesh& mesh);

// Discrete free energy: relative entropy of n_pm = (1/2) n0 +- ns.m against
// n^D/2 plus the electric energy of V - V^D. The reference fields carry cell
// values and Dirichlet traces. Uses the convention 0 log 0 = 0; rejects
// negative n_pm.
double free_energy(const Mesh& mesh, const State& state, const std::vector<Vec3>& m,
                   const MeshField& nD_ref, const MeshField& VD_ref, double lambda2,
                   Exec exec = Exec::OpenMP);

// Left-hand side dissipation sum of the free-energy inequality:
// (dt/2) sum_pm D (1 +- p) sum_sigma tau min(n_pm) (D(log n_pm + V))^2,
// with zero contribution from edges where the minimum vanishes. Uses the
// nominal constants D, p of the params.
double dissipation_rate(const Mesh& mesh, const State& state, const ModelParams& params,
                        Exec exec = Exec::OpenMP);

struct BoundFlags {
    bool positivity_ok = true;  // n_pm >= -tol
    bool upper_ok = true;       // n_pm <= M0 + tol and n0 <= 2 M0 + tol
    bool perp_ok = true;        // |nperp| <= M^k + tol and |ns| <= 2 M^k + tol
    bool applicable = true;     // false when alpha dt >= 1 (M^k undefined)
};

BoundFlags bound_monitor(const Mesh& mesh, const State& state, const ModelParams& params,
                         const BoundConstants& constants, int k, double tol = 1e-10);

// Scaled charge current through a set of Dirichlet edges, sum of
// j_{0,K_sigma,sigma}; multiply by the physical current scale to get A/m.
double contact_current(const Mesh& mesh, const EdgeFluxSet& fluxes,
                       const std::vector<int>& contact_edges);
Vec3 contact_spin_current(const Mesh& mesh, const EdgeFluxSet& fluxes,
                          const std::vector<int>& contact_edges);

struct ContactSet {
    std::string name;
    std::vector<int> edges;  // Dirichlet edge ids
};

// Everything the per-step diagnostics need beyond the state itself.
struct DiagnosticsSetup {
    BoundConstants bounds;
    bool within_hypotheses = true;
    std::optional<MeshField> nD_ref;  // energy reference; unset -> energy NaN
    std::optional<MeshField> VD_ref;
    std::vector<ContactSet> contacts;
    double current_scale = 1.0;
    double energy_slack = 1e-9;  // tolerance of the monotonicity flag
    double bound_tol = 1e-10;
};

struct DiagnosticsRecord {
    int step = 0;
    double time = 0.0;
    double energy = 0.0;       // NaN without a reference or with negative n_pm
    double dissipation = 0.0;
    double min_np = 0.0, max_np = 0.0;
    double min_nm = 0.0, max_nm = 0.0;
    double max_nperp = 0.0;
    double Mk = 0.0;           // NaN when alpha dt >= 1
    BoundFlags flags;
    bool energy_monotone_ok = true;
    std::vector<double> contact_currents;  // physical units, per setup contact

    // Bitmask for CSV output: 0 is clean; bit0 positivity, bit1 upper bound,
    // bit2 perp bound, bit3 energy monotonicity, bit4 outside hypotheses.
    int flag_bits(bool outside_hypotheses) const;
};

DiagnosticsRecord compute_record(const Mesh& mesh, const State& state,
                                 const ModelParams& params, const DiagnosticsSetup& setup,
                                 int k, double prev_energy, Exec exec = Exec::OpenMP);

} // namespace spinfv

#endif
