#ifndef SPINFV_MODEL_HPP
#define SPINFV_MODEL_HPP

#include <string>
#include <vector>

#include "spinfv/field.hpp"
#include "spinfv/mesh.hpp"

namespace spinfv {

// Scattering coefficients on an edge. Interior edges carry the weighted
// harmonic average of the two cell values (zero if either side vanishes),
// Dirichlet edges the owner-cell trace value.
struct EdgeCoeffs {
    std::vector<double> D;    // per edge
    std::vector<double> p;    // per edge
    std::vector<double> eta;  // sqrt(1 - p^2), recomputed from p per edge
    std::vector<Vec3> m;      // per edge
};

double harmonic_edge_average(double a, double b, double d_k, double d_l, double d);

// Scaled model parameters and cell fields. Immutable during a run. The
// scalar D, p, eta are the nominal constants used by the theorem monitors;
// the per-cell fields drive the scheme itself.
struct ModelParams {
    double D = 1.0;
    double p = 0.0;
    double eta = 1.0;     // sqrt(1 - p^2)
    double gamma = 0.0;   // precession strength
    double tau = 1.0;     // spin-flip relaxation time
    double lambda2 = 1.0; // squared scaled Debye length
    double dt = 0.05;

    std::vector<double> D_cell;
    std::vector<double> p_cell;
    std::vector<Vec3> m_cell;
    std::vector<double> C_cell; // doping

    EdgeCoeffs edge; // derived, built by prepare()

    // Fills constant per-cell fields from the scalars where unset, validates
    // ranges, and computes the edge coefficients.
    void prepare(const Mesh& mesh);

    double doping_sup() const; // ||C||_inf over cells
    bool constant_unit_m() const;
};

struct BoundaryData {
    std::vector<double> n_trace; // n^D per Dirichlet slot, >= 0
    std::vector<double> V_trace; // V^D per Dirichlet slot
    // The spin Dirichlet trace is identically zero.

    void validate(const Mesh& mesh) const;
};

struct InitialData {
    MeshField n0;  // scalar, >= 0
    MeshField ns;  // 3-vector
};

// alpha = D (1+p) ||C||_inf / lambda^2 and the bound sequence
// M^k = M^0 (1 - alpha dt)^{-k}.
struct BoundConstants {
    double alpha = 0.0;
    double M0 = 0.0;
    double dt = 0.0;

    double Mk(int k) const;
};

// M^0 = max( (1/2) sup n^D, sup((1/2) n0^0 + |ns^0 . m|), sup |nperp^0|, sup C ),
// suprema over discrete values. Rejects initial data violating the sign
// condition (1/2) n0^0 +- ns^0 . m >= 0.
double compute_m0(const InitialData& initial, const BoundaryData& boundary,
                  const std::vector<double>& C, const std::vector<Vec3>& m,
                  const Mesh& mesh);

BoundConstants make_bound_constants(const InitialData& initial,
                                    const BoundaryData& boundary,
                                    const ModelParams& params, const Mesh& mesh);

struct ConstraintReport {
    double dt_bound = 0.0;  // lambda^2 / (D (1+p) ||C||_inf)
    double tau_bound = 0.0; // eta lambda^2 / (D ||C||_inf)
    bool dt_ok = false;
    bool tau_ok = false;
    bool undoped = false;   // C == 0: both constraints vacuous
    bool constant_unit_m = false;

    bool within_hypotheses() const { return dt_ok && tau_ok && constant_unit_m; }
    std::string summary() const;
};

ConstraintReport check_constraints(const ModelParams& params);

// M^k = M^0 (1 - alpha dt)^{-k}; requires alpha dt < 1.
double m_bound_sequence(double M0, double alpha, double dt, int k);

} // namespace spinfv

#endif
