#ifndef SPINFV_DEVICE_HPP
#define SPINFV_DEVICE_HPP

#include <string>
#include <utility>
#include <vector>

#include "spinfv/solver.hpp"

namespace spinfv {

namespace phys {
inline constexpr double q = 1.602e-19;        // C
inline constexpr double eps0 = 8.854e-12;     // F/m
inline constexpr double kB = 1.380649e-23;    // J/K
inline constexpr double hbar = 1.054571817e-34; // J s
} // namespace phys

// Double-gate MESFET in SI units: ferromagnetic source/drain regions, a
// nonmagnetic channel, ohmic end contacts and two Schottky gate contacts
// centered on the top and bottom boundaries.
struct DeviceSpec {
    double length = 0.6e-6;         // m
    double height = 0.2e-6;         // m
    double contact_length = 0.1e-6; // doped source/drain region length, m
    double gate_length = 0.2e-6;    // m
    double doping_high = 3e23;      // m^-3
    double doping_channel = 1e23;   // m^-3
    double diffusion = 1e-3;        // m^2/s
    double tau_sf = 1e-12;          // s
    double temperature = 300.0;     // K
    double epsilon_r = 11.7;
    double polarization = 0.9;      // in the doped regions
    double barrier_V = 0.8;         // Schottky barrier
    double closed_gate_V = 1.2;     // gate voltage of the closed state
    double gate_density_open = 3.9e11;   // m^-3
    double gate_density_closed = 3.2e9;  // m^-3

    // Squared scaled Debye length multiplying the Poisson operator. Direct
    // input; the classical-formula value is reported alongside (see Scales,
    // and the README note on this constant).
    double lambda2 = 1.6e-4;
    // Scaled precession strength; <= 0 selects the default (L^2/D)/tau_sf.
    double gamma_scaled = -1.0;
};

// Conversion factors between physical and scaled quantities (divide by the
// factor to scale, multiply to go back).
struct Scales {
    double length = 1.0;    // m
    double density = 1.0;   // m^-3
    double potential = 1.0; // V (thermal voltage)
    double time = 1.0;      // s
    double current = 1.0;   // A/m per unit of scaled contact flux
    double lambda_classical = 0.0; // sqrt(eps0 epsr kB T / (q^2 C+ L^2))
};

enum class GateState { Open, Closed };

struct BiasPoint {
    double drain_V = 0.0; // applied drain voltage, V
    double gate_V = 0.0;  // applied gate voltage, V
    GateState gate = GateState::Open;
};

// Scaled model parameters (without cell fields) and the conversion scales.
std::pair<ModelParams, Scales> nondimensionalize(const DeviceSpec& spec);

struct ProblemSetup {
    Mesh mesh;
    ModelParams params;
    BoundaryData boundary;
    InitialData initial;
    State initial_state; // V filled by the initial Poisson solve
    std::vector<ContactSet> contacts; // source, drain, gate_top, gate_bottom
    Scales scales;
    DiagnosticsSetup diag;
};

// Rectangular tensor mesh resolving the contact segments exactly; per-cell
// doping, polarization and magnetization; Dirichlet data per bias; initial
// data n0 = doping, ns = 0.
ProblemSetup build_mesfet(const DeviceSpec& spec, const BiasPoint& bias, int nx, int ny);

// Time-march to steady state; when out_dir is nonempty, dumps initial/final
// fields and the per-step diagnostics CSV there.
Trajectory run_steady(const ProblemSetup& setup, const SolverConfig& cfg,
                      const std::string& out_dir = "");

struct IVRow {
    double gate_V = 0.0;
    double drain_V = 0.0;
    double current = 0.0; // drain contact, A/m
    int steps = 0;
    double final_energy = 0.0;
    bool ok = false;
    std::string message;
};

// Steady solves over the drain-voltage grid for each gate point; failed
// points are recorded and the sweep continues. Each gate curve warm-starts
// successive drain points from the previous steady state.
std::vector<IVRow> iv_sweep(const DeviceSpec& spec,
                            const std::vector<double>& drain_voltages,
                            const std::vector<BiasPoint>& gate_points, int nx, int ny,
                            const SolverConfig& cfg, const std::string& out_dir = "");

struct TransientSample {
    int step = 0;
    double time_ps = 0.0;
    double drain_current = 0.0; // A/m
};

// Open-state steady solve, then a gate switch to the closed state at t = 0;
// records the drain current per step (sample 0 is the open steady current).
std::vector<TransientSample> transient_switch(const DeviceSpec& spec, double drain_V,
                                              int nx, int ny, const SolverConfig& cfg,
                                              const std::string& out_dir = "");

struct EnergySample {
    int step = 0;
    double time_ps = 0.0;
    double energy = 0.0;
};

// Zero-bias relaxation with the gate density moved onto the equilibrium
// characteristic (log n^D + V^D constant across all contacts), so the free
// energy is monitored against the discrete equilibrium reference.
std::vector<EnergySample> energy_decay_run(const DeviceSpec& spec, int nx, int ny,
                                           const SolverConfig& cfg,
                                           const std::string& out_dir = "");

} // namespace spinfv

#endif
