#ifndef SPINFV_SOLVER_HPP
#define SPINFV_SOLVER_HPP

#include <functional>
#include <string>
#include <vector>

#include "spinfv/diagnostics.hpp"
#include "spinfv/state.hpp"

namespace spinfv {

enum class SolverKind { Newton, Picard };
enum class LinearSolver { SparseLU, Gmres };

struct SolverConfig {
    SolverKind kind = SolverKind::Newton;
    LinearSolver linear = LinearSolver::SparseLU;
    double newton_tol = 1e-10;    // residual inf-norm
    int max_newton_iters = 50;
    double damping_floor = 1.0 / 1024.0; // 2^-10
    double picard_tol = 1e-11;    // ||n - rho||_inf of the fixed-point map
    int max_picard_iters = 1000;
    bool picard_fallback = true;  // retry a failed Newton step with Picard
    double steady_threshold = 1e-5;
    int max_steps = 20000;
    Exec exec = Exec::OpenMP;
    bool keep_states = false;

    void validate() const;
};

struct StepResult {
    State state;
    bool ok = false;
    int iterations = 0;
    double residual_norm = 0.0;
    std::string message;
};

// One implicit Euler step by a damped Newton iteration on the full coupled
// system, initial guess prev. All-Neumann meshes are handled by pinning the
// potential of cell 0 (the Poisson block is otherwise singular).
StepResult newton_step_solve(const Mesh& mesh, const State& prev,
                             const ModelParams& params, const BoundaryData& boundary,
                             const SolverConfig& cfg);

// One implicit Euler step by the stabilized linearized fixed-point map:
// solve Poisson from the current iterate, then the linear spin-charge system
// with the relaxation term mu m(K)(n - rho)/dt, until ||n - rho||_inf <= tol.
// Fixed points solve the scheme since the mu term vanishes there.
StepResult picard_solve(const Mesh& mesh, const State& prev, const ModelParams& params,
                        const BoundaryData& boundary, const SolverConfig& cfg);

// mu = (D ||C||_inf / lambda^2) max(1/eta^2, (1+p)/2) dt.
double picard_mu(const ModelParams& params);

enum class StopReason { Steady, MaxSteps, SolverFailure };

struct Trajectory {
    std::vector<DiagnosticsRecord> records; // index 0 is the initial state
    std::vector<State> states;              // populated when cfg.keep_states
    State final_state;
    StopReason reason = StopReason::MaxSteps;
    int steps = 0;
    std::string message;
};

using StepHook = std::function<void(int k, const State&, const DiagnosticsRecord&)>;

// Implicit Euler marching with steady-state detection: stops when the
// mesh-weighted l2 difference of consecutive states falls below the
// threshold. Diagnostics are recorded every step.
Trajectory time_march(const Mesh& mesh, const State& initial, const ModelParams& params,
                      const BoundaryData& boundary, const SolverConfig& cfg,
                      const DiagnosticsSetup& diag, const StepHook& hook = {});

} // namespace spinfv

#endif
