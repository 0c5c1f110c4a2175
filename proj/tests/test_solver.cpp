#include <doctest.h>

#include <cmath>

#include "spinfv/poisson.hpp"
#include "spinfv/solver.hpp"

using namespace spinfv;

namespace {

const Rect kUnit{0, 0, 1, 1};

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// One all-Neumann unit cell; the potential is gauge-pinned by the solver and
// the doping matches the initial charge so the charge equation is trivial.
struct OneCell {
    Mesh mesh;
    ModelParams params;
    BoundaryData boundary;
    State state;
};

OneCell one_cell(double gamma, double tau, double dt, Vec3 ns0) {
    OneCell oc;
    oc.mesh = build_rect_mesh(1, 1, kUnit, all_neumann());
    oc.params.gamma = gamma;
    oc.params.tau = tau;
    oc.params.dt = dt;
    oc.params.m_cell.assign(1, Vec3{0, 0, 1});
    oc.params.C_cell.assign(1, 1.0);
    oc.params.prepare(oc.mesh);
    oc.state = State::zero(oc.mesh);
    oc.state.n0.cell(0) = 1.0;
    oc.state.ns.set_cell_vec(0, ns0);
    return oc;
}

// 4x4 doped problem with constant unit magnetization; satisfies the time
// step and relaxation constraints.
struct Doped {
    Mesh mesh;
    ModelParams params;
    BoundaryData boundary;
    State initial;
    DiagnosticsSetup diag;
};

Doped doped_problem(int nx, int ny) {
    Doped dp;
    dp.mesh = build_rect_mesh(nx, ny, kUnit, dirichlet_left_right(kUnit));
    dp.params.D = 1.0;
    dp.params.p = 0.3;
    dp.params.gamma = 0.5;
    dp.params.tau = 1.5;
    dp.params.lambda2 = 1.0;
    dp.params.dt = 0.05;
    dp.params.m_cell.assign(dp.mesh.n_cells(), Vec3{0, 0, 1});
    dp.params.C_cell.assign(dp.mesh.n_cells(), 0.5);
    dp.params.prepare(dp.mesh);

    dp.boundary.n_trace.assign(dp.mesh.n_dirichlet(), 0.0);
    dp.boundary.V_trace.assign(dp.mesh.n_dirichlet(), 0.0);
    for (int slot = 0; slot < dp.mesh.n_dirichlet(); ++slot) {
        const bool left = dp.mesh.edges[dp.mesh.dirichlet_edges[slot]].midpoint.x < 0.5;
        dp.boundary.n_trace[slot] = left ? 1.0 : 0.6;
        dp.boundary.V_trace[slot] = left ? 0.0 : 1.0;
    }

    InitialData init;
    init.n0 = MeshField::scalar(dp.mesh, 1.0);
    init.ns = MeshField::vector3(dp.mesh);
    for (int k = 0; k < dp.mesh.n_cells(); ++k)
        init.ns.set_cell_vec(k, {0.25, 0.1, 0.3});
    dp.initial = make_state(dp.mesh, init, dp.boundary);
    dp.initial.V = solve_poisson(dp.mesh, dp.initial.n0, dp.params.C_cell,
                                 dp.params.lambda2, dp.boundary.V_trace);

    dp.diag.bounds = make_bound_constants(init, dp.boundary, dp.params, dp.mesh);
    return dp;
}

} // namespace

TEST_CASE("equilibrium is a fixed point of both solvers") {
    Mesh mesh = build_rect_mesh(8, 8, kUnit, dirichlet_left_right(kUnit));
    ModelParams params;
    params.p = 0.2;
    params.gamma = 0.6;
    params.tau = 0.9;
    params.lambda2 = 0.5;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);
    BoundaryData bd;
    bd.n_trace.assign(mesh.n_dirichlet(), 2.0);
    bd.V_trace.assign(mesh.n_dirichlet(), 5.0);

    State eq = equilibrium_state(mesh, params, bd);
    SolverConfig cfg;

    StepResult newton = newton_step_solve(mesh, eq, params, bd, cfg);
    CHECK(newton.ok);
    CHECK(newton.iterations == 0);
    CHECK(state_max_diff(newton.state, eq) == 0.0);

    StepResult picard = picard_solve(mesh, eq, params, bd, cfg);
    CHECK(picard.ok);
    CHECK(state_max_diff(picard.state, eq) <= 1e-12);
}

TEST_CASE("one-cell implicit spin relaxation is exact") {
    const double tau = 0.4, dt = 0.05;
    OneCell oc = one_cell(0.0, tau, dt, {0.0, 0.0, 0.8});
    SolverConfig cfg;

    State s = oc.state;
    for (int k = 1; k <= 20; ++k) {
        StepResult step = newton_step_solve(oc.mesh, s, oc.params, oc.boundary, cfg);
        REQUIRE(step.ok);
        s = step.state;
        const double expected = 0.8 * std::pow(1.0 + dt / tau, -k);
        CHECK(s.ns.cell(0, 2) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(s.n0.cell(0) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("one-cell rotation-relaxation matches the hand-solved system") {
    const double tau = 0.7, dt = 0.05, gamma = 2.3;
    OneCell oc = one_cell(gamma, tau, dt, {0.5, -0.2, 0.3});
    SolverConfig cfg;

    const double a = 1.0 / dt + 1.0 / tau;
    Vec3 n = oc.state.ns.cell_vec(0);
    State s = oc.state;
    for (int k = 1; k <= 10; ++k) {
        StepResult step = newton_step_solve(oc.mesh, s, oc.params, oc.boundary, cfg);
        REQUIRE(step.ok);
        s = step.state;
        // Implicit update: a n1 - 2 gamma n2 = n1_prev/dt, a n2 + 2 gamma n1 = n2_prev/dt,
        // n3 relaxing independently.
        const double det = a * a + 4.0 * gamma * gamma;
        const Vec3 rhs = (1.0 / dt) * n;
        const Vec3 expected{(a * rhs.x + 2.0 * gamma * rhs.y) / det,
                            (a * rhs.y - 2.0 * gamma * rhs.x) / det, rhs.z / a};
        CHECK(s.ns.cell(0, 0) == doctest::Approx(expected.x).epsilon(1e-12));
        CHECK(s.ns.cell(0, 1) == doctest::Approx(expected.y).epsilon(1e-12));
        CHECK(s.ns.cell(0, 2) == doctest::Approx(expected.z).epsilon(1e-12));
        n = expected;
    }
}

TEST_CASE("spatially constant all-Neumann state obeys the implicit spin relation") {
    Mesh mesh = build_rect_mesh(4, 4, kUnit, all_neumann());
    ModelParams params;
    params.gamma = 1.1;
    params.tau = 0.6;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.C_cell.assign(mesh.n_cells(), 1.0);
    params.prepare(mesh);
    BoundaryData bd;

    State prev = State::zero(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        prev.n0.cell(k) = 1.0;
        prev.ns.set_cell_vec(k, {0.2, -0.1, 0.4});
    }
    SolverConfig cfg;
    StepResult step = newton_step_solve(mesh, prev, params, bd, cfg);
    REQUIRE(step.ok);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const Vec3 nk = step.state.ns.cell_vec(k);
        const Vec3 lhs = (1.0 / params.dt + 1.0 / params.tau) * nk -
                         2.0 * params.gamma * cross(nk, params.m_cell[k]);
        const Vec3 rhs = (1.0 / params.dt) * prev.ns.cell_vec(k);
        CHECK(lhs.x == doctest::Approx(rhs.x).epsilon(1e-11));
        CHECK(lhs.y == doctest::Approx(rhs.y).epsilon(1e-11));
        CHECK(lhs.z == doctest::Approx(rhs.z).epsilon(1e-11));
        // Spatial constancy is preserved.
        CHECK(norm(nk - step.state.ns.cell_vec(0)) <= 1e-13);
    }
}

TEST_CASE("picard mu formula") {
    Mesh mesh = build_rect_mesh(2, 2, kUnit, dirichlet_left_right(kUnit));
    ModelParams params;
    params.D = 1.0;
    params.p = 0.9;
    params.lambda2 = 1.0;
    params.dt = 0.05;
    params.C_cell.assign(mesh.n_cells(), 1.0);
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);
    CHECK(picard_mu(params) == doctest::Approx(0.05 / 0.19).epsilon(1e-12));
    CHECK(picard_mu(params) == doctest::Approx(0.263158).epsilon(1e-6));

    params.C_cell.assign(mesh.n_cells(), 0.0);
    CHECK(picard_mu(params) == 0.0);
}

TEST_CASE("newton and picard steady states agree") {
    Doped dp = doped_problem(4, 4);
    SolverConfig cfg;
    cfg.newton_tol = 1e-12;
    cfg.picard_tol = 1e-12;
    cfg.steady_threshold = 1e-11;
    cfg.max_steps = 4000;

    cfg.kind = SolverKind::Newton;
    Trajectory tn = time_march(dp.mesh, dp.initial, dp.params, dp.boundary, cfg, dp.diag);
    REQUIRE(tn.reason == StopReason::Steady);

    cfg.kind = SolverKind::Picard;
    Trajectory tp = time_march(dp.mesh, dp.initial, dp.params, dp.boundary, cfg, dp.diag);
    REQUIRE(tp.reason == StopReason::Steady);

    // A few more fixed steps contract both marches onto the fixed point to
    // solver precision before comparing.
    State sn = tn.final_state, sp = tp.final_state;
    for (int k = 0; k < 40; ++k) {
        StepResult a = newton_step_solve(dp.mesh, sn, dp.params, dp.boundary, cfg);
        REQUIRE(a.ok);
        sn = a.state;
        StepResult b = picard_solve(dp.mesh, sp, dp.params, dp.boundary, cfg);
        REQUIRE(b.ok);
        sp = b.state;
    }
    CHECK(state_max_diff(sn, sp) <= 10.0 * cfg.picard_tol);

    // Either converged state drives the residual below tolerance.
    std::vector<double> rn = assemble_residual(dp.mesh, sn, sn, dp.params, dp.boundary);
    std::vector<double> rp = assemble_residual(dp.mesh, sp, sp, dp.params, dp.boundary);
    CHECK(inf_norm(rn) <= 10.0 * cfg.newton_tol);
    CHECK(inf_norm(rp) <= 10.0 * cfg.newton_tol);
}

TEST_CASE("time march stops immediately at equilibrium") {
    Mesh mesh = build_rect_mesh(6, 4, kUnit, dirichlet_left_right(kUnit));
    ModelParams params;
    params.lambda2 = 0.8;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);
    BoundaryData bd;
    bd.n_trace.assign(mesh.n_dirichlet(), 1.5);
    bd.V_trace.assign(mesh.n_dirichlet(), -2.0);
    State eq = equilibrium_state(mesh, params, bd);

    SolverConfig cfg;
    DiagnosticsSetup diag;
    InitialData init{eq.n0, eq.ns};
    diag.bounds = make_bound_constants(init, bd, params, mesh);
    Trajectory traj = time_march(mesh, eq, params, bd, cfg, diag);
    CHECK(traj.reason == StopReason::Steady);
    CHECK(traj.steps == 1);
}

TEST_CASE("pure relaxation trajectory decays geometrically") {
    const double tau = 0.3, dt = 0.05;
    OneCell oc = one_cell(0.0, tau, dt, {0.0, 0.0, 0.4});
    SolverConfig cfg;
    cfg.steady_threshold = 0.0;
    cfg.max_steps = 30;
    cfg.keep_states = true;
    DiagnosticsSetup diag;
    InitialData init{oc.state.n0, oc.state.ns};
    diag.bounds = make_bound_constants(init, oc.boundary, oc.params, oc.mesh);

    Trajectory traj = time_march(oc.mesh, oc.state, oc.params, oc.boundary, cfg, diag);
    REQUIRE(traj.reason == StopReason::MaxSteps);
    REQUIRE(traj.states.size() == 31);
    for (int k = 0; k <= 30; ++k)
        CHECK(traj.states[k].ns.cell(0, 2) ==
              doctest::Approx(0.4 * std::pow(1.0 + dt / tau, -k)).epsilon(1e-11));
}

TEST_CASE("deterministic replay") {
    Doped dp = doped_problem(4, 4);
    SolverConfig cfg;
    cfg.max_steps = 25;
    cfg.steady_threshold = 0.0;

    Trajectory a = time_march(dp.mesh, dp.initial, dp.params, dp.boundary, cfg, dp.diag);
    Trajectory b = time_march(dp.mesh, dp.initial, dp.params, dp.boundary, cfg, dp.diag);
    REQUIRE(a.steps == b.steps);
    CHECK(state_max_diff(a.final_state, b.final_state) == 0.0);
    for (size_t i = 0; i < a.records.size(); ++i) {
        const bool same_energy =
            a.records[i].energy == b.records[i].energy ||
            (std::isnan(a.records[i].energy) && std::isnan(b.records[i].energy));
        CHECK(same_energy);
        CHECK(a.records[i].max_nperp == b.records[i].max_nperp);
    }
}

TEST_CASE("solver failure is reported with a partial trajectory") {
    // All-Neumann problem whose doping mass does not match the initial
    // charge: the Poisson block is unsolvable and the step must fail.
    Mesh mesh = build_rect_mesh(2, 2, kUnit, all_neumann());
    ModelParams params;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.C_cell.assign(mesh.n_cells(), 0.0);
    params.prepare(mesh);
    BoundaryData bd;
    State init = State::zero(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) init.n0.cell(k) = 1.0;

    SolverConfig cfg;
    cfg.picard_fallback = false;
    cfg.max_newton_iters = 8;
    DiagnosticsSetup diag;
    InitialData id{init.n0, init.ns};
    diag.bounds = make_bound_constants(id, bd, params, mesh);
    Trajectory traj = time_march(mesh, init, params, bd, cfg, diag);
    CHECK(traj.reason == StopReason::SolverFailure);
    CHECK(traj.steps == 0);
    CHECK(!traj.message.empty());
}
