#include <doctest.h>

#include <cmath>
#include <random>

#include "spinfv/diagnostics.hpp"
#include "spinfv/poisson.hpp"
#include "spinfv/solver.hpp"

using namespace spinfv;

namespace {
const Rect kUnit{0, 0, 1, 1};
}

TEST_CASE("up/down projection and round trip") {
    Mesh mesh = build_rect_mesh(3, 2, kUnit, dirichlet_left_right(kUnit));
    std::vector<Vec3> m(mesh.n_cells(), Vec3{0, 0, 1});

    MeshField n0 = MeshField::scalar(mesh, 2.0);
    MeshField ns = MeshField::vector3(mesh);
    auto [np0, nm0] = project_updown(n0, ns, m, mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        CHECK(np0.cell(k) == doctest::Approx(1.0));
        CHECK(nm0.cell(k) == doctest::Approx(1.0));
    }

    for (int k = 0; k < mesh.n_cells(); ++k) ns.set_cell_vec(k, {0, 0, 1});
    auto [np1, nm1] = project_updown(n0, ns, m, mesh);
    CHECK(np1.cell(0) == doctest::Approx(2.0));
    CHECK(nm1.cell(0) == doctest::Approx(0.0));

    // Random round trip reconstructs n0 and ns.m exactly.
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> mr(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k) {
        Vec3 v{u(rng), u(rng), u(rng)};
        mr[k] = (1.0 / norm(v)) * v;
        n0.cell(k) = 2.0 + u(rng);
        ns.set_cell_vec(k, {u(rng), u(rng), u(rng)});
    }
    auto [np, nm] = project_updown(n0, ns, mr, mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        CHECK(np.cell(k) + nm.cell(k) == doctest::Approx(n0.cell(k)).epsilon(1e-15));
        CHECK(0.5 * (np.cell(k) - nm.cell(k)) ==
              doctest::Approx(dot(ns.cell_vec(k), mr[k])).epsilon(1e-15));
    }
}

TEST_CASE("perpendicular projection") {
    Mesh mesh = build_rect_mesh(2, 1, kUnit, all_neumann());
    MeshField ns = MeshField::vector3(mesh);
    ns.set_cell_vec(0, {1, 1, 1});
    ns.set_cell_vec(1, {0.3, -0.4, 0.5});

    std::vector<Vec3> m = {{0, 0, 1}, {0, 0, 0}};
    MeshField perp = project_perp(ns, m, mesh);
    CHECK(perp.cell(0, 0) == doctest::Approx(1.0));
    CHECK(perp.cell(0, 1) == doctest::Approx(1.0));
    CHECK(perp.cell(0, 2) == doctest::Approx(0.0));
    // m = 0 leaves the vector untouched.
    CHECK(norm(perp.cell_vec(1) - ns.cell_vec(1)) == 0.0);

    // Parallel input projects to zero, and perp stays orthogonal to m.
    std::vector<Vec3> mz(mesh.n_cells(), Vec3{0, 0, 1});
    ns.set_cell_vec(0, {0, 0, -2.3});
    MeshField perp2 = project_perp(ns, mz, mesh);
    CHECK(norm(perp2.cell_vec(0)) == doctest::Approx(0.0));
    CHECK(dot(perp2.cell_vec(1), mz[1]) == doctest::Approx(0.0));

    // ns = nperp + (ns.m) m exactly.
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const Vec3 rebuilt = perp2.cell_vec(k) + dot(ns.cell_vec(k), mz[k]) * mz[k];
        CHECK(norm(rebuilt - ns.cell_vec(k)) <= 1e-15);
    }
}

TEST_CASE("free energy values") {
    Mesh mesh = build_rect_mesh(2, 2, kUnit, dirichlet_left_right(kUnit));
    std::vector<Vec3> m(mesh.n_cells(), Vec3{0, 0, 1});

    State s = State::zero(mesh);
    MeshField nd = MeshField::scalar(mesh, 2.0);
    MeshField vd = MeshField::scalar(mesh, 0.0);
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) nd.trace(slot) = 2.0;

    // n_pm = n^D/2 and V = V^D give E = 0.
    for (int k = 0; k < mesh.n_cells(); ++k) s.n0.cell(k) = 2.0;
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) s.n0.trace(slot) = 2.0;
    CHECK(free_energy(mesh, s, m, nd, vd, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

    // n_pm = 2 against n^D/2 = 1 on unit total measure: 2 (2 log 2 - 1).
    for (int k = 0; k < mesh.n_cells(); ++k) s.n0.cell(k) = 4.0;
    CHECK(free_energy(mesh, s, m, nd, vd, 1.0) ==
          doctest::Approx(2.0 * (2.0 * std::log(2.0) - 1.0)).epsilon(1e-13));
    CHECK(free_energy(mesh, s, m, nd, vd, 1.0) == doctest::Approx(0.772589).epsilon(1e-6));

    // Electric part on a 2x1 mesh with a known transmissibility.
    Mesh mesh2 = build_rect_mesh(2, 1, kUnit, all_neumann());
    std::vector<Vec3> m2(mesh2.n_cells(), Vec3{0, 0, 1});
    State s2 = State::zero(mesh2);
    s2.n0.cell(0) = s2.n0.cell(1) = 2.0;
    s2.V.cell(0) = 0.3;
    s2.V.cell(1) = -0.1;
    MeshField nd2 = MeshField::scalar(mesh2, 2.0);
    MeshField vd2 = MeshField::scalar(mesh2, 0.0);
    const double lambda2 = 0.7;
    // Single interior edge: (lambda^2/2) tau (D(V - V^D))^2 = 0.35 * 2 * 0.16.
    CHECK(free_energy(mesh2, s2, m2, nd2, vd2, lambda2) ==
          doctest::Approx(0.5 * lambda2 * 2.0 * 0.16).epsilon(1e-13));

    // Negative spin-up/down densities are rejected.
    State bad = s;
    bad.ns.set_cell_vec(0, {0, 0, 10.0});
    CHECK_THROWS(free_energy(mesh, bad, m, nd, vd, 1.0));
}

TEST_CASE("dissipation rate") {
    Mesh mesh = build_rect_mesh(2, 1, kUnit, all_neumann());
    ModelParams params;
    params.D = 1.0;
    params.p = 0.0;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);

    // n_pm = (1, 1/e), V = (0, 1): log n_pm + V is constant, zero rate.
    State s = State::zero(mesh);
    s.n0.cell(0) = 2.0;
    s.n0.cell(1) = 2.0 / std::exp(1.0);
    s.V.cell(0) = 0.0;
    s.V.cell(1) = 1.0;
    CHECK(dissipation_rate(mesh, s, params) == doctest::Approx(0.0).epsilon(1e-15));

    // Perturbed potential: both spin species contribute
    // (dt/2) * 2 * D tau min(1, 1/e) * 1^2 = dt * D * tau * 1/e with tau = 2.
    s.V.cell(1) = 2.0;
    CHECK(dissipation_rate(mesh, s, params) ==
          doctest::Approx(params.dt * 2.0 * std::exp(-1.0)).epsilon(1e-13));

    // Nonnegative on random states.
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        State r = State::zero(mesh);
        for (int k = 0; k < mesh.n_cells(); ++k) {
            r.n0.cell(k) = 2.0 * u(rng);
            r.V.cell(k) = u(rng) - 1.0;
        }
        CHECK(dissipation_rate(mesh, r, params) >= 0.0);
    }
}

TEST_CASE("bound monitor") {
    Mesh mesh = build_rect_mesh(2, 2, kUnit, dirichlet_left_right(kUnit));
    ModelParams params;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);

    BoundConstants bc;
    bc.M0 = 1.0;
    bc.alpha = 0.0;
    bc.dt = params.dt;

    State s = State::zero(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) s.n0.cell(k) = 1.5;
    BoundFlags flags = bound_monitor(mesh, s, params, bc, 3);
    CHECK(flags.positivity_ok);
    CHECK(flags.upper_ok);
    CHECK(flags.perp_ok);
    CHECK(flags.applicable);

    s.n0.cell(1) = -1e-6;
    flags = bound_monitor(mesh, s, params, bc, 3);
    CHECK(!flags.positivity_ok);

    s.n0.cell(1) = 2.5; // n_pm = 1.25 > M0
    flags = bound_monitor(mesh, s, params, bc, 3);
    CHECK(!flags.upper_ok);

    s.n0.cell(1) = 1.0;
    s.ns.set_cell_vec(1, {1.2, 0, 0});
    flags = bound_monitor(mesh, s, params, bc, 3);
    CHECK(!flags.perp_ok);

    // alpha dt >= 1 marks the k-dependent bounds inapplicable.
    bc.alpha = 40.0;
    flags = bound_monitor(mesh, s, params, bc, 3);
    CHECK(!flags.applicable);
}

TEST_CASE("contact currents") {
    const Rect dom{0, 0, 1, 1};
    Mesh mesh = build_rect_mesh(2, 1, dom, dirichlet_left_right(dom));
    ModelParams params;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);

    BoundaryData bd;
    bd.n_trace.assign(mesh.n_dirichlet(), 1.0);
    bd.V_trace.assign(mesh.n_dirichlet(), 0.0);

    std::vector<int> left, right;
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        const Edge& e = mesh.edges[mesh.dirichlet_edges[slot]];
        (e.midpoint.x < 0.5 ? left : right).push_back(e.id);
    }

    // Equilibrium carries no current.
    State eq = equilibrium_state(mesh, params, bd);
    EdgeFluxSet f0 = compute_edge_fluxes(mesh, eq, params);
    CHECK(std::abs(contact_current(mesh, f0, left)) <= 1e-13);

    // Biased toy state: the contact current equals the single-edge SG flux.
    State s = eq;
    s.V.cell(0) += 0.2;
    EdgeFluxSet f1 = compute_edge_fluxes(mesh, s, params);
    const Edge& le = mesh.edges[left[0]];
    const double dv = s.V.trace(le.dirichlet_slot) - s.V.cell(0);
    const double expect = params.edge.D[le.id] * le.tau *
                          (bernoulli(dv) * s.n0.cell(0) -
                           bernoulli(-dv) * s.n0.trace(le.dirichlet_slot));
    CHECK(contact_current(mesh, f1, left) == doctest::Approx(expect).epsilon(1e-13));

    // Non-Dirichlet edges are rejected.
    std::vector<int> bogus = {mesh.cell_edges[0][2]};
    while (mesh.edges[bogus[0]].kind == EdgeKind::Dirichlet) bogus[0]++;
    CHECK_THROWS(contact_current(mesh, f1, bogus));
}

TEST_CASE("steady-state contact currents balance") {
    const Rect dom{0, 0, 1, 1};
    Mesh mesh = build_rect_mesh(6, 4, dom, dirichlet_left_right(dom));
    ModelParams params;
    params.p = 0.3;
    params.gamma = 0.5;
    params.tau = 1.5;
    params.lambda2 = 1.0;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.C_cell.assign(mesh.n_cells(), 0.5);
    params.prepare(mesh);

    BoundaryData bd;
    bd.n_trace.assign(mesh.n_dirichlet(), 1.0);
    bd.V_trace.assign(mesh.n_dirichlet(), 0.0);
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot)
        if (mesh.edges[mesh.dirichlet_edges[slot]].midpoint.x > 0.5)
            bd.V_trace[slot] = 2.0;

    InitialData init;
    init.n0 = MeshField::scalar(mesh, 1.0);
    init.ns = MeshField::vector3(mesh);
    State initial = make_state(mesh, init, bd);
    initial.V = solve_poisson(mesh, initial.n0, params.C_cell, params.lambda2, bd.V_trace);

    SolverConfig cfg;
    cfg.newton_tol = 1e-12;
    cfg.steady_threshold = 1e-12;
    cfg.max_steps = 5000;
    DiagnosticsSetup diag;
    diag.bounds = make_bound_constants(init, bd, params, mesh);
    Trajectory traj = time_march(mesh, initial, params, bd, cfg, diag);
    REQUIRE(traj.reason == StopReason::Steady);

    EdgeFluxSet fluxes = compute_edge_fluxes(mesh, traj.final_state, params);
    std::vector<int> left, right;
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        const Edge& e = mesh.edges[mesh.dirichlet_edges[slot]];
        (e.midpoint.x < 0.5 ? left : right).push_back(e.id);
    }
    const double il = contact_current(mesh, fluxes, left);
    const double ir = contact_current(mesh, fluxes, right);
    const double imax = std::max(std::abs(il), std::abs(ir));
    CHECK(imax > 0.0);
    CHECK(std::abs(il + ir) <= 1e-8 * imax);
}

TEST_CASE("record assembles extrema, flags, and currents") {
    const Rect dom{0, 0, 1, 1};
    Mesh mesh = build_rect_mesh(3, 2, dom, dirichlet_left_right(dom));
    ModelParams params;
    params.dt = 0.05;
    params.m_cell.assign(mesh.n_cells(), Vec3{0, 0, 1});
    params.prepare(mesh);
    BoundaryData bd;
    bd.n_trace.assign(mesh.n_dirichlet(), 2.0);
    bd.V_trace.assign(mesh.n_dirichlet(), 0.0);
    State eq = equilibrium_state(mesh, params, bd);

    DiagnosticsSetup setup;
    setup.bounds.M0 = 1.5;
    setup.bounds.alpha = 0.0;
    setup.bounds.dt = params.dt;
    setup.nD_ref = eq.n0;
    setup.VD_ref = eq.V;
    ContactSet all{"all", {}};
    for (int eid : mesh.dirichlet_edges) all.edges.push_back(eid);
    setup.contacts.push_back(all);

    DiagnosticsRecord rec = compute_record(mesh, eq, params, setup, 0,
                                           std::numeric_limits<double>::quiet_NaN());
    CHECK(rec.energy == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rec.dissipation == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rec.min_np > 0.0);
    CHECK(rec.flags.positivity_ok);
    CHECK(rec.flag_bits(false) == 0);
    CHECK(rec.flag_bits(true) == 16);
    REQUIRE(rec.contact_currents.size() == 1);
    CHECK(std::abs(rec.contact_currents[0]) <= 1e-12);
}
