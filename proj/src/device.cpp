#include "spinfv/device.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "spinfv/io.hpp"
#include "spinfv/poisson.hpp"

namespace spinfv {

std::pair<ModelParams, Scales> nondimensionalize(const DeviceSpec& spec) {
    if (!(spec.length > 0.0) || !(spec.height > 0.0) || !(spec.diffusion > 0.0) ||
        !(spec.tau_sf > 0.0) || !(spec.temperature > 0.0) || !(spec.doping_high > 0.0))
        throw std::invalid_argument("nondimensionalize: spec must be physically positive");

    Scales s;
    s.length = spec.length;
    s.density = spec.doping_high;
    s.potential = phys::kB * spec.temperature / phys::q;
    s.time = spec.length * spec.length / spec.diffusion;
    s.current = phys::q * spec.diffusion * spec.doping_high;
    s.lambda_classical = std::sqrt(phys::eps0 * spec.epsilon_r * phys::kB * spec.temperature /
                                   (phys::q * phys::q * spec.doping_high * spec.length * spec.length));

    ModelParams p;
    p.D = 1.0;
    p.p = spec.polarization;
    p.eta = std::sqrt(1.0 - p.p * p.p);
    p.tau = spec.tau_sf / s.time;
    p.lambda2 = spec.lambda2;
    p.gamma = spec.gamma_scaled > 0.0 ? spec.gamma_scaled : s.time / spec.tau_sf;
    p.dt = 0.05;
    return {p, s};
}

namespace {

struct Geometry {
    double hs;        // scaled height
    double doped_x;   // scaled source/drain region length
    double gate_x0;   // scaled gate span
    double gate_x1;
};

Geometry scaled_geometry(const DeviceSpec& spec) {
    Geometry g;
    g.hs = spec.height / spec.length;
    g.doped_x = spec.contact_length / spec.length;
    g.gate_x0 = 0.5 - 0.5 * spec.gate_length / spec.length;
    g.gate_x1 = 0.5 + 0.5 * spec.gate_length / spec.length;
    return g;
}

void require_aligned(double x, int nx, const char* what) {
    const double cells = x * nx;
    if (std::abs(cells - std::round(cells)) > 1e-9 * nx)
        throw std::invalid_argument(std::string("build_mesfet: ") + what +
                                    " does not align with the mesh (adjust nx)");
}

} // namespace

ProblemSetup build_mesfet(const DeviceSpec& spec, const BiasPoint& bias, int nx, int ny) {
    auto [params, scales] = nondimensionalize(spec);
    const Geometry g = scaled_geometry(spec);
    if (nx < 2 || ny < 1) throw std::invalid_argument("build_mesfet: mesh too coarse");
    require_aligned(g.gate_x0, nx, "gate segment start");
    require_aligned(g.gate_x1, nx, "gate segment end");

    const double tol = 1e-9;
    const Rect domain{0.0, 0.0, 1.0, g.hs};
    auto classify = [g, tol](Vec2 mid) {
        if (mid.x < tol || mid.x > 1.0 - tol) return EdgeKind::Dirichlet; // source/drain
        if ((mid.y < tol || mid.y > g.hs - tol) && mid.x > g.gate_x0 + tol &&
            mid.x < g.gate_x1 - tol)
            return EdgeKind::Dirichlet; // gates
        return EdgeKind::Neumann;
    };

    ProblemSetup setup;
    setup.scales = scales;
    setup.mesh = build_rect_mesh(nx, ny, domain, classify);
    const Mesh& mesh = setup.mesh;

    // Cell fields: doping and polarization follow the doped regions, the
    // magnetization covers the outer thirds.
    params.D_cell.assign(mesh.n_cells(), 1.0);
    params.p_cell.resize(mesh.n_cells());
    params.m_cell.resize(mesh.n_cells());
    params.C_cell.resize(mesh.n_cells());
    const double c_channel = spec.doping_channel / spec.doping_high;
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double x = mesh.cells[k].center.x;
        const bool doped = x < g.doped_x || x > 1.0 - g.doped_x;
        params.C_cell[k] = doped ? 1.0 : c_channel;
        params.p_cell[k] = doped ? spec.polarization : 0.0;
        const bool magnetic = x < 1.0 / 3.0 || x >= 2.0 / 3.0;
        params.m_cell[k] = magnetic ? Vec3{0.0, 0.0, 1.0} : Vec3{0.0, 0.0, 0.0};
    }
    params.prepare(mesh);
    setup.params = params;

    // Contact traces.
    const double vt = scales.potential;
    const double gate_density = (bias.gate == GateState::Open ? spec.gate_density_open
                                                              : spec.gate_density_closed) /
                                spec.doping_high;
    const double gate_potential = (spec.barrier_V + bias.gate_V) / vt;
    const double drain_potential = bias.drain_V / vt;

    setup.boundary.n_trace.assign(mesh.n_dirichlet(), 0.0);
    setup.boundary.V_trace.assign(mesh.n_dirichlet(), 0.0);
    ContactSet source{"source", {}}, drain{"drain", {}};
    ContactSet gate_bottom{"gate_bottom", {}}, gate_top{"gate_top", {}};
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        const Edge& e = mesh.edges[mesh.dirichlet_edges[slot]];
        if (e.midpoint.x < tol) {
            setup.boundary.n_trace[slot] = 1.0;
            setup.boundary.V_trace[slot] = 0.0;
            source.edges.push_back(e.id);
        } else if (e.midpoint.x > 1.0 - tol) {
            setup.boundary.n_trace[slot] = 1.0;
            setup.boundary.V_trace[slot] = drain_potential;
            drain.edges.push_back(e.id);
        } else {
            setup.boundary.n_trace[slot] = gate_density;
            setup.boundary.V_trace[slot] = gate_potential;
            (e.midpoint.y < tol ? gate_bottom : gate_top).edges.push_back(e.id);
        }
    }
    setup.contacts = {source, drain, gate_bottom, gate_top};

    // Initial data: local neutrality, zero spin, consistent potential.
    setup.initial.n0 = MeshField::scalar(mesh);
    setup.initial.ns = MeshField::vector3(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) setup.initial.n0.cell(k) = params.C_cell[k];
    setup.initial_state = make_state(mesh, setup.initial, setup.boundary);
    setup.initial_state.V = solve_poisson(mesh, setup.initial_state.n0, params.C_cell,
                                          params.lambda2, setup.boundary.V_trace);

    setup.diag.bounds = make_bound_constants(setup.initial, setup.boundary, params, mesh);
    setup.diag.within_hypotheses = check_constraints(params).within_hypotheses();
    setup.diag.contacts = setup.contacts;
    setup.diag.current_scale = scales.current;
    // Declared energy reference for general (biased) runs: initial data and
    // initial potential. Biased contacts sit outside the dissipation
    // hypotheses, which within_hypotheses already records.
    setup.diag.nD_ref = setup.initial_state.n0;
    setup.diag.VD_ref = setup.initial_state.V;
    return setup;
}

namespace {

std::vector<std::string> contact_names(const ProblemSetup& setup) {
    std::vector<std::string> names;
    for (const ContactSet& c : setup.contacts) names.push_back(c.name);
    return names;
}

std::string step_file(const std::string& dir, int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fields_k%04d.csv", k);
    return dir + "/" + buf;
}

double drain_current(const ProblemSetup& setup, const State& state, Exec exec) {
    const EdgeFluxSet fluxes = compute_edge_fluxes(setup.mesh, state, setup.params, exec);
    for (const ContactSet& c : setup.contacts)
        if (c.name == "drain")
            return setup.scales.current * contact_current(setup.mesh, fluxes, c.edges);
    return 0.0;
}

} // namespace

Trajectory run_steady(const ProblemSetup& setup, const SolverConfig& cfg,
                      const std::string& out_dir) {
    DiagnosticsSetup diag = setup.diag;
    diag.energy_slack = 10.0 * cfg.newton_tol;

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    Trajectory traj = time_march(setup.mesh, setup.initial_state, setup.params,
                                 setup.boundary, cfg, diag);
    if (!out_dir.empty()) {
        write_fields_csv(step_file(out_dir, 0), setup.mesh, setup.initial_state);
        write_fields_csv(step_file(out_dir, traj.steps), setup.mesh, traj.final_state);
        write_diagnostics_csv(out_dir + "/diagnostics.csv", traj.records,
                              contact_names(setup), !setup.diag.within_hypotheses);
    }
    return traj;
}

std::vector<IVRow> iv_sweep(const DeviceSpec& spec,
                            const std::vector<double>& drain_voltages,
                            const std::vector<BiasPoint>& gate_points, int nx, int ny,
                            const SolverConfig& cfg, const std::string& out_dir) {
    if (drain_voltages.empty() || gate_points.empty())
        throw std::invalid_argument("iv_sweep: voltage lists must be nonempty");

    std::vector<IVRow> rows;
    for (const BiasPoint& gate : gate_points) {
        State warm;
        bool have_warm = false;
        for (double vd : drain_voltages) {
            BiasPoint bias = gate;
            bias.drain_V = vd;
            ProblemSetup setup = build_mesfet(spec, bias, nx, ny);
            if (have_warm) {
                // Continue from the previous steady state under the new traces.
                State start = setup.initial_state;
                start.n0.cell_data() = warm.n0.cell_data();
                start.ns.cell_data() = warm.ns.cell_data();
                start.V.cell_data() = warm.V.cell_data();
                setup.initial_state = start;
            }
            DiagnosticsSetup diag = setup.diag;
            diag.energy_slack = 10.0 * cfg.newton_tol;
            Trajectory traj = time_march(setup.mesh, setup.initial_state, setup.params,
                                         setup.boundary, cfg, diag);
            IVRow row;
            row.gate_V = bias.gate_V;
            row.drain_V = vd;
            row.steps = traj.steps;
            row.ok = traj.reason == StopReason::Steady;
            row.message = traj.message;
            row.final_energy = traj.records.back().energy;
            row.current = drain_current(setup, traj.final_state, cfg.exec);
            rows.push_back(row);
            if (row.ok) {
                warm = traj.final_state;
                have_warm = true;
            }
        }
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::vector<std::vector<double>> table;
        for (const IVRow& r : rows)
            table.push_back({r.gate_V, r.drain_V, r.current, double(r.steps),
                             r.final_energy, r.ok ? 1.0 : 0.0});
        write_table_csv(out_dir + "/iv.csv",
                        "V_G,V_D,I_A_per_m,steps,E_final,converged", table);
    }
    return rows;
}

std::vector<TransientSample> transient_switch(const DeviceSpec& spec, double drain_V,
                                              int nx, int ny, const SolverConfig& cfg,
                                              const std::string& out_dir) {
    const BiasPoint open{drain_V, 0.0, GateState::Open};
    ProblemSetup setup_open = build_mesfet(spec, open, nx, ny);
    Trajectory steady = run_steady(setup_open, cfg);
    if (steady.reason != StopReason::Steady)
        throw std::runtime_error("transient_switch: open-state steady solve failed: " +
                                 steady.message);

    BiasPoint closed{drain_V, spec.closed_gate_V, GateState::Closed};
    ProblemSetup setup = build_mesfet(spec, closed, nx, ny);
    State start = setup.initial_state;
    start.n0.cell_data() = steady.final_state.n0.cell_data();
    start.ns.cell_data() = steady.final_state.ns.cell_data();
    start.V.cell_data() = steady.final_state.V.cell_data();
    setup.initial_state = start;

    const double ps = setup.scales.time * 1e12 * setup.params.dt;
    std::vector<TransientSample> series;
    series.push_back({0, 0.0, drain_current(setup_open, steady.final_state, cfg.exec)});

    DiagnosticsSetup diag = setup.diag;
    diag.energy_slack = 10.0 * cfg.newton_tol;
    StepHook hook = [&](int k, const State& s, const DiagnosticsRecord&) {
        if (k > 0) series.push_back({k, k * ps, drain_current(setup, s, cfg.exec)});
    };
    Trajectory traj = time_march(setup.mesh, setup.initial_state, setup.params,
                                 setup.boundary, cfg, diag, hook);
    if (traj.reason == StopReason::SolverFailure)
        throw std::runtime_error("transient_switch: " + traj.message);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::vector<std::vector<double>> table;
        for (const TransientSample& s : series)
            table.push_back({double(s.step), s.time_ps, s.drain_current});
        write_table_csv(out_dir + "/transient.csv", "k,t_ps,I_drain_A_per_m", table);
    }
    return series;
}

std::vector<EnergySample> energy_decay_run(const DeviceSpec& spec, int nx, int ny,
                                           const SolverConfig& cfg,
                                           const std::string& out_dir) {
    // Zero bias with the gate density on the equilibrium characteristic:
    // log n^D + V^D equals the source value on every contact.
    DeviceSpec eq_spec = spec;
    auto [params0, scales0] = nondimensionalize(spec);
    const double gate_scaled = std::exp(-spec.barrier_V / scales0.potential);
    eq_spec.gate_density_open = gate_scaled * spec.doping_high;

    const BiasPoint bias{0.0, 0.0, GateState::Open};
    ProblemSetup setup = build_mesfet(eq_spec, bias, nx, ny);

    const State equilibrium = equilibrium_state(setup.mesh, setup.params, setup.boundary);
    DiagnosticsSetup diag = setup.diag;
    diag.nD_ref = equilibrium.n0;
    diag.VD_ref = equilibrium.V;
    diag.energy_slack = 10.0 * cfg.newton_tol;

    Trajectory traj = time_march(setup.mesh, setup.initial_state, setup.params,
                                 setup.boundary, cfg, diag);
    if (traj.reason == StopReason::SolverFailure)
        throw std::runtime_error("energy_decay_run: " + traj.message);

    const double ps = setup.scales.time * 1e12 * setup.params.dt;
    std::vector<EnergySample> series;
    for (const DiagnosticsRecord& r : traj.records)
        series.push_back({r.step, r.step * ps, r.energy});

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::vector<std::vector<double>> table;
        for (const EnergySample& s : series)
            table.push_back({double(s.step), s.time_ps, s.energy});
        write_table_csv(out_dir + "/energy.csv", "k,t_ps,E", table);
    }
    return series;
}

} // namespace spinfv
