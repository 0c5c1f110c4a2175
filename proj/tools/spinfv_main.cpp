#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "spinfv/config.hpp"
#include "spinfv/device.hpp"
#include "spinfv/io.hpp"
#include "spinfv/mesh_io.hpp"

namespace {

using namespace spinfv;

struct CommonFlags {
    std::string out_dir = "out";
    std::string solver;
    double dt = 0.0;
    double threshold = 0.0;
    unsigned seed = 0; // reserved for randomized test drivers
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--solver", flags.solver, "Step solver: newton or picard")
        ->check(CLI::IsMember({"newton", "picard"}));
    cmd->add_option("--dt", flags.dt, "Scaled time step override");
    cmd->add_option("--threshold", flags.threshold, "Steady-state threshold override");
    cmd->add_option("--seed", flags.seed, "RNG seed (randomized tests only)");
}

RunConfig load_config(const std::string& path, const CommonFlags& flags) {
    RunConfig rc = RunConfig::load(path);
    if (flags.solver == "newton") rc.solver.kind = SolverKind::Newton;
    if (flags.solver == "picard") rc.solver.kind = SolverKind::Picard;
    if (flags.dt > 0.0) rc.dt = flags.dt;
    if (flags.threshold > 0.0) rc.solver.steady_threshold = flags.threshold;
    return rc;
}

void report_scales(const ProblemSetup& setup) {
    std::printf("scales: length %.6g m, density %.6g m^-3, potential %.6g V, "
                "time %.6g s, current %.6g A/m\n",
                setup.scales.length, setup.scales.density, setup.scales.potential,
                setup.scales.time, setup.scales.current);
    std::printf("lambda_D = %.6g (classical formula value %.6g)\n",
                std::sqrt(setup.params.lambda2), setup.scales.lambda_classical);
    std::printf("hypothesis check: %s\n", check_constraints(setup.params).summary().c_str());
}

int cmd_check_mesh(const std::string& path, double xi_min, double tol) {
    const Mesh mesh = read_mesh_file(path);
    const AdmissibilityReport rep = check_admissibility(mesh, xi_min, tol);
    std::printf("%d cells, %d edges (%d Dirichlet)\n", mesh.n_cells(), mesh.n_edges(),
                mesh.n_dirichlet());
    std::printf("%s\n", rep.summary().c_str());
    return rep.pass() ? 0 : 1;
}

int cmd_run(const std::string& config_path, const CommonFlags& flags) {
    RunConfig rc = load_config(config_path, flags);
    if (rc.mode == "switch") {
        SolverConfig cfg = rc.solver;
        auto series = transient_switch(rc.device, rc.bias.drain_V, rc.nx, rc.ny, cfg,
                                       flags.out_dir);
        std::printf("transient: %zu samples, I(0) = %.6g A/m, I(end) = %.6g A/m\n",
                    series.size(), series.front().drain_current,
                    series.back().drain_current);
        return 0;
    }

    ProblemSetup setup = build_mesfet(rc.device, rc.bias, rc.nx, rc.ny);
    setup.params.dt = rc.dt;
    report_scales(setup);
    Trajectory traj = run_steady(setup, rc.solver, flags.out_dir);
    const char* reason = traj.reason == StopReason::Steady      ? "steady"
                         : traj.reason == StopReason::MaxSteps ? "max-steps"
                                                               : "solver-failure";
    std::printf("run: %d steps, stop reason %s\n", traj.steps, reason);
    if (traj.reason == StopReason::SolverFailure) {
        std::printf("  %s\n", traj.message.c_str());
        return 1;
    }
    for (size_t i = 0; i < setup.contacts.size(); ++i)
        std::printf("  current[%s] = %.8g A/m\n", setup.contacts[i].name.c_str(),
                    traj.records.back().contact_currents[i]);
    return 0;
}

int cmd_sweep(const std::string& config_path, const CommonFlags& flags) {
    RunConfig rc = load_config(config_path, flags);
    std::vector<BiasPoint> gates;
    for (double vg : rc.sweep_gate_open) gates.push_back({0.0, vg, GateState::Open});
    for (double vg : rc.sweep_gate_closed) gates.push_back({0.0, vg, GateState::Closed});
    SolverConfig cfg = rc.solver;
    auto rows = iv_sweep(rc.device, rc.sweep_drain, gates, rc.nx, rc.ny, cfg, flags.out_dir);
    std::printf("V_G        V_D        I [A/m]       steps  ok\n");
    for (const IVRow& r : rows)
        std::printf("%-10.3g %-10.3g %-13.6g %-6d %s\n", r.gate_V, r.drain_V, r.current,
                    r.steps, r.ok ? "yes" : r.message.c_str());
    return 0;
}

int cmd_energy(const std::string& config_path, const CommonFlags& flags) {
    RunConfig rc = load_config(config_path, flags);
    SolverConfig cfg = rc.solver;
    auto series = energy_decay_run(rc.device, rc.nx, rc.ny, cfg, flags.out_dir);
    std::printf("energy decay: E(0) = %.8g, E(end) = %.8g after %zu steps\n",
                series.front().energy, series.back().energy, series.size() - 1);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-volume spin drift-diffusion device simulator"};
    app.require_subcommand(1);

    std::string mesh_path;
    double xi_min = 0.05, ortho_tol = 1e-10;
    CLI::App* check = app.add_subcommand("check-mesh", "Validate an imported mesh");
    check->add_option("mesh", mesh_path, "Mesh file")->required();
    check->add_option("--xi-min", xi_min, "Required regularity constant");
    check->add_option("--tol", ortho_tol, "Orthogonality angle tolerance (rad)");

    std::string run_config, sweep_config, energy_config;
    CommonFlags run_flags, sweep_flags, energy_flags;
    CLI::App* run = app.add_subcommand("run", "Steady or transient run per config");
    run->add_option("config", run_config, "Config file")->required();
    add_common(run, run_flags);
    CLI::App* sweep = app.add_subcommand("sweep", "Current-voltage sweep");
    sweep->add_option("config", sweep_config, "Config file")->required();
    add_common(sweep, sweep_flags);
    CLI::App* energy = app.add_subcommand("energy", "Zero-bias free-energy decay");
    energy->add_option("config", energy_config, "Config file")->required();
    add_common(energy, energy_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check_mesh(mesh_path, xi_min, ortho_tol);
        if (run->parsed()) return cmd_run(run_config, run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_flags);
        if (energy->parsed()) return cmd_energy(energy_config, energy_flags);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
