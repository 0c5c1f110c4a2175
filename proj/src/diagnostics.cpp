#include "spinfv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spinfv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// x (log x - 1) with the convention 0 log 0 = 0.
double xlogx_minus_x(double x) {
    if (x == 0.0) return 0.0;
    return x * (std::log(x) - 1.0);
}

// Serial sum of a term array; keeps reductions independent of thread count.
double sum_serial(const std::vector<double>& terms) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

} // namespace

std::pair<MeshField, MeshField> project_updown(const MeshField& n0, const MeshField& ns,
                                               const std::vector<Vec3>& m,
                                               const Mesh& mesh) {
    if (n0.n_cells() != mesh.n_cells() || ns.n_cells() != mesh.n_cells())
        throw std::invalid_argument("project_updown: field/mesh size mismatch");
    MeshField np = MeshField::scalar(mesh);
    MeshField nm = MeshField::scalar(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double along = dot(ns.cell_vec(k), m[k]);
        np.cell(k) = 0.5 * n0.cell(k) + along;
        nm.cell(k) = 0.5 * n0.cell(k) - along;
    }
    // The spin trace vanishes, so n_pm = n^D/2 on Dirichlet edges.
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        np.trace(slot) = 0.5 * n0.trace(slot);
        nm.trace(slot) = 0.5 * n0.trace(slot);
    }
    return {np, nm};
}

MeshField project_perp(const MeshField& ns, const std::vector<Vec3>& m, const Mesh& mesh) {
    MeshField perp = MeshField::vector3(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const Vec3 v = ns.cell_vec(k);
        perp.set_cell_vec(k, v - dot(v, m[k]) * m[k]);
    }
    return perp;
}

double free_energy(const Mesh& mesh, const State& state, const std::vector<Vec3>& m,
                   const MeshField& nD_ref, const MeshField& VD_ref, double lambda2,
                   Exec exec) {
    const int nc = mesh.n_cells();
    const int ne = mesh.n_edges();
    std::vector<double> cell_terms(nc, 0.0);
    std::vector<double> edge_terms(ne, 0.0);
    bool negative = false;

#pragma omp parallel for schedule(static) reduction(|| : negative) if (exec == Exec::OpenMP)
    for (int k = 0; k < nc; ++k) {
        const double along = dot(state.ns.cell_vec(k), m[k]);
        const double half_nd = 0.5 * nD_ref.cell(k);
        double t = 0.0;
        for (double npm : {0.5 * state.n0.cell(k) + along, 0.5 * state.n0.cell(k) - along}) {
            if (npm < 0.0) {
                negative = true;
                continue;
            }
            t += half_nd;
            if (npm > 0.0) t += xlogx_minus_x(npm) - npm * std::log(half_nd);
        }
        cell_terms[k] = mesh.cells[k].area * t;
    }
    if (negative)
        throw std::domain_error("free_energy: negative spin-up/down density");

#pragma omp parallel for schedule(static) if (exec == Exec::OpenMP)
    for (int eid = 0; eid < ne; ++eid) {
        const Edge& e = mesh.edges[eid];
        if (e.kind == EdgeKind::Neumann) continue;
        const int k = e.cell_k;
        const double w_k = state.V.cell(k) - VD_ref.cell(k);
        double w_ks;
        if (e.interior())
            w_ks = state.V.cell(e.cell_l) - VD_ref.cell(e.cell_l);
        else
            w_ks = state.V.trace(e.dirichlet_slot) - VD_ref.trace(e.dirichlet_slot);
        const double dw = w_ks - w_k;
        edge_terms[eid] = 0.5 * lambda2 * e.tau * dw * dw;
    }

    return sum_serial(cell_terms) + sum_serial(edge_terms);
}

double dissipation_rate(const Mesh& mesh, const State& state, const ModelParams& params,
                        Exec exec) {
    const int ne = mesh.n_edges();
    std::vector<double> edge_terms(ne, 0.0);
    const double c_plus = params.D * (1.0 + params.p);
    const double c_minus = params.D * (1.0 - params.p);

#pragma omp parallel for schedule(static) if (exec == Exec::OpenMP)
    for (int eid = 0; eid < ne; ++eid) {
        const Edge& e = mesh.edges[eid];
        if (e.kind == EdgeKind::Neumann) continue;
        const int k = e.cell_k;

        const double along_k = dot(state.ns.cell_vec(k), params.m_cell[k]);
        double along_ks = 0.0;
        if (e.interior()) along_ks = dot(state.ns.cell_vec(e.cell_l), params.m_cell[e.cell_l]);

        const double v_k = state.V.cell(k);
        const double v_ks = state.V.edge_value(mesh, eid, k);

        double t = 0.0;
        for (int s = 0; s < 2; ++s) {
            const double sgn = (s == 0) ? 1.0 : -1.0;
            const double npm_k = 0.5 * state.n0.cell(k) + sgn * along_k;
            const double npm_ks = e.interior()
                                      ? 0.5 * state.n0.cell(e.cell_l) + sgn * along_ks
                                      : 0.5 * state.n0.trace(e.dirichlet_slot);
            const double mn = std::min(npm_k, npm_ks);
            if (mn <= 0.0) continue; // vanishing minimum contributes nothing
            const double dlog = (std::log(npm_ks) + v_ks) - (std::log(npm_k) + v_k);
            t += (s == 0 ? c_plus : c_minus) * e.tau * mn * dlog * dlog;
        }
        edge_terms[eid] = t;
    }

    return 0.5 * params.dt * sum_serial(edge_terms);
}

BoundFlags bound_monitor(const Mesh& mesh, const State& state, const ModelParams& params,
                         const BoundConstants& constants, int k, double tol) {
    BoundFlags flags;
    double min_npm = std::numeric_limits<double>::infinity();
    double max_npm = -std::numeric_limits<double>::infinity();
    double max_n0 = -std::numeric_limits<double>::infinity();
    double max_perp = 0.0;
    double max_ns = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Vec3 ns = state.ns.cell_vec(c);
        const double along = dot(ns, params.m_cell[c]);
        min_npm = std::min({min_npm, 0.5 * state.n0.cell(c) + along,
                            0.5 * state.n0.cell(c) - along});
        max_npm = std::max({max_npm, 0.5 * state.n0.cell(c) + along,
                            0.5 * state.n0.cell(c) - along});
        max_n0 = std::max(max_n0, state.n0.cell(c));
        max_perp = std::max(max_perp, norm(ns - along * params.m_cell[c]));
        max_ns = std::max(max_ns, norm(ns));
    }

    flags.positivity_ok = min_npm >= -tol;
    flags.upper_ok = max_npm <= constants.M0 + tol && max_n0 <= 2.0 * constants.M0 + tol;
    if (constants.alpha * constants.dt < 1.0) {
        const double mk = constants.Mk(k);
        flags.perp_ok = max_perp <= mk + tol && max_ns <= 2.0 * mk + tol;
    } else {
        flags.applicable = false;
        flags.perp_ok = true;
    }
    return flags;
}

double contact_current(const Mesh& mesh, const EdgeFluxSet& fluxes,
                       const std::vector<int>& contact_edges) {
    double s = 0.0;
    for (int eid : contact_edges) {
        if (mesh.edges[eid].kind != EdgeKind::Dirichlet)
            throw std::invalid_argument("contact_current: edge " + std::to_string(eid) +
                                        " is not a Dirichlet edge");
        s += fluxes.mixed[eid][0];
    }
    return s;
}

Vec3 contact_spin_current(const Mesh& mesh, const EdgeFluxSet& fluxes,
                          const std::vector<int>& contact_edges) {
    Vec3 s{};
    for (int eid : contact_edges) {
        if (mesh.edges[eid].kind != EdgeKind::Dirichlet)
            throw std::invalid_argument("contact_spin_current: edge " + std::to_string(eid) +
                                        " is not a Dirichlet edge");
        s = s + Vec3{fluxes.mixed[eid][1], fluxes.mixed[eid][2], fluxes.mixed[eid][3]};
    }
    return s;
}

int DiagnosticsRecord::flag_bits(bool outside_hypotheses) const {
    int bits = 0;
    if (!flags.positivity_ok) bits |= 1;
    if (!flags.upper_ok) bits |= 2;
    if (!flags.perp_ok) bits |= 4;
    if (!energy_monotone_ok) bits |= 8;
    if (outside_hypotheses || !flags.applicable) bits |= 16;
    return bits;
}

DiagnosticsRecord compute_record(const Mesh& mesh, const State& state,
                                 const ModelParams& params, const DiagnosticsSetup& setup,
                                 int k, double prev_energy, Exec exec) {
    DiagnosticsRecord rec;
    rec.step = k;
    rec.time = k * params.dt;

    auto [np, nm] = project_updown(state.n0, state.ns, params.m_cell, mesh);
    MeshField perp = project_perp(state.ns, params.m_cell, mesh);
    rec.min_np = rec.max_np = np.cell(0);
    rec.min_nm = rec.max_nm = nm.cell(0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        rec.min_np = std::min(rec.min_np, np.cell(c));
        rec.max_np = std::max(rec.max_np, np.cell(c));
        rec.min_nm = std::min(rec.min_nm, nm.cell(c));
        rec.max_nm = std::max(rec.max_nm, nm.cell(c));
    }
    rec.max_nperp = lp_norm(perp, mesh, std::numeric_limits<double>::infinity());

    rec.flags = bound_monitor(mesh, state, params, setup.bounds, k, setup.bound_tol);
    rec.Mk = rec.flags.applicable ? setup.bounds.Mk(k) : kNaN;

    if (setup.nD_ref && setup.VD_ref) {
        if (rec.min_np < 0.0 || rec.min_nm < 0.0) {
            rec.energy = kNaN;
        } else {
            rec.energy = free_energy(mesh, state, params.m_cell, *setup.nD_ref,
                                     *setup.VD_ref, params.lambda2, exec);
        }
    } else {
        rec.energy = kNaN;
    }
    rec.dissipation = (rec.min_np >= 0.0 && rec.min_nm >= 0.0)
                          ? dissipation_rate(mesh, state, params, exec)
                          : kNaN;
    rec.energy_monotone_ok = !(std::isfinite(rec.energy) && std::isfinite(prev_energy) &&
                               rec.energy > prev_energy + setup.energy_slack);

    if (!setup.contacts.empty()) {
        const EdgeFluxSet fluxes = compute_edge_fluxes(mesh, state, params, exec);
        for (const ContactSet& contact : setup.contacts)
            rec.contact_currents.push_back(setup.current_scale *
                                           contact_current(mesh, fluxes, contact.edges));
    }
    return rec;
}

} // namespace spinfv
