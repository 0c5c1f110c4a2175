#include "spinfv/assembly.hpp"

#include <stdexcept>

namespace spinfv {

namespace {

void check_compatible(const Mesh& mesh, const State& state, const State& prev) {
    if (state.n0.n_cells() != mesh.n_cells() || prev.n0.n_cells() != mesh.n_cells())
        throw std::invalid_argument("assembly: state/mesh size mismatch");
}

void check_traces(const Mesh& mesh, const State& state, const BoundaryData& boundary) {
    boundary.validate(mesh);
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        if (state.n0.trace(slot) != boundary.n_trace[slot] ||
            state.V.trace(slot) != boundary.V_trace[slot] ||
            state.ns.trace(slot, 0) != 0.0 || state.ns.trace(slot, 1) != 0.0 ||
            state.ns.trace(slot, 2) != 0.0)
            throw std::invalid_argument("assembly: Dirichlet traces do not match boundary data");
    }
}

inline void edge_flux_one(const Mesh& mesh, const State& state,
                          const ModelParams& params, int eid,
                          std::array<double, 4>& raw, std::array<double, 4>& mixed) {
    const Edge& e = mesh.edges[eid];
    raw = {0.0, 0.0, 0.0, 0.0};
    mixed = {0.0, 0.0, 0.0, 0.0};
    if (e.kind == EdgeKind::Neumann) return;

    const int k = e.cell_k;
    const double dv = state.V.edge_diff(mesh, eid, k);
    const double bp = bernoulli(dv);
    const double bm = bernoulli(-dv);

    raw[0] = e.tau * (bp * state.n0.cell(k) - bm * state.n0.edge_value(mesh, eid, k));
    for (int c = 0; c < 3; ++c)
        raw[c + 1] = e.tau * (bp * state.ns.cell(k, c) -
                              bm * state.ns.edge_value(mesh, eid, k, c));

    const auto [j0, jv] =
        spin_combine(raw[0], {raw[1], raw[2], raw[3]}, params.edge.D[eid],
                     params.edge.p[eid], params.edge.eta[eid], params.edge.m[eid]);
    mixed = {j0, jv.x, jv.y, jv.z};
}

void residual_cell(const Mesh& mesh, const State& state, const State& prev,
                   const ModelParams& params, const EdgeFluxSet& fluxes, int k,
                   double* r) {
    const Cell& cell = mesh.cells[k];
    const double m_dt = cell.area / params.dt;

    double f0 = m_dt * (state.n0.cell(k) - prev.n0.cell(k));
    Vec3 fs = m_dt * (state.ns.cell_vec(k) - prev.ns.cell_vec(k));
    double fv = -cell.area * (state.n0.cell(k) - params.C_cell[k]);

    for (int eid : mesh.cell_edges[k]) {
        const Edge& e = mesh.edges[eid];
        const double sign = (e.cell_k == k) ? 1.0 : -1.0;
        f0 += sign * fluxes.mixed[eid][0];
        fs.x += sign * fluxes.mixed[eid][1];
        fs.y += sign * fluxes.mixed[eid][2];
        fs.z += sign * fluxes.mixed[eid][3];
        if (e.kind != EdgeKind::Neumann)
            fv -= params.lambda2 * e.tau * state.V.edge_diff(mesh, eid, k);
    }

    const Vec3 ns = state.ns.cell_vec(k);
    fs = fs - (2.0 * params.gamma * cell.area) * cross(ns, params.m_cell[k]) +
         (cell.area / params.tau) * ns;

    r[0] = f0;
    r[1] = fs.x;
    r[2] = fs.y;
    r[3] = fs.z;
    r[4] = fv;
}

} // namespace

EdgeFluxSet compute_edge_fluxes(const Mesh& mesh, const State& state,
                                const ModelParams& params, Exec exec) {
    EdgeFluxSet out;
    const int ne = mesh.n_edges();
    out.raw.resize(ne);
    out.mixed.resize(ne);
    if (exec == Exec::OpenMP) {
#pragma omp parallel for schedule(static)
        for (int eid = 0; eid < ne; ++eid)
            edge_flux_one(mesh, state, params, eid, out.raw[eid], out.mixed[eid]);
    } else {
        for (int eid = 0; eid < ne; ++eid)
            edge_flux_one(mesh, state, params, eid, out.raw[eid], out.mixed[eid]);
    }
    return out;
}

std::vector<double> assemble_residual(const Mesh& mesh, const State& state,
                                      const State& prev, const ModelParams& params,
                                      const BoundaryData& boundary, Exec exec) {
    check_compatible(mesh, state, prev);
    check_traces(mesh, state, boundary);

    const EdgeFluxSet fluxes = compute_edge_fluxes(mesh, state, params, exec);
    const int nc = mesh.n_cells();
    std::vector<double> r(static_cast<size_t>(nc) * 5);
    if (exec == Exec::OpenMP) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < nc; ++k)
            residual_cell(mesh, state, prev, params, fluxes, k, &r[5 * static_cast<size_t>(k)]);
    } else {
        for (int k = 0; k < nc; ++k)
            residual_cell(mesh, state, prev, params, fluxes, k, &r[5 * static_cast<size_t>(k)]);
    }
    return r;
}

Eigen::SparseMatrix<double> assemble_jacobian(const Mesh& mesh, const State& state,
                                              const State& prev,
                                              const ModelParams& params) {
    check_compatible(mesh, state, prev);
    const int nc = mesh.n_cells();
    const int n = 5 * nc;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(nc) * 60);

    // Cell-local terms.
    for (int k = 0; k < nc; ++k) {
        const Cell& cell = mesh.cells[k];
        const double m_dt = cell.area / params.dt;
        trip.emplace_back(5 * k + 0, 5 * k + 0, m_dt);
        const Vec3 m = params.m_cell[k];
        const double g = 2.0 * params.gamma * cell.area;
        // -2 gamma m(K) d(ns x m)/dns is the antisymmetric cross matrix.
        const double cx[3][3] = {{0.0, m.z, -m.y}, {-m.z, 0.0, m.x}, {m.y, -m.x, 0.0}};
        for (int l = 0; l < 3; ++l) {
            trip.emplace_back(5 * k + 1 + l, 5 * k + 1 + l, m_dt + cell.area / params.tau);
            for (int q = 0; q < 3; ++q)
                if (cx[l][q] != 0.0)
                    trip.emplace_back(5 * k + 1 + l, 5 * k + 1 + q, -g * cx[l][q]);
        }
        trip.emplace_back(5 * k + 4, 5 * k + 0, -cell.area);
    }

    // Edge terms.
    for (const Edge& e : mesh.edges) {
        if (e.kind == EdgeKind::Neumann) continue;
        const int k = e.cell_k;
        const int l = e.cell_l; // -1 on Dirichlet edges
        const double dv = state.V.edge_diff(mesh, e.id, k);
        const double bp = bernoulli(dv);
        const double bm = bernoulli(-dv);
        const double dbp = bernoulli_deriv(dv);
        const double dbm = bernoulli_deriv(-dv);

        // Raw SG flux: J_c = tau (B(dv) n_{c,K} - B(-dv) n_{c,K,sigma}).
        const double d_nk = e.tau * bp;
        const double d_nl = -e.tau * bm;
        std::array<double, 4> d_dv{};
        for (int c = 0; c < 4; ++c) {
            const double nk = (c == 0) ? state.n0.cell(k) : state.ns.cell(k, c - 1);
            const double nks = (c == 0) ? state.n0.edge_value(mesh, e.id, k)
                                        : state.ns.edge_value(mesh, e.id, k, c - 1);
            d_dv[c] = e.tau * (dbp * nk + dbm * nks);
        }

        const auto S = spin_mix_matrix(params.edge.D[e.id], params.edge.p[e.id],
                                       params.edge.eta[e.id], params.edge.m[e.id]);
        std::array<double, 4> sg_dv{}; // d(mixed_a)/d(dv)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) sg_dv[a] += S[a][b] * d_dv[b];

        // Rows of K get +mixed, rows of L get -mixed.
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                const double s = S[a][b];
                if (s == 0.0) continue;
                trip.emplace_back(5 * k + a, 5 * k + b, s * d_nk);
                if (e.interior()) {
                    trip.emplace_back(5 * k + a, 5 * l + b, s * d_nl);
                    trip.emplace_back(5 * l + a, 5 * k + b, -s * d_nk);
                    trip.emplace_back(5 * l + a, 5 * l + b, -s * d_nl);
                }
            }
            trip.emplace_back(5 * k + a, 5 * k + 4, -sg_dv[a]);
            if (e.interior()) {
                trip.emplace_back(5 * k + a, 5 * l + 4, sg_dv[a]);
                trip.emplace_back(5 * l + a, 5 * k + 4, sg_dv[a]);
                trip.emplace_back(5 * l + a, 5 * l + 4, -sg_dv[a]);
            }
        }

        // Poisson rows: -lambda^2 tau D V_{K,sigma} per adjacent cell.
        const double lt = params.lambda2 * e.tau;
        trip.emplace_back(5 * k + 4, 5 * k + 4, lt);
        if (e.interior()) {
            trip.emplace_back(5 * k + 4, 5 * l + 4, -lt);
            trip.emplace_back(5 * l + 4, 5 * l + 4, lt);
            trip.emplace_back(5 * l + 4, 5 * k + 4, -lt);
        }
    }

    Eigen::SparseMatrix<double> jac(n, n);
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
}

} // namespace spinfv
