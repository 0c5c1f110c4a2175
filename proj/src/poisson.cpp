#include "spinfv/poisson.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

namespace spinfv {

namespace {

Eigen::SparseMatrix<double> poisson_matrix(const Mesh& mesh, double lambda2,
                                           const std::vector<double>& diag_add) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.edges.size() * 4 + mesh.cells.size());
    for (const Edge& e : mesh.edges) {
        if (e.kind == EdgeKind::Neumann) continue;
        const double lt = lambda2 * e.tau;
        trip.emplace_back(e.cell_k, e.cell_k, lt);
        if (e.interior()) {
            trip.emplace_back(e.cell_k, e.cell_l, -lt);
            trip.emplace_back(e.cell_l, e.cell_l, lt);
            trip.emplace_back(e.cell_l, e.cell_k, -lt);
        }
    }
    for (int k = 0; k < mesh.n_cells(); ++k)
        if (!diag_add.empty() && diag_add[k] != 0.0)
            trip.emplace_back(k, k, diag_add[k]);
    Eigen::SparseMatrix<double> a(mesh.n_cells(), mesh.n_cells());
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

} // namespace

MeshField solve_poisson(const Mesh& mesh, const MeshField& n0,
                        const std::vector<double>& C, double lambda2,
                        const std::vector<double>& V_trace) {
    if (mesh.n_dirichlet() == 0)
        throw std::invalid_argument("solve_poisson: Dirichlet boundary is empty, "
                                    "the discrete Poisson problem is singular");
    if (static_cast<int>(V_trace.size()) != mesh.n_dirichlet())
        throw std::invalid_argument("solve_poisson: V^D trace size mismatch");

    Eigen::VectorXd b(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k)
        b[k] = mesh.cells[k].area * (n0.cell(k) - C[k]);
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        const Edge& e = mesh.edges[mesh.dirichlet_edges[slot]];
        b[e.cell_k] += lambda2 * e.tau * V_trace[slot];
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(poisson_matrix(mesh, lambda2, {}));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_poisson: factorization failed");
    const Eigen::VectorXd v = solver.solve(b);

    MeshField V = MeshField::scalar(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) V.cell(k) = v[k];
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) V.trace(slot) = V_trace[slot];
    return V;
}

State equilibrium_state(const Mesh& mesh, const ModelParams& params,
                        const BoundaryData& boundary, double tol) {
    boundary.validate(mesh);
    if (mesh.n_dirichlet() == 0)
        throw std::invalid_argument("equilibrium_state: Dirichlet boundary is empty");

    double c0 = 0.0;
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        if (!(boundary.n_trace[slot] > 0.0))
            throw std::invalid_argument("equilibrium_state: n^D must be > 0");
        const double c = std::log(boundary.n_trace[slot]) + boundary.V_trace[slot];
        if (slot == 0) {
            c0 = c;
        } else if (std::abs(c - c0) > 1e-9 * std::max(1.0, std::abs(c0))) {
            throw std::invalid_argument(
                "equilibrium_state: log n^D + V^D is not constant across contacts");
        }
    }

    // Start from the potential of a locally neutral density.
    MeshField n0 = MeshField::scalar(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) n0.cell(k) = params.C_cell[k];
    MeshField V = solve_poisson(mesh, n0, params.C_cell, params.lambda2,
                                boundary.V_trace);

    Eigen::VectorXd v(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k) v[k] = V.cell(k);

    auto residual = [&](const Eigen::VectorXd& vv, Eigen::VectorXd& r) {
        for (int k = 0; k < mesh.n_cells(); ++k)
            r[k] = -mesh.cells[k].area * (std::exp(c0 - vv[k]) - params.C_cell[k]);
        for (const Edge& e : mesh.edges) {
            if (e.kind == EdgeKind::Neumann) continue;
            if (e.interior()) {
                const double f = params.lambda2 * e.tau * (vv[e.cell_l] - vv[e.cell_k]);
                r[e.cell_k] -= f;
                r[e.cell_l] += f;
            } else {
                r[e.cell_k] -= params.lambda2 * e.tau *
                               (boundary.V_trace[e.dirichlet_slot] - vv[e.cell_k]);
            }
        }
    };

    Eigen::VectorXd r(mesh.n_cells()), r_try(mesh.n_cells());
    residual(v, r);
    double rn = r.lpNorm<Eigen::Infinity>();
    bool stalled = false;
    for (int it = 0; it < 200 && rn > tol && !stalled; ++it) {
        std::vector<double> diag(mesh.n_cells());
        for (int k = 0; k < mesh.n_cells(); ++k)
            diag[k] = mesh.cells[k].area * std::exp(c0 - v[k]);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(poisson_matrix(mesh, params.lambda2, diag));
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("equilibrium_state: factorization failed");
        const Eigen::VectorXd dv = solver.solve(-r);

        double step = 1.0;
        stalled = true;
        for (int half = 0; half < 40; ++half) {
            Eigen::VectorXd v_try = v + step * dv;
            residual(v_try, r_try);
            const double rn_try = r_try.lpNorm<Eigen::Infinity>();
            if (rn_try < rn || rn_try <= tol) {
                v = std::move(v_try);
                r = r_try;
                rn = rn_try;
                stalled = false;
                break;
            }
            step *= 0.5;
        }
    }
    if (rn > tol)
        throw std::runtime_error("equilibrium_state: Newton did not converge");

    State s = State::zero(mesh);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        s.V.cell(k) = v[k];
        s.n0.cell(k) = std::exp(c0 - v[k]);
    }
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        s.n0.trace(slot) = boundary.n_trace[slot];
        s.V.trace(slot) = boundary.V_trace[slot];
    }
    return s;
}

} // namespace spinfv
