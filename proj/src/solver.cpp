#include "spinfv/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "spinfv/poisson.hpp"

namespace spinfv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void pack(const State& s, Eigen::VectorXd& u) {
    const int nc = s.n0.n_cells();
    u.resize(5 * nc);
    for (int k = 0; k < nc; ++k) {
        u[5 * k + 0] = s.n0.cell(k);
        for (int c = 0; c < 3; ++c) u[5 * k + 1 + c] = s.ns.cell(k, c);
        u[5 * k + 4] = s.V.cell(k);
    }
}

void unpack(const Eigen::VectorXd& u, State& s) {
    const int nc = s.n0.n_cells();
    for (int k = 0; k < nc; ++k) {
        s.n0.cell(k) = u[5 * k + 0];
        for (int c = 0; c < 3; ++c) s.ns.cell(k, c) = u[5 * k + 1 + c];
        s.V.cell(k) = u[5 * k + 4];
    }
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Replaces one row of the system with the gauge equation u[row] = value.
void pin_row(Eigen::SparseMatrix<double>& a, int row) {
    for (int col = 0; col < a.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
            if (it.row() == row) it.valueRef() = (col == row) ? 1.0 : 0.0;
    if (a.coeff(row, row) == 0.0) a.coeffRef(row, row) = 1.0;
}

// Row-equilibrated sparse solve with one step of iterative refinement.
Eigen::VectorXd solve_linear(Eigen::SparseMatrix<double> a, Eigen::VectorXd b,
                             LinearSolver which, bool& ok, std::string& msg) {
    const int n = static_cast<int>(a.rows());
    Eigen::VectorXd row_scale = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < a.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
            row_scale[it.row()] = std::max(row_scale[it.row()], std::abs(it.value()));
    for (int i = 0; i < n; ++i) row_scale[i] = (row_scale[i] > 0.0) ? 1.0 / row_scale[i] : 1.0;
    const Eigen::SparseMatrix<double> as = row_scale.asDiagonal() * a;
    const Eigen::VectorXd bs = row_scale.asDiagonal() * b;

    ok = true;
    Eigen::VectorXd x;
    if (which == LinearSolver::SparseLU) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(as);
        if (lu.info() != Eigen::Success) {
            ok = false;
            msg = "sparse LU factorization failed (singular system)";
            return Eigen::VectorXd::Zero(n);
        }
        x = lu.solve(bs);
        const Eigen::VectorXd r = bs - as * x;
        x += lu.solve(r);
    } else {
        Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
        gmres.setTolerance(1e-13);
        gmres.set_restart(60);
        gmres.setMaxIterations(5000);
        gmres.compute(as);
        if (gmres.info() != Eigen::Success) {
            ok = false;
            msg = "GMRES preconditioner setup failed";
            return Eigen::VectorXd::Zero(n);
        }
        x = gmres.solve(bs);
        if (gmres.info() != Eigen::Success) {
            ok = false;
            msg = "GMRES did not converge";
            return Eigen::VectorXd::Zero(n);
        }
    }
    if (!x.allFinite()) {
        ok = false;
        msg = "linear solve produced non-finite values";
        return Eigen::VectorXd::Zero(n);
    }
    return x;
}

} // namespace

void SolverConfig::validate() const {
    if (!(newton_tol > 0.0) || !(picard_tol > 0.0) || !(steady_threshold >= 0.0))
        throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (max_newton_iters < 1 || max_picard_iters < 1 || max_steps < 1)
        throw std::invalid_argument("SolverConfig: iteration limits must be >= 1");
}

namespace {

// All-Neumann problems determine V only up to a constant and are solvable
// only when the total charge matches the total doping; the solvers pin
// V of cell 0 and require the compatibility condition up front.
bool check_neumann_compatibility(const Mesh& mesh, const State& prev,
                                 const ModelParams& params, std::string& msg) {
    double mass = 0.0, doping = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k) {
        mass += mesh.cells[k].area * prev.n0.cell(k);
        doping += mesh.cells[k].area * params.C_cell[k];
    }
    if (std::abs(mass - doping) > 1e-6 * std::max(1.0, std::abs(doping))) {
        std::ostringstream os;
        os << "all-Neumann problem needs matched charge and doping mass "
           << "(charge " << mass << ", doping " << doping << ")";
        msg = os.str();
        return false;
    }
    return true;
}

} // namespace

StepResult newton_step_solve(const Mesh& mesh, const State& prev,
                             const ModelParams& params, const BoundaryData& boundary,
                             const SolverConfig& cfg) {
    cfg.validate();
    StepResult res;
    res.state = prev;
    res.state.step = prev.step + 1;

    const bool pin = mesh.n_dirichlet() == 0;
    const int pin_dof = 4; // V of cell 0
    const double pin_value = prev.V.cell(0);
    if (pin) {
        std::string msg;
        if (!check_neumann_compatibility(mesh, prev, params, msg)) {
            res.message = "Newton: " + msg;
            return res;
        }
    }

    auto residual = [&](const State& s) {
        std::vector<double> r = assemble_residual(mesh, s, prev, params, boundary, cfg.exec);
        if (pin) r[pin_dof] = s.V.cell(0) - pin_value;
        return r;
    };

    std::vector<double> r = residual(res.state);
    double rn = inf_norm(r);

    Eigen::VectorXd u;
    pack(res.state, u);

    for (int it = 0; it < cfg.max_newton_iters; ++it) {
        if (rn <= cfg.newton_tol) {
            res.ok = true;
            res.residual_norm = rn;
            return res;
        }
        Eigen::SparseMatrix<double> jac = assemble_jacobian(mesh, res.state, prev, params);
        if (pin) pin_row(jac, pin_dof);
        Eigen::VectorXd rhs(r.size());
        for (size_t i = 0; i < r.size(); ++i) rhs[static_cast<int>(i)] = -r[i];

        bool lin_ok = true;
        std::string lin_msg;
        const Eigen::VectorXd du = solve_linear(jac, rhs, cfg.linear, lin_ok, lin_msg);
        if (!lin_ok) {
            res.ok = false;
            res.residual_norm = rn;
            res.iterations = it;
            res.message = "Newton: " + lin_msg;
            return res;
        }

        // Damped update: halve until the residual norm decreases.
        double lambda = 1.0;
        State trial = res.state;
        bool accepted = false;
        while (lambda >= cfg.damping_floor) {
            unpack(u + lambda * du, trial);
            std::vector<double> r_try = residual(trial);
            const double rn_try = inf_norm(r_try);
            if (std::isfinite(rn_try) && (rn_try < rn || rn_try <= cfg.newton_tol)) {
                res.state = trial;
                u += lambda * du;
                r = std::move(r_try);
                rn = rn_try;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            res.ok = false;
            res.residual_norm = rn;
            res.message = "Newton: damping floor reached without residual decrease";
            return res;
        }
    }

    res.ok = rn <= cfg.newton_tol;
    res.residual_norm = rn;
    if (!res.ok) {
        std::ostringstream os;
        os << "Newton: no convergence in " << cfg.max_newton_iters
           << " iterations, residual " << rn;
        res.message = os.str();
    }
    return res;
}

double picard_mu(const ModelParams& params) {
    const double csup = params.doping_sup();
    const double eta2 = params.eta * params.eta;
    return params.D * csup / params.lambda2 *
           std::max(1.0 / eta2, 0.5 * (1.0 + params.p)) * params.dt;
}

namespace {

// Poisson solve reused across Picard sweeps: the matrix (and its
// factorization) is state-independent. All-Neumann meshes pin cell 0.
class PicardPoisson {
public:
    PicardPoisson(const Mesh& mesh, const ModelParams& params,
                  const BoundaryData& boundary, double pin_value)
        : mesh_(mesh), params_(params), boundary_(boundary),
          pin_(mesh.n_dirichlet() == 0), pin_value_(pin_value) {
        std::vector<Eigen::Triplet<double>> trip;
        for (const Edge& e : mesh.edges) {
            if (e.kind == EdgeKind::Neumann) continue;
            const double lt = params.lambda2 * e.tau;
            trip.emplace_back(e.cell_k, e.cell_k, lt);
            if (e.interior()) {
                trip.emplace_back(e.cell_k, e.cell_l, -lt);
                trip.emplace_back(e.cell_l, e.cell_l, lt);
                trip.emplace_back(e.cell_l, e.cell_k, -lt);
            }
        }
        Eigen::SparseMatrix<double> a(mesh.n_cells(), mesh.n_cells());
        a.setFromTriplets(trip.begin(), trip.end());
        if (pin_) pin_row(a, 0);
        lu_.compute(a);
        singular_ = lu_.info() != Eigen::Success;
    }

    bool singular() const { return singular_; }

    // Solves for V given the charge iterate; fills cells of `V`.
    bool solve(const MeshField& n0, MeshField& V) const {
        Eigen::VectorXd b(mesh_.n_cells());
        for (int k = 0; k < mesh_.n_cells(); ++k)
            b[k] = mesh_.cells[k].area * (n0.cell(k) - params_.C_cell[k]);
        for (int slot = 0; slot < mesh_.n_dirichlet(); ++slot) {
            const Edge& e = mesh_.edges[mesh_.dirichlet_edges[slot]];
            b[e.cell_k] += params_.lambda2 * e.tau * boundary_.V_trace[slot];
        }
        if (pin_) b[0] = pin_value_;
        const Eigen::VectorXd v = lu_.solve(b);
        if (!v.allFinite()) return false;
        for (int k = 0; k < mesh_.n_cells(); ++k) V.cell(k) = v[k];
        return true;
    }

private:
    const Mesh& mesh_;
    const ModelParams& params_;
    const BoundaryData& boundary_;
    bool pin_ = false;
    double pin_value_ = 0.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool singular_ = false;
};

} // namespace

StepResult picard_solve(const Mesh& mesh, const State& prev, const ModelParams& params,
                        const BoundaryData& boundary, const SolverConfig& cfg) {
    cfg.validate();
    StepResult res;
    res.state = prev;
    res.state.step = prev.step + 1;

    const int nc = mesh.n_cells();
    const double mu = picard_mu(params);

    if (mesh.n_dirichlet() == 0) {
        std::string msg;
        if (!check_neumann_compatibility(mesh, prev, params, msg)) {
            res.message = "Picard: " + msg;
            return res;
        }
    }
    PicardPoisson poisson(mesh, params, boundary, prev.V.cell(0));
    if (poisson.singular()) {
        res.message = "Picard: Poisson factorization failed";
        return res;
    }

    State rho = prev; // iterate (n0, ns); V is recomputed each sweep
    Eigen::VectorXd n_new(4 * nc);

    double delta = kInf;
    int it = 0;
    for (; it < cfg.max_picard_iters; ++it) {
        if (!poisson.solve(rho.n0, res.state.V)) {
            res.message = "Picard: Poisson solve produced non-finite values";
            return res;
        }
        const MeshField& V = res.state.V;

        // Linear spin-charge system with frozen potential.
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(nc) * 40);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(4 * nc);

        for (int k = 0; k < nc; ++k) {
            const double m_dt = mesh.cells[k].area / params.dt;
            b[4 * k + 0] = m_dt * (prev.n0.cell(k) + mu * rho.n0.cell(k));
            trip.emplace_back(4 * k + 0, 4 * k + 0, m_dt * (1.0 + mu));
            const Vec3 m = params.m_cell[k];
            const double g = 2.0 * params.gamma * mesh.cells[k].area;
            const double cx[3][3] = {{0.0, m.z, -m.y}, {-m.z, 0.0, m.x}, {m.y, -m.x, 0.0}};
            for (int l = 0; l < 3; ++l) {
                b[4 * k + 1 + l] = m_dt * (prev.ns.cell(k, l) + mu * rho.ns.cell(k, l));
                trip.emplace_back(4 * k + 1 + l, 4 * k + 1 + l,
                                  m_dt * (1.0 + mu) + mesh.cells[k].area / params.tau);
                for (int q = 0; q < 3; ++q)
                    if (cx[l][q] != 0.0)
                        trip.emplace_back(4 * k + 1 + l, 4 * k + 1 + q, -g * cx[l][q]);
            }
        }

        for (const Edge& e : mesh.edges) {
            if (e.kind == EdgeKind::Neumann) continue;
            const int k = e.cell_k;
            const int l = e.cell_l;
            const double dv = V.edge_diff(mesh, e.id, k);
            const double bp = e.tau * bernoulli(dv);
            const double bm = e.tau * bernoulli(-dv);
            const auto S = spin_mix_matrix(params.edge.D[e.id], params.edge.p[e.id],
                                           params.edge.eta[e.id], params.edge.m[e.id]);
            for (int a = 0; a < 4; ++a) {
                for (int bcomp = 0; bcomp < 4; ++bcomp) {
                    const double s = S[a][bcomp];
                    if (s == 0.0) continue;
                    trip.emplace_back(4 * k + a, 4 * k + bcomp, s * bp);
                    if (e.interior()) {
                        trip.emplace_back(4 * k + a, 4 * l + bcomp, -s * bm);
                        trip.emplace_back(4 * l + a, 4 * l + bcomp, s * bm);
                        trip.emplace_back(4 * l + a, 4 * k + bcomp, -s * bp);
                    } else if (bcomp == 0) {
                        // Dirichlet trace of n0 (spin traces vanish).
                        b[4 * k + a] += s * bm * boundary.n_trace[e.dirichlet_slot];
                    }
                }
            }
        }

        Eigen::SparseMatrix<double> a(4 * nc, 4 * nc);
        a.setFromTriplets(trip.begin(), trip.end());
        bool lin_ok = true;
        std::string lin_msg;
        n_new = solve_linear(std::move(a), std::move(b), cfg.linear, lin_ok, lin_msg);
        if (!lin_ok) {
            res.message = "Picard: " + lin_msg;
            res.iterations = it;
            return res;
        }

        delta = 0.0;
        for (int k = 0; k < nc; ++k) {
            delta = std::max(delta, std::abs(n_new[4 * k + 0] - rho.n0.cell(k)));
            for (int c = 0; c < 3; ++c)
                delta = std::max(delta, std::abs(n_new[4 * k + 1 + c] - rho.ns.cell(k, c)));
        }
        for (int k = 0; k < nc; ++k) {
            rho.n0.cell(k) = n_new[4 * k + 0];
            for (int c = 0; c < 3; ++c) rho.ns.cell(k, c) = n_new[4 * k + 1 + c];
        }
        if (delta <= cfg.picard_tol) {
            ++it;
            break;
        }
    }

    res.iterations = it;
    res.state.n0 = rho.n0;
    res.state.ns = rho.ns;
    // Final Poisson solve so the returned potential matches the returned charge.
    if (!poisson.solve(res.state.n0, res.state.V)) {
        res.message = "Picard: final Poisson solve failed";
        return res;
    }
    res.residual_norm =
        inf_norm(assemble_residual(mesh, res.state, prev, params, boundary, cfg.exec));
    if (delta <= cfg.picard_tol) {
        res.ok = true;
    } else {
        std::ostringstream os;
        os << "Picard: stagnation after " << cfg.max_picard_iters
           << " iterations, last update " << delta;
        res.message = os.str();
    }
    return res;
}

Trajectory time_march(const Mesh& mesh, const State& initial, const ModelParams& params,
                      const BoundaryData& boundary, const SolverConfig& cfg,
                      const DiagnosticsSetup& diag, const StepHook& hook) {
    cfg.validate();
    Trajectory traj;
    State current = initial;
    current.step = 0;

    DiagnosticsRecord rec = compute_record(mesh, current, params, diag, 0,
                                           std::numeric_limits<double>::quiet_NaN(), cfg.exec);
    traj.records.push_back(rec);
    if (hook) hook(0, current, rec);
    if (cfg.keep_states) traj.states.push_back(current);
    double prev_energy = rec.energy;

    for (int k = 1; k <= cfg.max_steps; ++k) {
        StepResult step = (cfg.kind == SolverKind::Newton)
                              ? newton_step_solve(mesh, current, params, boundary, cfg)
                              : picard_solve(mesh, current, params, boundary, cfg);
        if (!step.ok && cfg.kind == SolverKind::Newton && cfg.picard_fallback) {
            StepResult fallback = picard_solve(mesh, current, params, boundary, cfg);
            if (fallback.ok) step = std::move(fallback);
        }
        if (!step.ok) {
            traj.reason = StopReason::SolverFailure;
            traj.message = step.message;
            traj.final_state = current;
            traj.steps = k - 1;
            return traj;
        }

        const double diff = state_l2_diff(step.state, current, mesh);
        current = std::move(step.state);

        rec = compute_record(mesh, current, params, diag, k, prev_energy, cfg.exec);
        traj.records.push_back(rec);
        prev_energy = rec.energy;
        if (hook) hook(k, current, rec);
        if (cfg.keep_states) traj.states.push_back(current);
        traj.steps = k;

        if (diff < cfg.steady_threshold) {
            traj.reason = StopReason::Steady;
            traj.final_state = current;
            return traj;
        }
    }

    traj.reason = StopReason::MaxSteps;
    traj.final_state = current;
    return traj;
}

} // namespace spinfv
