#include "spinfv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spinfv {

double harmonic_edge_average(double a, double b, double d_k, double d_l, double d) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double denom = d_k * b + d_l * a;
    if (denom == 0.0) return 0.0;
    return d * a * b / denom;
}

void ModelParams::prepare(const Mesh& mesh) {
    const size_t n = static_cast<size_t>(mesh.n_cells());
    if (!(D > 0.0)) throw std::invalid_argument("ModelParams: D must be > 0");
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("ModelParams: p must lie in [0,1)");
    if (!(tau > 0.0)) throw std::invalid_argument("ModelParams: tau must be > 0");
    if (!(lambda2 > 0.0)) throw std::invalid_argument("ModelParams: lambda_D^2 must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("ModelParams: dt must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("ModelParams: gamma must be >= 0");
    eta = std::sqrt(1.0 - p * p);

    if (D_cell.empty()) D_cell.assign(n, D);
    if (p_cell.empty()) p_cell.assign(n, p);
    if (m_cell.empty()) m_cell.assign(n, Vec3{0.0, 0.0, 0.0});
    if (C_cell.empty()) C_cell.assign(n, 0.0);
    if (D_cell.size() != n || p_cell.size() != n || m_cell.size() != n || C_cell.size() != n)
        throw std::invalid_argument("ModelParams: cell field size mismatch");
    for (size_t k = 0; k < n; ++k) {
        if (!(D_cell[k] > 0.0)) throw std::invalid_argument("ModelParams: D_K must be > 0");
        if (p_cell[k] < 0.0 || p_cell[k] >= 1.0)
            throw std::invalid_argument("ModelParams: p_K must lie in [0,1)");
    }

    edge.D.assign(mesh.n_edges(), 0.0);
    edge.p.assign(mesh.n_edges(), 0.0);
    edge.eta.assign(mesh.n_edges(), 1.0);
    edge.m.assign(mesh.n_edges(), Vec3{});
    for (const Edge& e : mesh.edges) {
        if (e.interior()) {
            edge.D[e.id] = harmonic_edge_average(D_cell[e.cell_k], D_cell[e.cell_l],
                                                 e.d_k, e.d_l, e.d);
            edge.p[e.id] = harmonic_edge_average(p_cell[e.cell_k], p_cell[e.cell_l],
                                                 e.d_k, e.d_l, e.d);
            for (int c = 0; c < 3; ++c)
                edge.m[e.id][c] = harmonic_edge_average(m_cell[e.cell_k][c], m_cell[e.cell_l][c],
                                                        e.d_k, e.d_l, e.d);
        } else {
            edge.D[e.id] = D_cell[e.cell_k];
            edge.p[e.id] = p_cell[e.cell_k];
            edge.m[e.id] = m_cell[e.cell_k];
        }
        edge.eta[e.id] = std::sqrt(1.0 - edge.p[e.id] * edge.p[e.id]);
    }
}

double ModelParams::doping_sup() const {
    double s = 0.0;
    for (double c : C_cell) s = std::max(s, std::abs(c));
    return s;
}

bool ModelParams::constant_unit_m() const {
    if (m_cell.empty()) return false;
    const Vec3 m0 = m_cell.front();
    if (std::abs(norm(m0) - 1.0) > 1e-12) return false;
    for (const Vec3& m : m_cell)
        if (norm(m - m0) > 1e-12) return false;
    return true;
}

void BoundaryData::validate(const Mesh& mesh) const {
    if (static_cast<int>(n_trace.size()) != mesh.n_dirichlet() ||
        static_cast<int>(V_trace.size()) != mesh.n_dirichlet())
        throw std::invalid_argument("BoundaryData: trace size mismatch");
    for (double n : n_trace)
        if (n < 0.0) throw std::invalid_argument("BoundaryData: n^D must be >= 0");
}

double BoundConstants::Mk(int k) const { return m_bound_sequence(M0, alpha, dt, k); }

double compute_m0(const InitialData& initial, const BoundaryData& boundary,
                  const std::vector<double>& C, const std::vector<Vec3>& m,
                  const Mesh& mesh) {
    double m0 = 0.0;
    for (double nd : boundary.n_trace) m0 = std::max(m0, 0.5 * nd);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double n0 = initial.n0.cell(k);
        const Vec3 ns = initial.ns.cell_vec(k);
        const double along = dot(ns, m[k]);
        if (0.5 * n0 - std::abs(along) < -1e-12)
            throw std::invalid_argument(
                "compute_m0: initial data violate (1/2) n0 +- ns.m >= 0 at cell " +
                std::to_string(k));
        const Vec3 nperp = ns - along * m[k];
        m0 = std::max(m0, 0.5 * n0 + std::abs(along));
        m0 = std::max(m0, norm(nperp));
        m0 = std::max(m0, C[k]);
    }
    return m0;
}

BoundConstants make_bound_constants(const InitialData& initial,
                                    const BoundaryData& boundary,
                                    const ModelParams& params, const Mesh& mesh) {
    BoundConstants bc;
    bc.M0 = compute_m0(initial, boundary, params.C_cell, params.m_cell, mesh);
    bc.alpha = params.D * (1.0 + params.p) * params.doping_sup() / params.lambda2;
    bc.dt = params.dt;
    return bc;
}

std::string ConstraintReport::summary() const {
    std::ostringstream os;
    if (undoped) {
        os << "undoped (C == 0): unconditionally stable, dt and tau unconstrained";
    } else {
        os << "dt " << (dt_ok ? "<=" : ">") << " bound " << dt_bound << " ("
           << (dt_ok ? "ok" : "VIOLATED") << "), tau " << (tau_ok ? "<=" : ">")
           << " bound " << tau_bound << " (" << (tau_ok ? "ok" : "VIOLATED") << ")";
    }
    os << "; m field " << (constant_unit_m ? "constant with |m| = 1" : "outside hypotheses");
    return os.str();
}

ConstraintReport check_constraints(const ModelParams& params) {
    ConstraintReport rep;
    const double csup = params.doping_sup();
    rep.constant_unit_m = params.constant_unit_m();
    if (csup == 0.0) {
        rep.undoped = true;
        rep.dt_ok = rep.tau_ok = true;
        rep.dt_bound = rep.tau_bound = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.dt_bound = params.lambda2 / (params.D * (1.0 + params.p) * csup);
    rep.tau_bound = params.eta * params.lambda2 / (params.D * csup);
    rep.dt_ok = params.dt <= rep.dt_bound;
    rep.tau_ok = params.tau <= rep.tau_bound;
    return rep;
}

double m_bound_sequence(double M0, double alpha, double dt, int k) {
    const double ad = alpha * dt;
    if (ad >= 1.0)
        throw std::invalid_argument("m_bound_sequence: requires alpha*dt < 1");
    if (k < 0) throw std::invalid_argument("m_bound_sequence: k must be >= 0");
    return M0 * std::pow(1.0 - ad, -k);
}

} // namespace spinfv
