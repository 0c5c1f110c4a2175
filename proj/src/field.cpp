#include "spinfv/field.hpp"

#include <cmath>
#include <stdexcept>

namespace spinfv {

namespace {

// Gauss-Legendre 2-point abscissae on [-1/2, 1/2].
constexpr double kGauss2 = 0.28867513459481288225; // 1/(2*sqrt(3))

double cell_mean(const std::function<double(Vec2)>& f, const Mesh& mesh,
                 const Cell& c, Quadrature quad) {
    if (quad == Quadrature::Midpoint) return f(c.center);
    if (!mesh.tensor)
        throw std::invalid_argument("cell_average: Gauss2 requires a tensor mesh");
    const double ox = mesh.tensor_hx * kGauss2;
    const double oy = mesh.tensor_hy * kGauss2;
    double s = 0.0;
    for (double sx : {-ox, ox})
        for (double sy : {-oy, oy}) s += f({c.center.x + sx, c.center.y + sy});
    return 0.25 * s;
}

double edge_mean(const std::function<double(Vec2)>& f, const Edge& e,
                 Quadrature quad) {
    if (quad == Quadrature::Midpoint) return f(e.midpoint);
    const Vec2 off = (e.length * kGauss2) * e.tangent;
    return 0.5 * (f(e.midpoint - off) + f(e.midpoint + off));
}

} // namespace

MeshField cell_average(const std::function<double(Vec2)>& f, const Mesh& mesh,
                       Quadrature quad) {
    MeshField u = MeshField::scalar(mesh);
    for (const Cell& c : mesh.cells) {
        const double v = cell_mean(f, mesh, c, quad);
        if (!std::isfinite(v))
            throw std::domain_error("cell_average: non-finite integrand on cell " +
                                    std::to_string(c.id));
        u.cell(c.id) = v;
    }
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        const Edge& e = mesh.edges[mesh.dirichlet_edges[slot]];
        const double v = edge_mean(f, e, quad);
        if (!std::isfinite(v))
            throw std::domain_error("cell_average: non-finite integrand on edge " +
                                    std::to_string(e.id));
        u.trace(slot) = v;
    }
    return u;
}

double h1_seminorm(const MeshField& u, const Mesh& mesh) {
    double s = 0.0;
    for (const Edge& e : mesh.edges) {
        if (e.kind == EdgeKind::Neumann) continue;
        for (int c = 0; c < u.comps(); ++c) {
            const double du = u.edge_diff(mesh, e.id, e.cell_k, c);
            s += e.tau * du * du;
        }
    }
    return std::sqrt(s);
}

double lp_norm(const MeshField& u, const Mesh& mesh, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    auto mag = [&](int k) {
        if (u.comps() == 1) return std::abs(u.cell(k));
        return norm(u.cell_vec(k));
    };
    if (std::isinf(p)) {
        double m = 0.0;
        for (int k = 0; k < mesh.n_cells(); ++k) m = std::max(m, mag(k));
        return m;
    }
    double s = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k)
        s += mesh.cells[k].area * std::pow(mag(k), p);
    return std::pow(s, 1.0 / p);
}

} // namespace spinfv
