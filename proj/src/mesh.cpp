#include "spinfv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spinfv {

double Mesh::total_area() const {
    double a = 0.0;
    for (const Cell& c : cells) a += c.area;
    return a;
}

void Mesh::finalize() {
    cell_edges.assign(cells.size(), {});
    dirichlet_edges.clear();
    for (Edge& e : edges) {
        cell_edges[e.cell_k].push_back(e.id);
        if (e.interior()) cell_edges[e.cell_l].push_back(e.id);
        if (e.kind == EdgeKind::Dirichlet) {
            e.dirichlet_slot = static_cast<int>(dirichlet_edges.size());
            dirichlet_edges.push_back(e.id);
        }
    }
}

BoundaryClassifier all_dirichlet() {
    return [](Vec2) { return EdgeKind::Dirichlet; };
}

BoundaryClassifier all_neumann() {
    return [](Vec2) { return EdgeKind::Neumann; };
}

BoundaryClassifier dirichlet_left_right(const Rect& domain) {
    const double x0 = domain.x0, x1 = domain.x1;
    const double tol = 1e-12 * std::max(1.0, std::abs(x1 - x0));
    return [x0, x1, tol](Vec2 mid) {
        if (std::abs(mid.x - x0) < tol || std::abs(mid.x - x1) < tol)
            return EdgeKind::Dirichlet;
        return EdgeKind::Neumann;
    };
}

Mesh build_rect_mesh(int nx, int ny, const Rect& domain,
                     const BoundaryClassifier& classify) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("build_rect_mesh: nx, ny must be >= 1");
    const double lx = domain.x1 - domain.x0;
    const double ly = domain.y1 - domain.y0;
    if (!(lx > 0.0) || !(ly > 0.0))
        throw std::invalid_argument("build_rect_mesh: degenerate domain");
    if (!classify)
        throw std::invalid_argument("build_rect_mesh: boundary classifier required");

    const double hx = lx / nx;
    const double hy = ly / ny;

    Mesh mesh;
    mesh.tensor = true;
    mesh.tensor_hx = hx;
    mesh.tensor_hy = hy;
    mesh.cells.resize(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Cell& c = mesh.cells[static_cast<size_t>(j) * nx + i];
            c.id = j * nx + i;
            c.center = {domain.x0 + (i + 0.5) * hx, domain.y0 + (j + 0.5) * hy};
            c.area = hx * hy;
            c.diam = std::hypot(hx, hy);
        }
    }

    auto classify_checked = [&](Vec2 mid) {
        EdgeKind kind = classify(mid);
        if (kind == EdgeKind::Interior) {
            std::ostringstream os;
            os << "build_rect_mesh: classifier left exterior edge at (" << mid.x
               << ", " << mid.y << ") unassigned";
            throw std::invalid_argument(os.str());
        }
        return kind;
    };

    // Vertical edges (constant x), then horizontal edges (constant y).
    int id = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Edge e;
            e.id = id++;
            e.midpoint = {domain.x0 + i * hx, domain.y0 + (j + 0.5) * hy};
            e.tangent = {0.0, 1.0};
            e.length = hy;
            if (i == 0) {
                e.cell_k = j * nx;
                e.kind = classify_checked(e.midpoint);
                e.d_k = hx / 2;
                e.d = e.d_k;
            } else if (i == nx) {
                e.cell_k = j * nx + nx - 1;
                e.kind = classify_checked(e.midpoint);
                e.d_k = hx / 2;
                e.d = e.d_k;
            } else {
                e.kind = EdgeKind::Interior;
                e.cell_k = j * nx + i - 1;
                e.cell_l = j * nx + i;
                e.d_k = e.d_l = hx / 2;
                e.d = hx;
            }
            e.tau = e.length / e.d;
            mesh.edges.push_back(e);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Edge e;
            e.id = id++;
            e.midpoint = {domain.x0 + (i + 0.5) * hx, domain.y0 + j * hy};
            e.tangent = {1.0, 0.0};
            e.length = hx;
            if (j == 0) {
                e.cell_k = i;
                e.kind = classify_checked(e.midpoint);
                e.d_k = hy / 2;
                e.d = e.d_k;
            } else if (j == ny) {
                e.cell_k = (ny - 1) * nx + i;
                e.kind = classify_checked(e.midpoint);
                e.d_k = hy / 2;
                e.d = e.d_k;
            } else {
                e.kind = EdgeKind::Interior;
                e.cell_k = (j - 1) * nx + i;
                e.cell_l = j * nx + i;
                e.d_k = e.d_l = hy / 2;
                e.d = hy;
            }
            e.tau = e.length / e.d;
            mesh.edges.push_back(e);
        }
    }

    mesh.finalize();
    return mesh;
}

std::string AdmissibilityReport::summary() const {
    std::ostringstream os;
    os << (pass() ? "PASS" : "FAIL") << ": xi = " << xi << " (required >= " << xi_min
       << "), max angle defect = " << max_angle_defect << " rad";
    if (!orthogonality_violations.empty())
        os << ", " << orthogonality_violations.size() << " orthogonality violation(s)";
    for (const std::string& err : structural_errors) os << "\n  error: " << err;
    return os.str();
}

AdmissibilityReport check_admissibility(const Mesh& mesh, double xi_min,
                                        double angle_tol) {
    AdmissibilityReport rep;
    rep.xi_min = xi_min;
    rep.angle_tol = angle_tol;
    rep.xi = std::numeric_limits<double>::infinity();
    rep.has_dirichlet = mesh.n_dirichlet() > 0;

    auto err = [&](const std::string& s) { rep.structural_errors.push_back(s); };

    for (const Cell& c : mesh.cells) {
        if (!(c.area > 0.0)) err("cell " + std::to_string(c.id) + ": m(K) <= 0");
        if (!(c.diam > 0.0)) err("cell " + std::to_string(c.id) + ": diam(K) <= 0");
    }

    for (const Edge& e : mesh.edges) {
        if (!(e.length > 0.0)) err("edge " + std::to_string(e.id) + ": m(sigma) <= 0");
        if (!(e.tau > 0.0)) err("edge " + std::to_string(e.id) + ": tau <= 0");
        if (!(e.d > 0.0)) err("edge " + std::to_string(e.id) + ": d_sigma <= 0");
        if (e.interior()) {
            if (e.cell_k == e.cell_l || e.cell_k < 0 || e.cell_l < 0)
                err("edge " + std::to_string(e.id) + ": interior edge must join two distinct cells");
            if (std::abs(e.d - (e.d_k + e.d_l)) > 1e-12 * std::max(1.0, e.d))
                err("edge " + std::to_string(e.id) + ": d_sigma != d_K + d_L");
        }

        const double dk = e.d_k;
        const Cell& ck = mesh.cells[e.cell_k];
        rep.xi = std::min(rep.xi, dk / ck.diam);
        if (e.interior()) {
            const Cell& cl = mesh.cells[e.cell_l];
            rep.xi = std::min(rep.xi, e.d_l / cl.diam);

            // d_K + d_L == |x_K - x_L| iff (x_K, x_L) is orthogonal to sigma.
            const double dist = norm(cl.center - ck.center);
            if (dist <= 0.0) {
                err("edge " + std::to_string(e.id) + ": coincident cell centers");
                continue;
            }
            const double ratio = std::min((e.d_k + e.d_l) / dist, 1.0);
            const double angle = std::acos(ratio);
            rep.max_angle_defect = std::max(rep.max_angle_defect, angle);
            if (angle > angle_tol) rep.orthogonality_violations.push_back({e.id, angle});
            // Also catch center distances inconsistent with the stated d's.
            if (e.d_k + e.d_l > dist * (1.0 + 1e-9))
                err("edge " + std::to_string(e.id) + ": d_K + d_L exceeds |x_K - x_L|");
        }
    }

    rep.xi_ok = rep.xi >= xi_min;
    return rep;
}

} // namespace spinfv
