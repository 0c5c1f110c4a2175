#include "spinfv/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinfv {

State make_state(const Mesh& mesh, const InitialData& initial,
                 const BoundaryData& boundary) {
    boundary.validate(mesh);
    State s = State::zero(mesh);
    s.n0 = initial.n0;
    s.ns = initial.ns;
    for (int slot = 0; slot < mesh.n_dirichlet(); ++slot) {
        s.n0.trace(slot) = boundary.n_trace[slot];
        s.V.trace(slot) = boundary.V_trace[slot];
        for (int c = 0; c < 3; ++c) s.ns.trace(slot, c) = 0.0;
    }
    return s;
}

double state_max_diff(const State& a, const State& b) {
    double m = 0.0;
    const int n = a.n0.n_cells();
    for (int k = 0; k < n; ++k) {
        m = std::max(m, std::abs(a.n0.cell(k) - b.n0.cell(k)));
        for (int c = 0; c < 3; ++c)
            m = std::max(m, std::abs(a.ns.cell(k, c) - b.ns.cell(k, c)));
        m = std::max(m, std::abs(a.V.cell(k) - b.V.cell(k)));
    }
    return m;
}

double state_l2_diff(const State& a, const State& b, const Mesh& mesh) {
    double s = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double w = mesh.cells[k].area;
        double d = a.n0.cell(k) - b.n0.cell(k);
        s += w * d * d;
        for (int c = 0; c < 3; ++c) {
            d = a.ns.cell(k, c) - b.ns.cell(k, c);
            s += w * d * d;
        }
        d = a.V.cell(k) - b.V.cell(k);
        s += w * d * d;
    }
    return std::sqrt(s);
}

} // namespace spinfv
