#include "spinfv/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace spinfv {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("mesh import: " + what);
}

} // namespace

Mesh read_mesh(std::istream& in) {
    std::string tok_cells, tok_edges;
    int n_cells = 0, n_edges = 0;
    if (!(in >> tok_cells >> n_cells >> tok_edges >> n_edges))
        fail("bad header, expected 'cells N edges M'");
    if (tok_cells != "cells" || tok_edges != "edges")
        fail("bad header tokens '" + tok_cells + " ... " + tok_edges + "'");
    if (n_cells < 1 || n_edges < 1) fail("empty mesh");

    Mesh mesh;
    mesh.cells.resize(n_cells);
    for (int i = 0; i < n_cells; ++i) {
        Cell c;
        if (!(in >> c.id >> c.center.x >> c.center.y >> c.area >> c.diam))
            fail("truncated cell line " + std::to_string(i));
        if (c.id < 0 || c.id >= n_cells) fail("cell id out of range");
        mesh.cells[c.id] = c;
    }

    mesh.edges.reserve(n_edges);
    for (int i = 0; i < n_edges; ++i) {
        Edge e;
        std::string kind;
        if (!(in >> e.id >> kind >> e.cell_k)) fail("truncated edge line " + std::to_string(i));
        if (kind == "I") {
            e.kind = EdgeKind::Interior;
            if (!(in >> e.cell_l)) fail("interior edge missing cellL");
        } else if (kind == "D") {
            e.kind = EdgeKind::Dirichlet;
        } else if (kind == "N") {
            e.kind = EdgeKind::Neumann;
        } else {
            fail("unknown edge kind '" + kind + "' (expected I, D, or N)");
        }
        if (!(in >> e.midpoint.x >> e.midpoint.y >> e.length >> e.d_k))
            fail("truncated edge line " + std::to_string(i));
        if (e.interior()) {
            if (!(in >> e.d_l)) fail("interior edge missing dL");
            e.d = e.d_k + e.d_l;
        } else {
            e.d = e.d_k;
        }
        if (e.id < 0 || e.id >= n_edges) fail("edge id out of range");
        if (e.cell_k < 0 || e.cell_k >= n_cells ||
            (e.interior() && (e.cell_l < 0 || e.cell_l >= n_cells)))
            fail("edge " + std::to_string(e.id) + " references unknown cell");
        if (!(e.length > 0.0) || !(e.d > 0.0))
            fail("edge " + std::to_string(e.id) + " has nonpositive measure or distance");
        e.tau = e.length / e.d;
        mesh.edges.push_back(e);
    }

    mesh.finalize();
    return mesh;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "cells " << mesh.n_cells() << " edges " << mesh.n_edges() << "\n";
    out << std::setprecision(17);
    for (const Cell& c : mesh.cells)
        out << c.id << " " << c.center.x << " " << c.center.y << " " << c.area
            << " " << c.diam << "\n";
    for (const Edge& e : mesh.edges) {
        out << e.id << " ";
        switch (e.kind) {
            case EdgeKind::Interior:  out << "I " << e.cell_k << " " << e.cell_l; break;
            case EdgeKind::Dirichlet: out << "D " << e.cell_k; break;
            case EdgeKind::Neumann:   out << "N " << e.cell_k; break;
        }
        out << " " << e.midpoint.x << " " << e.midpoint.y << " " << e.length << " " << e.d_k;
        if (e.interior()) out << " " << e.d_l;
        out << "\n";
    }
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open mesh file for writing: " + path);
    write_mesh(mesh, out);
}

} // namespace spinfv
