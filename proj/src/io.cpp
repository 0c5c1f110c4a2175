#include "spinfv/io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace spinfv {

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << std::setprecision(15);
    return out;
}
} // namespace

void write_fields_csv(const std::string& path, const Mesh& mesh, const State& state) {
    std::ofstream out = open_out(path);
    out << "cell_id,x,y,n0,n1,n2,n3,V\n";
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const Cell& c = mesh.cells[k];
        out << k << "," << c.center.x << "," << c.center.y << "," << state.n0.cell(k)
            << "," << state.ns.cell(k, 0) << "," << state.ns.cell(k, 1) << ","
            << state.ns.cell(k, 2) << "," << state.V.cell(k) << "\n";
    }
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records,
                           const std::vector<std::string>& contact_names,
                           bool outside_hypotheses) {
    std::ofstream out = open_out(path);
    out << "k,t,E,dissipation,min_np,max_np,min_nm,max_nm,max_nperp,Mk,flags";
    for (const std::string& name : contact_names) out << ",current_" << name;
    out << "\n";
    for (const DiagnosticsRecord& r : records) {
        out << r.step << "," << r.time << "," << r.energy << "," << r.dissipation << ","
            << r.min_np << "," << r.max_np << "," << r.min_nm << "," << r.max_nm << ","
            << r.max_nperp << "," << r.Mk << "," << r.flag_bits(outside_hypotheses);
        for (double c : r.contact_currents) out << "," << c;
        out << "\n";
    }
}

void write_table_csv(const std::string& path, const std::string& header,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(path);
    out << header << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

} // namespace spinfv
