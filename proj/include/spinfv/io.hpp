#ifndef SPINFV_IO_HPP
#define SPINFV_IO_HPP

#include <string>
#include <vector>

#include "spinfv/diagnostics.hpp"
#include "spinfv/state.hpp"

namespace spinfv {

// fields CSV: cell_id,x,y,n0,n1,n2,n3,V
void write_fields_csv(const std::string& path, const Mesh& mesh, const State& state);

// diagnostics CSV: k,t,E,dissipation,min_np,max_np,min_nm,max_nm,max_nperp,
// Mk,flags,current_<contact>...
void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records,
                           const std::vector<std::string>& contact_names,
                           bool outside_hypotheses);

// Generic numeric CSV with a header line.
void write_table_csv(const std::string& path, const std::string& header,
                     const std::vector<std::vector<double>>& rows);

} // namespace spinfv

#endif
