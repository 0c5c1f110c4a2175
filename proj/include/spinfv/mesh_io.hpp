#ifndef SPINFV_MESH_IO_HPP
#define SPINFV_MESH_IO_HPP

#include <iosfwd>
#include <string>

#include "spinfv/mesh.hpp"

namespace spinfv {

// Plain-text mesh format:
//   cells N edges M
//   <id> <cx> <cy> <area> <diam>                     (N cell lines)
//   <id> <kind> <cellK> [cellL] <mx> <my> <length> <dK> [dL]   (M edge lines)
// with kind one of I (interior), D (Dirichlet), N (Neumann) and (mx, my)
// the edge midpoint. Admissibility is checked by the caller, never assumed.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh_file(const Mesh& mesh, const std::string& path);

} // namespace spinfv

#endif
