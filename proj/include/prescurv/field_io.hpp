#pragma once

// CSV persistence for nodal fields.  Layout per file:
//   # kind=annulus r_in=... r_out=... n_r=... n_theta=... field=<name>
//   i,j,coord1,coord2,value
// with 17 significant digits on every real, so write/read round-trips
// bit-exactly.  A meta.json sidecar in the same directory carries the grid
// spec; reads cross-check it against the CSV header.

#include <filesystem>
#include <string>

#include "prescurv/grid.hpp"
#include "prescurv/solver.hpp"

namespace prescurv {

// writes <dir>/<name>.csv and refreshes <dir>/meta.json; errors if an
// existing meta.json describes a different grid
void write_field(const std::filesystem::path& dir, const std::string& name,
                 const ScalarField& f);

// rejects NaN values and any header/meta.json disagreement
ScalarField read_field(const std::filesystem::path& csv_path);

GridPtr grid_from_meta(const std::filesystem::path& meta_path);

// fixed columns: iter,S,b_l2,grad_norm,step,lap_sigma_l2
void write_history(const std::filesystem::path& path,
                   const std::vector<IterationRecord>& history);

std::vector<IterationRecord> read_history(const std::filesystem::path& path);

std::string format_real(double x);  // %.17g

}  // namespace prescurv
