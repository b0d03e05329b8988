#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "qbohm/grid.hpp"

namespace qbohm {

/// Shortest-exact decimal rendering with up to 17 significant digits.
std::string format_double(double v);

/// Writes `# grid: dim=<d> axis0=<min>,<max>,<n> [axis1=...]` followed by one
/// value per line (1D) or one comma-separated grid row per line (2D).
void write_field_csv(std::ostream& os, const ScalarField& f);
ScalarField read_field_csv(std::istream& is, Quantity quantity = Quantity::dimensionless);

void save_field_csv(const std::string& path, const ScalarField& f);
ScalarField load_field_csv(const std::string& path, Quantity quantity = Quantity::dimensionless);

/// Field CSV with a parallel 0/1 validity column: the grid header, then one
/// `value,mask` line per grid point in storage order.
void write_masked_csv(std::ostream& os, const ScalarField& f, std::span<const std::uint8_t> valid);

std::string grid_header(const Grid& g);
Grid parse_grid_header(const std::string& line);

}  // namespace qbohm
