#pragma once

#include "agestruct/continuation.hpp"
#include "agestruct/evolution.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace agestruct {

enum class TableFormat { Csv, Text };

/// One line of a stored branch table.
struct BranchRow {
  int index = 0;
  double n = 0.0;
  double eps = 0.0;
  double r_Qu = 0.0;
  double eq72_residual = 0.0;
  double residual_direct = 0.0;
  double residual_400 = 0.0;
  double min_u = 0.0;
};

/// Shortest-exact decimal form used by every writer ("%.17g").
std::string format_double(double v);

BranchRow to_row(int index, const BranchPoint& p);

/// Columns: index, n, eps, r_Qu, eq72_residual, residual_direct, residual_400, min_u.
/// Csv has a header line; Text is whitespace separated with a '#' header.
void write_branch_table(std::ostream& out, const std::vector<BranchRow>& rows, TableFormat format);

/// Reads either format (detected from the header). Throws ParseError.
std::vector<BranchRow> read_branch_table(std::istream& in);

/// One row per age: a, then the nx nodal values.
void write_profile(std::ostream& out, const DensityField& u, TableFormat format);

/// Inverse of write_profile; the age grid is rebuilt from the age column.
DensityField read_profile(std::istream& in);

void write_vector(std::ostream& out, const std::string& name, const Vector& v, TableFormat format);

}  // namespace agestruct
