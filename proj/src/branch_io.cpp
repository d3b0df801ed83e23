#include "agestruct/branch_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace agestruct {

namespace {

constexpr const char* kColumns[] = {"index", "n", "eps", "r_Qu", "eq72_residual", "residual_direct", "residual_400",
                                    "min_u"};

char separator(TableFormat f) { return f == TableFormat::Csv ? ',' : ' '; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  const bool csv = line.find(',') != std::string::npos;
  std::istringstream in(line);
  if (csv) {
    while (std::getline(in, cell, ',')) out.push_back(cell);
  } else {
    while (in >> cell) out.push_back(cell);
  }
  return out;
}

double to_double(const std::string& s, int line, int col) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line, col, "expected a number, got '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

BranchRow to_row(int index, const BranchPoint& p) {
  return {index, p.n, p.eps, p.r_Qu, p.eq72_residual, p.residual_direct, p.residual_400, p.min_u};
}

void write_branch_table(std::ostream& out, const std::vector<BranchRow>& rows, TableFormat format) {
  const char sep = separator(format);
  if (format == TableFormat::Text) out << "# ";
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? std::string(1, sep) : "") << kColumns[i];
  out << '\n';
  for (const BranchRow& r : rows) {
    out << r.index;
    for (double v : {r.n, r.eps, r.r_Qu, r.eq72_residual, r.residual_direct, r.residual_400, r.min_u})
      out << sep << format_double(v);
    out << '\n';
  }
}

std::vector<BranchRow> read_branch_table(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<BranchRow> rows;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      std::string h = line;
      if (h.rfind("# ", 0) == 0) h = h.substr(2);
      const auto cols = split(h);
      if (cols.size() != std::size(kColumns) || cols[0] != "index")
        throw ParseError(line_no, 1, "not a branch table header");
      header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != std::size(kColumns)) throw ParseError(line_no, 1, "expected 8 columns");
    BranchRow r;
    r.index = static_cast<int>(to_double(cells[0], line_no, 1));
    double* fields[] = {&r.n, &r.eps, &r.r_Qu, &r.eq72_residual, &r.residual_direct, &r.residual_400, &r.min_u};
    for (int c = 0; c < 7; ++c) *fields[c] = to_double(cells[static_cast<std::size_t>(c + 1)], line_no, c + 2);
    rows.push_back(r);
  }
  if (!header) throw ParseError(line_no, 1, "empty branch table");
  return rows;
}

void write_profile(std::ostream& out, const DensityField& u, TableFormat format) {
  const char sep = separator(format);
  if (format == TableFormat::Text) out << "# ";
  out << "a";
  for (int i = 0; i < u.nodes(); ++i) out << sep << "u" << i + 1;
  out << '\n';
  for (int k = 0; k < u.ages(); ++k) {
    out << format_double(u.grid.age(k));
    for (int i = 0; i < u.nodes(); ++i) out << sep << format_double(u.values(k, i));
    out << '\n';
  }
}

DensityField read_profile(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == 'a') continue;
    const auto cells = split(line);
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(to_double(cells[c], line_no, static_cast<int>(c) + 1));
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(line_no, 1, "ragged profile row");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3 || rows.front().size() < 2) throw ParseError(line_no, 1, "profile too small");
  const AgeGrid grid(static_cast<int>(rows.size()) - 1, rows.back()[0]);
  DensityField u(grid, static_cast<int>(rows.front().size()) - 1);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 1; i < rows[k].size(); ++i)
      u.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - 1)) = rows[k][i];
  return u;
}

void write_vector(std::ostream& out, const std::string& name, const Vector& v, TableFormat format) {
  const char sep = separator(format);
  if (format == TableFormat::Text) out << "# ";
  out << "i" << sep << name << '\n';
  for (int i = 0; i < v.size(); ++i) out << i + 1 << sep << format_double(v(i)) << '\n';
}

}  // namespace agestruct
