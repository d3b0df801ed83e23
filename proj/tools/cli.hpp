#pragma once

#include "agestruct/branch_io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace agestruct::cli {

enum class Command { Normalize, Trace, FixedPoint, Verify };

struct RunConfig {
  Command command = Command::Trace;
  std::string model_path;
  std::optional<int> nx;
  std::optional<int> na;
  double eps0 = 1e-3;
  double step = 0.05;
  int max_points = 50;
  double n_cap = 10.0;
  double norm_cap = 10.0;
  double tol = 1e-10;
  std::uint64_t seed = 42;
  std::string out;    // empty: stdout for normalize, a default name otherwise
  std::string input;  // branch file for verify
  TableFormat format = TableFormat::Csv;
  double damping = 0.5;
  double tau0 = 0.01;
  double tau1 = 10.0;
  int samples = 10;
};

enum ExitStatus { kOk = 0, kInvariantFailure = 1, kIoFailure = 2 };

/// Throws PreconditionError for out-of-range settings.
void validate(const RunConfig& config);

/// Runs one command; diagnostics go to `log`, normalized models (without
/// --out) to `out`. Returns an ExitStatus value.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Path of the profile file for branch point `index` next to `branch_path`.
std::string profile_path(const std::string& branch_path, int index, TableFormat format);

int main(int argc, char** argv);

}  // namespace agestruct::cli
