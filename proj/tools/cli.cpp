#include "cli.hpp"

#include "agestruct/continuation.hpp"
#include "agestruct/fixedpoint.hpp"
#include "agestruct/linearized.hpp"
#include "agestruct/reproduction.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace agestruct::cli {

namespace {

constexpr double kBranchIdentityTol = 1e-6;
constexpr double kReformulationTol = 1e-5;

const char* extension(TableFormat f) { return f == TableFormat::Csv ? ".csv" : ".txt"; }

std::string stem_of(const std::string& path) {
  std::filesystem::path p(path);
  return (p.parent_path() / p.stem()).string();
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path + "'");
  return f;
}

ModelSpec load_with_overrides(const RunConfig& c) {
  if (c.model_path.empty()) throw PreconditionError("--model is required");
  ModelSpec model = load_model(c.model_path);
  if (c.nx) model.nx = *c.nx;
  if (c.na) model.na = *c.na;
  model.validate();
  return model;
}

int run_normalize(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const ModelSpec model = load_with_overrides(c);
  const SpatialMesh mesh = SpatialMesh::for_model(model);
  const AgeGrid grid = AgeGrid::for_model(model);
  const Normalization norm = normalize(model, mesh, grid);
  const double r_after = spectral_radius(assemble_Q(norm.model, mesh, grid)).radius;
  log << "r_before " << format_double(norm.r_before) << "\n";
  log << "r_after " << format_double(r_after) << "\n";
  if (c.out.empty()) {
    out << serialize_model(norm.model);
  } else {
    auto f = open_output(c.out);
    f << serialize_model(norm.model);
  }
  if (std::abs(r_after - 1.0) > 1e-10) {
    log << "error: normalization failed, |r(Q_0) - 1| = " << format_double(std::abs(r_after - 1.0)) << "\n";
    return kInvariantFailure;
  }
  return kOk;
}

int run_trace(const RunConfig& c, std::ostream& log) {
  const ModelSpec raw = load_with_overrides(c);
  const SpatialMesh mesh = SpatialMesh::for_model(raw);
  const AgeGrid grid = AgeGrid::for_model(raw);
  const Normalization norm = normalize(raw, mesh, grid);
  log << "r_before " << format_double(norm.r_before) << "\n";

  ContinuationOptions opt;
  opt.eps0 = c.eps0;
  opt.step = c.step;
  opt.step_min = std::min(opt.step_min, c.step);
  opt.max_points = c.max_points;
  opt.n_cap = c.n_cap;
  opt.norm_cap = c.norm_cap;
  opt.tol_corrector = c.tol;
  const BranchProblem problem(norm.model, mesh, grid, opt);
  const Branch branch = trace_branch(problem);

  const std::string path = c.out.empty() ? std::string("branch") + extension(c.format) : c.out;
  std::vector<BranchRow> rows;
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    rows.push_back(to_row(static_cast<int>(i), branch.points[i]));
    auto f = open_output(profile_path(path, static_cast<int>(i), c.format));
    write_profile(f, branch.points[i].u, c.format);
  }
  {
    auto f = open_output(path);
    write_branch_table(f, rows, c.format);
  }
  log << "points " << branch.points.size() << " termination " << to_string(branch.termination) << "\n";

  int status = kOk;
  for (const BranchRow& r : rows) {
    if (r.eq72_residual > kBranchIdentityTol) {
      log << "error: branch identity n*r(Q_u) = 1 violated at index " << r.index << " (eq72_residual "
          << format_double(r.eq72_residual) << ")\n";
      status = kInvariantFailure;
    }
    if (r.residual_400 > kReformulationTol) {
      log << "error: reformulation residual exceeded at index " << r.index << " (residual_400 "
          << format_double(r.residual_400) << ")\n";
      status = kInvariantFailure;
    }
  }
  return status;
}

int run_fixedpoint(const RunConfig& c, std::ostream& log) {
  const ModelSpec model = load_with_overrides(c);
  const SpatialMesh mesh = SpatialMesh::for_model(model);
  const AgeGrid grid = AgeGrid::for_model(model);

  const ShellReport shell = check_shell_conditions(model, mesh, grid, c.tau0, c.tau1, c.samples, c.seed);
  FixedPointOptions opt;
  opt.damping = c.damping;
  opt.tol = c.tol;
  const FixedPointResult res = solve_fixedpoint_multistart(model, mesh, grid, opt, c.seed);
  const double r = spectral_radius(assemble_Q(model, mesh, grid, &res.u)).radius;

  const std::string path = c.out.empty() ? std::string("fixedpoint") + extension(c.format) : c.out;
  const std::string stem = stem_of(path);
  {
    auto f = open_output(stem + "_birth" + extension(c.format));
    write_vector(f, "B", res.birth, c.format);
  }
  {
    auto f = open_output(stem + "_profile" + extension(c.format));
    write_profile(f, res.u, c.format);
  }
  {
    auto f = open_output(stem + "_shell" + extension(c.format));
    const char sep = c.format == TableFormat::Csv ? ',' : ' ';
    if (c.format == TableFormat::Text) f << "# ";
    f << "norm" << sep << "r_Qu" << sep << "min_q_minus_one" << sep << "small\n";
    for (const ShellSample& s : shell.samples)
      f << format_double(s.norm) << sep << format_double(s.radius) << sep << format_double(s.min_q_minus_one) << sep
        << (s.small ? 1 : 0) << "\n";
  }
  const bool converged = res.status == FixedPointStatus::Converged;
  {
    auto f = open_output(path);
    const char sep = c.format == TableFormat::Csv ? ',' : ' ';
    if (c.format == TableFormat::Text) f << "# ";
    f << "key" << sep << "value\n";
    f << "status" << sep << (converged ? "converged" : "trivial") << "\n";
    f << "iterations" << sep << res.iterations << "\n";
    f << "residual" << sep << format_double(res.residual) << "\n";
    f << "r_Qu" << sep << format_double(r) << "\n";
    f << "norm" << sep << format_double(res.u.norm()) << "\n";
    f << "min_u" << sep << format_double(res.u.min()) << "\n";
    f << "tau0" << sep << format_double(shell.tau0) << "\n";
    f << "tau1" << sep << format_double(shell.tau1) << "\n";
    f << "small_density_ok" << sep << shell.small_density_ok << "\n";
    f << "large_density_ok" << sep << shell.large_density_ok << "\n";
  }
  log << "status " << (converged ? "converged" : "trivial") << " iterations " << res.iterations << " r_Qu "
      << format_double(r) << "\n";
  if (!shell.small_density_ok) log << "warning: Q_u - I has negative entries for some small sampled densities\n";
  if (!shell.large_density_ok) log << "warning: r(Q_u) > 1 for some large sampled densities\n";

  if (!converged) {
    log << "error: fixed-point iteration collapsed to the trivial solution\n";
    return kInvariantFailure;
  }
  if (std::abs(r - 1.0) > kBranchIdentityTol) {
    log << "error: equilibrium identity r(Q_u) = 1 violated (r_Qu " << format_double(r) << ")\n";
    return kInvariantFailure;
  }
  return kOk;
}

int run_verify(const RunConfig& c, std::ostream& log) {
  if (c.input.empty()) throw PreconditionError("--input is required for verify");
  std::vector<BranchRow> rows;
  {
    auto f = open_input(c.input);
    rows = read_branch_table(f);
  }
  const TableFormat format =
      std::filesystem::path(c.input).extension() == ".txt" ? TableFormat::Text : TableFormat::Csv;

  int failures = 0;
  auto fail = [&](const std::string& what, int index, double value) {
    log << "error: " << what << " at index " << index << " (" << format_double(value) << ")\n";
    ++failures;
  };

  for (const BranchRow& r : rows) {
    const double identity = std::abs(r.n * r.r_Qu - 1.0);
    if (!(identity <= kBranchIdentityTol)) fail("branch identity n*r(Q_u) = 1 violated", r.index, identity);
    if (!(std::abs(identity - r.eq72_residual) <= 1e-12 + 1e-9 * identity))
      fail("eq72_residual column inconsistent with n and r_Qu", r.index, r.eq72_residual);
    if (r.residual_400 > kReformulationTol) fail("reformulation residual exceeded", r.index, r.residual_400);
    if (r.min_u < -1e-10) fail("negative density", r.index, r.min_u);
  }

  if (!c.model_path.empty()) {
    // Replay the diagnostics from the stored profiles.
    const ModelSpec raw = load_model(c.model_path);
    std::map<int, DensityField> profiles;
    for (const BranchRow& r : rows) {
      auto f = open_input(profile_path(c.input, r.index, format));
      profiles.emplace(r.index, read_profile(f));
    }
    if (!profiles.empty()) {
      const DensityField& first = profiles.begin()->second;
      ModelSpec m = raw;
      m.nx = first.nodes();
      m.na = first.grid.steps();
      const SpatialMesh mesh = SpatialMesh::for_model(m);
      const AgeGrid grid = first.grid;
      const BranchProblem problem(normalize(m, mesh, grid).model, mesh, grid);

      std::vector<std::pair<double, double>> defects;  // (eps, expansion defect)
      for (const BranchRow& r : rows) {
        BranchPoint p(profiles.at(r.index));
        p.n = r.n;
        p.trivial = p.birth.lpNorm<Eigen::Infinity>() <= 1e-9;
        p = diagnose(p, problem);
        if (!(p.eq72_residual <= kBranchIdentityTol))
          fail("branch identity n*r(Q_u) = 1 violated by stored profile", r.index, p.eq72_residual);
        const double direct_tol = 1e-8 * std::max(1.0, p.birth.lpNorm<Eigen::Infinity>());
        if (!(p.residual_direct <= direct_tol))
          fail("birth condition B = n l(u) violated by stored profile", r.index, p.residual_direct);
        if (p.residual_400 > kReformulationTol)
          fail("reformulation residual exceeded by stored profile", r.index, p.residual_400);
        if (!p.trivial) defects.emplace_back(p.eps, expansion_defect(problem, p));
      }
      std::sort(defects.begin(), defects.end());
      if (defects.size() >= 2 && defects[0].first < defects[1].first && !(defects[0].second < defects[1].second)) {
        log << "error: local expansion u = eps Pi_0 B + o(eps) violated near the bifurcation point (defect "
            << format_double(defects[0].second) << " at eps " << format_double(defects[0].first) << ")\n";
        ++failures;
      }
    }
  }
  log << "checked " << rows.size() << " points, " << failures << " violations\n";
  return failures == 0 ? kOk : kInvariantFailure;
}

}  // namespace

void validate(const RunConfig& c) {
  if (!(c.tol > 0.0)) throw PreconditionError("--tol must be positive");
  if (!(c.n_cap > 1.0)) throw PreconditionError("--n-cap must exceed 1");
  if (!(c.norm_cap > 1.0)) throw PreconditionError("--norm-cap must exceed 1");
  if (!(c.eps0 > 0.0)) throw PreconditionError("--eps0 must be positive");
  if (!(c.step > 0.0)) throw PreconditionError("--step must be positive");
  if (c.max_points < 1) throw PreconditionError("--max-points must be at least 1");
  if (!(c.damping > 0.0 && c.damping <= 1.0)) throw PreconditionError("--damping must lie in (0, 1]");
  if (!(c.tau0 > 0.0 && c.tau0 < c.tau1)) throw PreconditionError("need 0 < --tau0 < --tau1");
  if (c.samples < 1) throw PreconditionError("--samples must be at least 1");
}

std::string profile_path(const std::string& branch_path, int index, TableFormat format) {
  return stem_of(branch_path) + "_profile_" + std::to_string(index) + extension(format);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
  try {
    validate(config);
    switch (config.command) {
      case Command::Normalize: return run_normalize(config, out, log);
      case Command::Trace: return run_trace(config, log);
      case Command::FixedPoint: return run_fixedpoint(config, log);
      case Command::Verify: return run_verify(config, log);
    }
  } catch (const ParseError& e) {
    log << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const IoError& e) {
    log << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const PreconditionError& e) {
    log << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kInvariantFailure;
  }
  return kInvariantFailure;
}

int main(int argc, char** argv) {
  CLI::App app{"Equilibria and bifurcation branches of age- and space-structured population models"};
  RunConfig c;
  std::string command, format = "csv";
  int nx = 0, na = 0;
  app.add_option("command", command, "normalize | trace | fixedpoint | verify")
      ->required()
      ->check(CLI::IsMember({"normalize", "trace", "fixedpoint", "verify"}));
  app.add_option("--model", c.model_path, "model file");
  app.add_option("--input", c.input, "branch file to verify");
  auto* nx_opt = app.add_option("--nx", nx, "spatial unknowns");
  auto* na_opt = app.add_option("--na", na, "age steps");
  app.add_option("--eps0", c.eps0, "first continuation step scale");
  app.add_option("--step", c.step, "pseudo-arclength step");
  app.add_option("--max-points", c.max_points, "nontrivial branch points");
  app.add_option("--n-cap", c.n_cap, "stop when n exceeds this");
  app.add_option("--norm-cap", c.norm_cap, "stop when ||u|| exceeds this");
  app.add_option("--tol", c.tol, "corrector / fixed-point tolerance");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--out", c.out, "output path");
  app.add_option("--format", format, "csv | txt")->check(CLI::IsMember({"csv", "txt"}));
  app.add_option("--damping", c.damping, "fixed-point damping");
  app.add_option("--tau0", c.tau0, "small shell radius");
  app.add_option("--tau1", c.tau1, "large shell radius");
  app.add_option("--samples", c.samples, "shell samples per radius");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kIoFailure;
  }
  if (*nx_opt) c.nx = nx;
  if (*na_opt) c.na = na;
  c.format = format == "txt" ? TableFormat::Text : TableFormat::Csv;
  if (command == "normalize") c.command = Command::Normalize;
  else if (command == "trace") c.command = Command::Trace;
  else if (command == "fixedpoint") c.command = Command::FixedPoint;
  else c.command = Command::Verify;
  return run(c, std::cout, std::cerr);
}

}  // namespace agestruct::cli
