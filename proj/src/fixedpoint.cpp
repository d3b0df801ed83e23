#include "agestruct/fixedpoint.hpp"

#include "agestruct/reproduction.hpp"

#include <algorithm>
#include <optional>
#include <random>

namespace agestruct {

ShellReport check_shell_conditions(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid, double tau0,
                                   double tau1, int n_samples, std::uint64_t seed) {
  if (!(tau0 > 0.0) || !(tau1 > tau0)) throw PreconditionError("shell radii must satisfy 0 < tau0 < tau1");
  if (n_samples < 1) throw PreconditionError("need at least one sample per radius");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(0.25, 1.0);
  std::uniform_real_distribution<double> spread(0.0, 1.0);

  ShellReport report;
  report.tau0 = tau0;
  report.tau1 = tau1;
  report.small_density_ok = true;
  report.large_density_ok = true;

  const int nx = mesh.size();
  for (int pass = 0; pass < 2; ++pass) {
    const bool small = pass == 0;
    for (int s = 0; s < n_samples; ++s) {
      DensityField u(grid, nx);
      for (int k = 0; k <= grid.steps(); ++k)
        for (int i = 0; i < nx; ++i) u.values(k, i) = entry(rng);
      const double target = small ? tau0 * (0.5 + 0.5 * spread(rng)) : tau1 * (1.0 + spread(rng));
      u = (target / u.norm()) * u;

      const ReproductionOperator q = assemble_Q(model, mesh, grid, &u);
      const double radius = spectral_radius(q).radius;
      const double min_entry = (q.matrix - Matrix::Identity(nx, nx)).minCoeff();
      report.samples.push_back({u.norm(), radius, min_entry, small});
      if (small && min_entry < 0.0) report.small_density_ok = false;
      if (!small && radius > 1.0 + 1e-9) report.large_density_ok = false;
    }
  }
  return report;
}

FixedPointResult solve_fixedpoint(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                  const Vector& birth_init, const FixedPointOptions& options) {
  if (birth_init.size() != mesh.size()) throw PreconditionError("initial birth does not match the mesh");
  if ((birth_init.array() < 0.0).any()) throw PreconditionError("initial birth must be nonnegative");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw PreconditionError("damping must lie in (0, 1]");

  const double d = options.damping;
  Vector birth = birth_init;
  for (int it = 0; it < options.max_iter; ++it) {
    if (birth.lpNorm<Eigen::Infinity>() < options.collapse) {
      return {FixedPointStatus::TrivialCollapse, DensityField(grid, mesh.size()), Vector::Zero(mesh.size()), it, 0.0};
    }
    DensityField u = march(model, mesh, grid, birth);
    if (options.observer) options.observer(birth, u);
    // With u the trajectory of B, Q(u) B reduces to the birth functional of u.
    const Vector reproduced = birth_functional(model, u);
    const double residual = (birth - reproduced).lpNorm<Eigen::Infinity>();
    const Vector next = (1.0 - d) * birth + d * reproduced;
    const double change = (next - birth).lpNorm<Eigen::Infinity>();
    // Relative to |B| so that a slowly collapsing iterate never counts as converged.
    const double scale = birth.lpNorm<Eigen::Infinity>();
    if (change < options.tol * scale && residual < options.tol * scale) {
      return {FixedPointStatus::Converged, std::move(u), birth, it, residual};
    }
    birth = next;
  }
  throw ConvergenceError("fixed-point iteration exceeded max_iter");
}

FixedPointResult solve_fixedpoint_multistart(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                             const FixedPointOptions& options, std::uint64_t seed, int starts) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.1, 2.0);
  if (starts < 1) throw PreconditionError("need at least one start");
  std::optional<FixedPointResult> last;
  for (int s = 0; s < starts; ++s) {
    Vector init(mesh.size());
    for (int i = 0; i < init.size(); ++i) init(i) = dist(rng);
    FixedPointResult r = solve_fixedpoint(model, mesh, grid, init, options);
    if (r.status == FixedPointStatus::Converged) return r;
    last = std::move(r);
  }
  return std::move(*last);
}

}  // namespace agestruct
