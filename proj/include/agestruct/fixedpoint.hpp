#pragma once

#include "agestruct/evolution.hpp"
#include "agestruct/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace agestruct {

struct ShellSample {
  double norm;             // ||u||
  double radius;           // r(Q_u)
  double min_q_minus_one;  // min entry of Q_u - I
  bool small;              // drawn below tau0 (else above tau1)
};

/// Sampled sufficient conditions for the conical-shell existence argument:
/// Q_u - I entrywise nonnegative for small densities, r(Q_u) <= 1 for large
/// ones. Advisory only; sampling proves nothing.
struct ShellReport {
  double tau0 = 0.0;
  double tau1 = 0.0;
  std::vector<ShellSample> samples;
  bool small_density_ok = false;
  bool large_density_ok = false;
};

/// Draws `n_samples` random nonnegative fields with ||u|| in [tau0/2, tau0)
/// and as many with ||u|| in [tau1, 2 tau1).
ShellReport check_shell_conditions(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid, double tau0,
                                   double tau1, int n_samples, std::uint64_t seed = 42);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-12;       // on the step and on B - Q(u) B, relative to the max norm of B
  int max_iter = 100000;
  double collapse = 1e-12;  // ||B||_inf below this counts as the trivial solution
  /// Called with every iterate (B, u).
  std::function<void(const Vector&, const DensityField&)> observer;
};

enum class FixedPointStatus { Converged, TrivialCollapse };

struct FixedPointResult {
  FixedPointStatus status;
  DensityField u;
  Vector birth;
  int iterations = 0;
  double residual = 0.0;  // ||B - Q(u) B||_inf
};

/// Damped iteration of (u, B) -> (Pi_u(., 0) B, Q(u) B), with u taken as the
/// self-consistent trajectory of B at every sweep. Throws ConvergenceError
/// when max_iter is exhausted without convergence or collapse.
FixedPointResult solve_fixedpoint(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                  const Vector& birth_init, const FixedPointOptions& options = {});

/// Runs `starts` seeded random initial births and returns the first
/// nontrivial solution (or the last collapse).
FixedPointResult solve_fixedpoint_multistart(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                             const FixedPointOptions& options = {}, std::uint64_t seed = 42,
                                             int starts = 3);

}  // namespace agestruct
