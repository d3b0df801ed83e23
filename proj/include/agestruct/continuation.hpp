#pragma once

#include "agestruct/evolution.hpp"
#include "agestruct/linearized.hpp"
#include "agestruct/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace agestruct {

struct ContinuationOptions {
  double eps0 = 1e-3;           // predictor scale of the first step off (1, 0)
  double step = 0.05;           // initial and largest pseudo-arclength step
  double step_min = 1e-4;
  int max_points = 50;          // nontrivial points to accept
  double n_cap = 10.0;
  double norm_cap = 10.0;
  double tol_corrector = 1e-10;
  double tol_pos = 1e-10;
  double tol_72 = 1e-6;
  int max_newton = 30;
  double spectral_tol = 1e-12;
};

/// Solution (n, u) of the n-parametrized problem with diagnostics.
struct BranchPoint {
  explicit BranchPoint(DensityField field) : u(std::move(field)), birth(u.birth()) {}

  double n = 1.0;
  DensityField u;
  Vector birth;                  // B = u(0, .)
  double r_Qu = 0.0;             // spectral radius of Q_u
  double eq72_residual = 0.0;    // |n r(Q_u) - 1|
  double residual_direct = 0.0;  // ||B - n l(u)||_inf with u the self-consistent trajectory of B
  double residual_400 = 0.0;     // ||u - (n-1/2) L u - H(n-1/2, u)||; NaN without a linear cache
  double min_u = 0.0;
  double eps = 0.0;              // ||u||
  bool trivial = false;
  int newton_iterations = 0;
};

enum class Termination { MaxPoints, NCap, NormCap, ReturnedToTrivial };

struct Branch {
  std::vector<BranchPoint> points;  // points[0] is the bifurcation point (1, 0)
  Termination termination = Termination::MaxPoints;
};

/// Everything the corrector needs; holds the linear solve cache when the
/// model is normalized (r(Q_0) < 2), which the reformulation residual uses.
class BranchProblem {
 public:
  BranchProblem(ModelSpec model, SpatialMesh mesh, AgeGrid grid, ContinuationOptions options = {});

  const ModelSpec& model() const { return model_; }
  const SpatialMesh& mesh() const { return mesh_; }
  const AgeGrid& grid() const { return grid_; }
  const ContinuationOptions& options() const { return options_; }
  const std::optional<LinearSolveCache>& cache() const { return cache_; }
  /// Perron pair of Q_0.
  const PerronPair<double>& perron() const { return perron_; }

  /// G(B; n) = B - n l(u(B)) together with the trajectory u(B).
  Vector residual(const Vector& birth, double n, DensityField* trajectory = nullptr) const;

 private:
  ModelSpec model_;
  SpatialMesh mesh_;
  AgeGrid grid_;
  ContinuationOptions options_;
  std::optional<LinearSolveCache> cache_;
  PerronPair<double> perron_;
};

/// Constraint <t, (B, n) - (B_p, n_p)> = 0 in the inner product
/// <(B, n), (B', n')> = B.B'/nx + n n'.
struct ArclengthPlane {
  Vector point_birth;
  double point_n;
  Vector tangent_birth;
  double tangent_n;
};

/// Newton with a finite-difference Jacobian on the birth vector B (and on n in
/// arclength mode). Without a plane, n is held fixed. Throws ConvergenceError
/// on divergence and InvariantError on a negative density.
BranchPoint correct(const BranchProblem& problem, double n, const Vector& guess_birth,
                    const ArclengthPlane* plane = nullptr);

inline BranchPoint correct(const BranchProblem& problem, double n, const DensityField& guess,
                           const ArclengthPlane* plane = nullptr) {
  return correct(problem, n, guess.birth(), plane);
}

/// Fills the diagnostics of a converged (n, B).
BranchPoint diagnose(const BranchPoint& point, const BranchProblem& problem);

/// Predictor eps0 * Pi_0(., 0) B_perron at n = 1, corrected on the plane
/// through it orthogonal to (B_perron, 0). eps0 == 0 returns (1, 0).
BranchPoint first_step(const BranchProblem& problem, double eps0);

/// The trivial point (1, 0) with diagnostics.
BranchPoint bifurcation_point(const BranchProblem& problem);

/// First step, then secant predictor / pseudo-arclength corrector until a cap
/// is hit. Throws ConvergenceError after two corrector failures at step_min.
Branch trace_branch(const BranchProblem& problem);

/// Point on the branch with ||u|| == target, located between the two
/// accepted points that bracket it.
BranchPoint locate_norm(const BranchProblem& problem, const Branch& branch, double target);

/// ||u - eps phi|| / eps with eps = ||u|| and phi = Pi_0(., 0) B_perron scaled
/// to ||phi|| = 1; tends to zero along the branch as eps -> 0.
double expansion_defect(const BranchProblem& problem, const BranchPoint& point);

struct BranchStats {
  double sigma_inf = 0.0;  // inf of visited n
  double sigma_sup = 0.0;  // sup of visited n
  double r_inf = 0.0;      // inf of visited r(Q_u)
  double r_sup = 0.0;      // sup of visited r(Q_u)
  double max_eq72 = 0.0;
  int points = 0;

  double sup_times_rinf() const { return sigma_sup * r_inf; }
  double inf_times_rsup() const { return sigma_inf * r_sup; }
  bool identities_hold(double tol) const {
    return max_eq72 <= tol && std::abs(sup_times_rinf() - 1.0) <= tol && std::abs(inf_times_rsup() - 1.0) <= tol;
  }
};

/// Statistics over the nontrivial points. Throws PreconditionError when there are none.
BranchStats branch_stats(const Branch& branch);

const char* to_string(Termination t);

}  // namespace agestruct
