#pragma once

#include "agestruct/evolution.hpp"
#include "agestruct/reproduction.hpp"
#include "agestruct/types.hpp"

namespace agestruct {

/// Factored data for the linear problem
///
///     (u_{k+1} - u_k)/da + A_0(a_{k+1}) u_{k+1} = h2_k,    u_0 - l0(u)/2 = h1
///
/// around u == 0, where l0(u) = cb b(0) sum_k w_k u_k. Requires a normalized
/// model (r(Q_0) == 1), which makes I - Q_0/2 invertible.
class LinearSolveCache {
 public:
  LinearSolveCache(ModelSpec normalized, SpatialMesh mesh, AgeGrid grid);

  const ModelSpec& model() const { return model_; }
  const SpatialMesh& mesh() const { return mesh_; }
  const AgeGrid& grid() const { return grid_; }
  const EvolutionOperator& linear_evolution() const { return linear_; }
  const ReproductionOperator& q0() const { return q0_; }
  double q0_radius() const { return q0_radius_; }

  Vector ell0(const DensityField& u) const { return linear_birth_functional(model_, u); }
  /// (I - Q_0/2)^{-1} v
  Vector solve_half_shift(const Vector& v) const { return lu_.solve(v); }

 private:
  ModelSpec model_;
  SpatialMesh mesh_;
  AgeGrid grid_;
  EvolutionOperator linear_;
  ReproductionOperator q0_;
  double q0_radius_;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// u = Pi_0(., 0) w + K_0 h2 with w = (I - Q_0/2)^{-1}(l0(K_0 h2)/2 + h1).
DensityField solve_S(const LinearSolveCache& cache, const Vector& h1, const DensityField& h2);

/// Lu = S(l0(u), 0)
DensityField apply_L(const LinearSolveCache& cache, const DensityField& u);

/// H(lambda, u) = S((lambda + 1/2) l*(u), f) with the age forcing
/// f_k = -(A(u_k, a_{k+1}) - A_0(a_{k+1})) u_{k+1}, matching the lagged
/// coefficients of the implicit steps so that discrete solutions satisfy
/// u = lambda L u + H(lambda, u) to solver precision.
DensityField apply_H(const LinearSolveCache& cache, double lambda, const DensityField& u);

/// ||u - (n - 1/2) L u - H(n - 1/2, u)||
double reformulation_residual(const LinearSolveCache& cache, double n, const DensityField& u);

/// Max-norm residuals of the two equations solved by S.
struct LinearProblemResidual {
  double age_equation;
  double birth_condition;
};
LinearProblemResidual linear_problem_residual(const LinearSolveCache& cache, const Vector& h1,
                                              const DensityField& h2, const DensityField& u);

/// Dominant eigenvalue of L by power iteration on density fields.
double dominant_eigenvalue_L(const LinearSolveCache& cache, double tol = 1e-12, int max_iter = 10000);

}  // namespace agestruct
