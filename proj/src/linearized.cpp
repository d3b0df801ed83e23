#include "agestruct/linearized.hpp"

#include <cmath>

namespace agestruct {

LinearSolveCache::LinearSolveCache(ModelSpec normalized, SpatialMesh mesh, AgeGrid grid)
    : model_(std::move(normalized)),
      mesh_(mesh),
      grid_(grid),
      linear_(build_evolution(model_, mesh_, grid_)),
      q0_(assemble_Q(model_, linear_)),
      q0_radius_(spectral_radius(q0_).radius) {
  if (!(q0_radius_ < 2.0)) throw PreconditionError("I - Q_0/2 is not invertible: r(Q_0) >= 2 (normalize the model)");
  const Eigen::Index n = q0_.matrix.rows();
  lu_.compute(Matrix::Identity(n, n) - 0.5 * q0_.matrix);
}

DensityField solve_S(const LinearSolveCache& cache, const Vector& h1, const DensityField& h2) {
  const DensityField k0 = apply_K0(cache.linear_evolution(), h2);
  const Vector w = cache.solve_half_shift(0.5 * cache.ell0(k0) + h1);
  return propagate(cache.linear_evolution(), w) + k0;
}

DensityField apply_L(const LinearSolveCache& cache, const DensityField& u) {
  return solve_S(cache, cache.ell0(u), DensityField(u.grid, u.nodes()));
}

DensityField apply_H(const LinearSolveCache& cache, double lambda, const DensityField& u) {
  const ModelSpec& model = cache.model();
  const AgeGrid& grid = cache.grid();
  DensityField forcing(grid, u.nodes());
  for (int k = 0; k < grid.steps(); ++k) {
    const double age = grid.age(k + 1);
    const Vector slice = u.row(k);
    const Vector next = u.row(k + 1);
    const Vector full = assemble(model, cache.mesh(), age, slice).matrix * next;
    const Vector lin = assemble(model, cache.mesh(), age).matrix * next;
    forcing.values.row(k) = -(full - lin).transpose();
  }
  return solve_S(cache, (lambda + 0.5) * nonlinear_birth_functional(model, u), forcing);
}

double reformulation_residual(const LinearSolveCache& cache, double n, const DensityField& u) {
  const double lambda = n - 0.5;
  return (u - lambda * apply_L(cache, u) - apply_H(cache, lambda, u)).norm();
}

LinearProblemResidual linear_problem_residual(const LinearSolveCache& cache, const Vector& h1,
                                              const DensityField& h2, const DensityField& u) {
  const AgeGrid& grid = cache.grid();
  double age_eq = 0.0;
  for (int k = 0; k < grid.steps(); ++k) {
    const Vector next = u.row(k + 1);
    const Vector lhs = (next - u.row(k)) / grid.da() + assemble(cache.model(), cache.mesh(), grid.age(k + 1)).matrix * next;
    age_eq = std::max(age_eq, (lhs - h2.row(k)).lpNorm<Eigen::Infinity>());
  }
  const double birth = (u.birth() - 0.5 * cache.ell0(u) - h1).lpNorm<Eigen::Infinity>();
  return {age_eq, birth};
}

double dominant_eigenvalue_L(const LinearSolveCache& cache, double tol, int max_iter) {
  DensityField x(cache.grid(), Matrix::Ones(cache.grid().steps() + 1, cache.mesh().size()));
  x = (1.0 / x.norm()) * x;
  double previous = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    DensityField y = apply_L(cache, x);
    const double value = y.norm();  // x has unit norm
    if (value == 0.0) return 0.0;
    x = (1.0 / value) * y;
    if (it > 0 && std::abs(value - previous) <= tol * value) return value;
    previous = value;
  }
  throw ConvergenceError("power iteration on L did not converge");
}

}  // namespace agestruct
