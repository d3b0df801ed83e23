#include "agestruct/reproduction.hpp"

#include <cmath>

namespace agestruct {

namespace {

constexpr double kNormalizationTol = 1e-10;

Vector fertility_profile(const ModelSpec& model, const Vector& u) {
  return u.unaryExpr([&](double v) { return model.fertility(v); });
}

}  // namespace

ReproductionOperator assemble_Q(const ModelSpec& model, const EvolutionOperator& ev) {
  const AgeGrid& grid = ev.grid();
  const int n = ev.nodes();
  const Vector w = grid.trapezoid_weights();
  const auto& frozen = ev.frozen();
  auto fertility_at = [&](int k) {
    return frozen ? fertility_profile(model, frozen->row(k)) : Vector::Constant(n, model.fertility(0.0));
  };

  Matrix pi = Matrix::Identity(n, n);
  Matrix q = w(0) * fertility_at(0).asDiagonal() * pi;
  for (int k = 0; k < grid.steps(); ++k) {
    ev.step(k, pi);
    q.noalias() += w(k + 1) * fertility_at(k + 1).asDiagonal() * pi;
  }
  if (!q.allFinite()) throw InvariantError("non-finite entry in the reproduction matrix");
  return {std::move(q), ev.is_linear()};
}

ReproductionOperator assemble_Q(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                const DensityField* u) {
  return assemble_Q(model, build_evolution(model, mesh, grid, u));
}

PerronPair<double> spectral_radius(const ReproductionOperator& q, double tol, int max_iter) {
  return perron_pair(q.matrix, tol, max_iter);
}

CharacteristicValues characteristic_values(const ReproductionOperator& q, int k) {
  return characteristic_values(q.matrix, k);
}

Normalization normalize(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid) {
  const EvolutionOperator linear = build_evolution(model, mesh, grid);
  const double r_before = spectral_radius(assemble_Q(model, linear)).radius;
  if (!(r_before > 0.0)) throw InvariantError("r(Q_0) must be positive");

  ModelSpec out = model;
  out.birth_scale = model.birth_scale / r_before;
  for (int pass = 0; pass < 2; ++pass) {
    const double r = spectral_radius(assemble_Q(out, linear)).radius;
    if (std::abs(r - 1.0) <= kNormalizationTol) break;
    out.birth_scale /= r;
  }
  return {std::move(out), r_before};
}

Vector birth_functional(const ModelSpec& model, const DensityField& u) {
  const Vector w = u.grid.trapezoid_weights();
  Vector out = Vector::Zero(u.nodes());
  for (int k = 0; k < u.ages(); ++k) {
    const Vector row = u.row(k);
    out += w(k) * fertility_profile(model, row).cwiseProduct(row);
  }
  return out;
}

Vector linear_birth_functional(const ModelSpec& model, const DensityField& u) {
  const Vector w = u.grid.trapezoid_weights();
  return model.fertility(0.0) * (u.values.transpose() * w);
}

Vector nonlinear_birth_functional(const ModelSpec& model, const DensityField& u) {
  const Vector w = u.grid.trapezoid_weights();
  const double f0 = model.fertility(0.0);
  Vector out = Vector::Zero(u.nodes());
  for (int k = 0; k < u.ages(); ++k) {
    const Vector row = u.row(k);
    out += w(k) * (fertility_profile(model, row).array() - f0).matrix().cwiseProduct(row);
  }
  return out;
}

}  // namespace agestruct
