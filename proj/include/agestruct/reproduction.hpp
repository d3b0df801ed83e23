#pragma once

#include "agestruct/evolution.hpp"
#include "agestruct/spectral.hpp"
#include "agestruct/types.hpp"

namespace agestruct {

/// Net reproduction matrix Q_u = sum_k w_k diag(cb b(u(a_k))) Pi_u(a_k, 0)
/// with trapezoid weights w_k. Entrywise nonnegative.
struct ReproductionOperator {
  Matrix matrix;
  bool from_zero = true;  // built from the linear evolution (u == 0)
};

/// Uses the density frozen in `ev` (or u == 0 for the linear evolution).
ReproductionOperator assemble_Q(const ModelSpec& model, const EvolutionOperator& ev);

/// Convenience: builds the evolution for `u` (nullptr: linear part) first.
ReproductionOperator assemble_Q(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                const DensityField* u = nullptr);

PerronPair<double> spectral_radius(const ReproductionOperator& q, double tol = 1e-12, int max_iter = 100000);

CharacteristicValues characteristic_values(const ReproductionOperator& q, int k);

struct Normalization {
  ModelSpec model;  // cb rescaled so that r(Q_0) == 1
  double r_before;  // r(Q_0) with the original cb
};

/// Rescales cb by 1 / r(Q_0). Q_0 is linear in cb, so one pass suffices up to
/// roundoff; a second pass is taken if |r - 1| > 1e-10 afterwards.
Normalization normalize(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid);

/// sum_k w_k cb b(u_k) u_k, the birth profile produced by a density field.
Vector birth_functional(const ModelSpec& model, const DensityField& u);

/// cb b(0) sum_k w_k u_k
Vector linear_birth_functional(const ModelSpec& model, const DensityField& u);

/// sum_k w_k cb (b(u_k) - b(0)) u_k
Vector nonlinear_birth_functional(const ModelSpec& model, const DensityField& u);

}  // namespace agestruct
