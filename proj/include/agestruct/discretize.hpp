#pragma once

#include "agestruct/model.hpp"
#include "agestruct/tridiagonal.hpp"
#include "agestruct/types.hpp"

#include <optional>

namespace agestruct {

/// Uniform grid on (0, 1]. The Dirichlet node x = 0 is eliminated; with a Robin
/// right end the last unknown sits at x = 1, with a Dirichlet right end x = 1 is
/// eliminated too.
class SpatialMesh {
 public:
  SpatialMesh(int nx, RightBoundary right);
  static SpatialMesh for_model(const ModelSpec& model, std::optional<int> nx = std::nullopt);

  int size() const { return nx_; }
  RightBoundary right() const { return right_; }
  double dx() const { return dx_; }
  /// Coordinate of unknown i (0-based).
  double x(int i) const { return (i + 1) * dx_; }

 private:
  int nx_;
  RightBoundary right_;
  double dx_;
};

/// Finite-difference matrix of w -> -(D w')' + g w' + (h + mu) w at one age.
struct OperatorMatrix {
  Tridiagonal<double> matrix;
  double age = 0.0;
  bool is_linear_part = false;  // built with u == 0
};

/// Assembles the operator frozen at density slice `u` (nullptr: the linear
/// part, u == 0). Diffusion is centered in flux form, drift is upwinded by the
/// sign of g at each node, and the Robin end uses a mirrored ghost node.
/// Throws InvariantError on non-finite coefficients or a broken sign pattern.
OperatorMatrix assemble(const ModelSpec& model, const SpatialMesh& mesh, double a, const Vector* u = nullptr);

inline OperatorMatrix assemble(const ModelSpec& model, const SpatialMesh& mesh, double a, const Vector& u) {
  return assemble(model, mesh, a, &u);
}

/// Centered gradient of a nodal profile, one-sided at the Robin end.
Vector nodal_gradient(const SpatialMesh& mesh, const Vector& u);

/// Smallest eigenvalue by inverse iteration with zero shift.
double smallest_eigenvalue(const OperatorMatrix& op, double tol = 1e-13, int max_iter = 100000);

}  // namespace agestruct
