#include "agestruct/discretize.hpp"

#include <cmath>

namespace agestruct {

SpatialMesh::SpatialMesh(int nx, RightBoundary right)
    : nx_(nx), right_(right), dx_(right == RightBoundary::Robin ? 1.0 / nx : 1.0 / (nx + 1)) {
  if (nx < 3) throw PreconditionError("mesh needs at least 3 unknowns");
}

SpatialMesh SpatialMesh::for_model(const ModelSpec& model, std::optional<int> nx) {
  return SpatialMesh(nx.value_or(model.nx), model.right);
}

Vector nodal_gradient(const SpatialMesh& mesh, const Vector& u) {
  const int n = mesh.size();
  const double dx = mesh.dx();
  Vector p(n);
  for (int i = 0; i < n; ++i) {
    const double west = i == 0 ? 0.0 : u(i - 1);
    if (i + 1 < n) {
      p(i) = (u(i + 1) - west) / (2.0 * dx);
    } else if (mesh.right() == RightBoundary::Dirichlet) {
      p(i) = (0.0 - west) / (2.0 * dx);
    } else {
      p(i) = (u(i) - west) / dx;
    }
  }
  return p;
}

OperatorMatrix assemble(const ModelSpec& model, const SpatialMesh& mesh, double a, const Vector* u) {
  const int n = mesh.size();
  if (u && u->size() != n) throw PreconditionError("density slice does not match the mesh");
  const double dx = mesh.dx();
  const bool robin = mesh.right() == RightBoundary::Robin;

  OperatorMatrix op{Tridiagonal<double>(n), a, u == nullptr};
  auto& lo = op.matrix.lower();
  auto& di = op.matrix.diag();
  auto& up = op.matrix.upper();

  const Vector zero = Vector::Zero(n);
  const Vector& uu = u ? *u : zero;
  const Vector p = u ? nodal_gradient(mesh, uu) : zero;

  if (model.transport == Transport::Diffusive) {
    // Nodal D at every physical node, boundaries included.
    const int physical = robin ? n + 1 : n + 2;
    Vector d(physical);
    for (int k = 0; k < physical; ++k) d(k) = model.D(a, k * dx);
    const double inv_dx2 = 1.0 / (dx * dx);

    for (int i = 0; i < n; ++i) {
      const double dw = 0.5 * (d(i) + d(i + 1));
      const bool last = i + 1 == n;
      if (last && robin) {
        lo(i) += -2.0 * dw * inv_dx2;
        di(i) += (2.0 + 2.0 * dx * model.robin) * dw * inv_dx2;
      } else {
        const double de = 0.5 * (d(i + 1) + d(i + 2));
        if (i > 0) lo(i) += -dw * inv_dx2;
        if (!last) up(i) += -de * inv_dx2;
        di(i) += (dw + de) * inv_dx2;
      }

      const double g = model.g(uu(i), p(i));
      if (g > 0.0) {
        di(i) += g / dx;
        if (i > 0) lo(i) += -g / dx;
      } else if (g < 0.0) {
        if (last && robin) {
          lo(i) += g / dx;
          di(i) += -g * (1.0 + 2.0 * dx * model.robin) / dx;
        } else {
          di(i) += -g / dx;
          if (!last) up(i) += g / dx;
        }
      } else if (!std::isfinite(g)) {
        throw InvariantError("non-finite drift coefficient at x = " + std::to_string(mesh.x(i)));
      }
    }
  }

  for (int i = 0; i < n; ++i) di(i) += model.h(uu(i), p(i)) + model.mu(uu(i), a);

  if (!lo.allFinite() || !di.allFinite() || !up.allFinite())
    throw InvariantError("non-finite coefficient in assembled operator at age " + std::to_string(a));
  if (op.matrix.max_off_diagonal() > 0.0)
    throw InvariantError("M-matrix sign pattern violated (positive off-diagonal) at age " + std::to_string(a));
  return op;
}

double smallest_eigenvalue(const OperatorMatrix& op, double tol, int max_iter) {
  const TridiagonalLU<double> lu(op.matrix);
  const Eigen::Index n = op.matrix.size();
  Vector x = Vector::Ones(n).normalized();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector y = lu.solve(x);
    const double next = 1.0 / x.dot(y);
    x = y.normalized();
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  throw ConvergenceError("inverse iteration did not converge");
}

}  // namespace agestruct
