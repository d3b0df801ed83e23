#pragma once

#include "agestruct/discretize.hpp"
#include "agestruct/model.hpp"
#include "agestruct/tridiagonal.hpp"
#include "agestruct/types.hpp"

#include <optional>
#include <vector>

namespace agestruct {

/// Uniform ages a_k = k * da, k = 0..na, with a_na == a_max exactly.
class AgeGrid {
 public:
  AgeGrid(int na, double max_age);
  static AgeGrid for_model(const ModelSpec& model, std::optional<int> na = std::nullopt);

  int steps() const { return na_; }
  double max_age() const { return max_age_; }
  double da() const { return max_age_ / na_; }
  double age(int k) const { return k == na_ ? max_age_ : k * da(); }
  /// Composite trapezoid weights over the na + 1 ages.
  Vector trapezoid_weights() const;

  bool operator==(const AgeGrid&) const = default;

 private:
  int na_;
  double max_age_;
};

/// Density on the age x space grid; row k is the profile at age a_k.
struct DensityField {
  DensityField(const AgeGrid& grid, int nx) : grid(grid), values(Matrix::Zero(grid.steps() + 1, nx)) {}
  DensityField(const AgeGrid& grid, Matrix v) : grid(grid), values(std::move(v)) {}

  AgeGrid grid;
  Matrix values;
  bool nonnegative = false;  // set by producers that guarantee it

  int ages() const { return static_cast<int>(values.rows()); }
  int nodes() const { return static_cast<int>(values.cols()); }
  Vector row(int k) const { return values.row(k).transpose(); }
  /// Birth profile u(0, .).
  Vector birth() const { return row(0); }

  /// Trapezoid-in-age integral of the spatial max norm of |u|.
  double norm() const;
  double min() const { return values.minCoeff(); }
};

DensityField operator+(const DensityField& lhs, const DensityField& rhs);
DensityField operator-(const DensityField& lhs, const DensityField& rhs);
DensityField operator*(double s, const DensityField& f);

/// Implicit Euler steps (I + da * A(u_k, a_{k+1}))^{-1}, k = 0..na-1, for a
/// frozen density u (or the linear part when no density is given).
class EvolutionOperator {
 public:
  EvolutionOperator(AgeGrid grid, std::vector<TridiagonalLU<double>> steps, std::optional<DensityField> frozen);

  const AgeGrid& grid() const { return grid_; }
  int nodes() const { return static_cast<int>(steps_.front().size()); }
  bool is_linear() const { return !frozen_.has_value(); }
  const std::optional<DensityField>& frozen() const { return frozen_; }

  /// One step from age a_k to a_{k+1}, in place.
  template <typename Derived>
  void step(int k, Eigen::MatrixBase<Derived>& v) const {
    steps_[static_cast<std::size_t>(k)].solve_in_place(v);
  }

 private:
  AgeGrid grid_;
  std::vector<TridiagonalLU<double>> steps_;
  std::optional<DensityField> frozen_;
};

/// Builds the step sequence; `u == nullptr` gives the linear evolution.
/// Throws InvariantError when a one-step matrix is not an M-matrix.
EvolutionOperator build_evolution(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                  const DensityField* u = nullptr);

/// Row k of the result is the evolution from age 0 to a_k applied to B.
DensityField propagate(const EvolutionOperator& ev, const Vector& birth);

/// Duhamel sum w_{k+1} = step_k(w_k + da f_k), w_0 = 0, over the linear evolution.
DensityField apply_K0(const EvolutionOperator& linear, const DensityField& f);

/// Trajectory that is consistent with its own frozen coefficients:
/// u_{k+1} = (I + da A(u_k, a_{k+1}))^{-1} u_k with u_0 = B. This is the exact
/// limit of rebuilding the evolution from the latest trajectory, since step k
/// only reads row k.
DensityField march(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid, const Vector& birth);

}  // namespace agestruct
