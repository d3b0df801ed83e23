#include "agestruct/evolution.hpp"

#include <cmath>

namespace agestruct {

AgeGrid::AgeGrid(int na, double max_age) : na_(na), max_age_(max_age) {
  if (na < 2) throw PreconditionError("age grid needs at least 2 steps");
  if (!(max_age > 0.0) || !std::isfinite(max_age)) throw PreconditionError("maximal age must be positive and finite");
}

AgeGrid AgeGrid::for_model(const ModelSpec& model, std::optional<int> na) {
  return AgeGrid(na.value_or(model.na), model.max_age);
}

Vector AgeGrid::trapezoid_weights() const {
  Vector w = Vector::Constant(na_ + 1, da());
  w(0) *= 0.5;
  w(na_) *= 0.5;
  return w;
}

double DensityField::norm() const {
  const Vector w = grid.trapezoid_weights();
  return w.dot(values.cwiseAbs().rowwise().maxCoeff());
}

DensityField operator+(const DensityField& lhs, const DensityField& rhs) {
  return DensityField(lhs.grid, lhs.values + rhs.values);
}

DensityField operator-(const DensityField& lhs, const DensityField& rhs) {
  return DensityField(lhs.grid, lhs.values - rhs.values);
}

DensityField operator*(double s, const DensityField& f) { return DensityField(f.grid, s * f.values); }

EvolutionOperator::EvolutionOperator(AgeGrid grid, std::vector<TridiagonalLU<double>> steps,
                                     std::optional<DensityField> frozen)
    : grid_(grid), steps_(std::move(steps)), frozen_(std::move(frozen)) {
  if (static_cast<int>(steps_.size()) != grid_.steps()) throw PreconditionError("step count must equal na");
}

namespace {

TridiagonalLU<double> one_step(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid, int k,
                               const Vector* slice) {
  const OperatorMatrix op = assemble(model, mesh, grid.age(k + 1), slice);
  TridiagonalLU<double> lu(op.matrix.shifted_identity(grid.da()));
  if (!lu.positive_pivots())
    throw InvariantError("one-step matrix at age " + std::to_string(grid.age(k + 1)) + " is not an M-matrix");
  return lu;
}

}  // namespace

EvolutionOperator build_evolution(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid,
                                  const DensityField* u) {
  if (u && (u->ages() != grid.steps() + 1 || u->nodes() != mesh.size()))
    throw PreconditionError("density field shape does not match the grids");
  std::vector<TridiagonalLU<double>> steps;
  steps.reserve(static_cast<std::size_t>(grid.steps()));
  for (int k = 0; k < grid.steps(); ++k) {
    if (u) {
      const Vector slice = u->row(k);
      steps.push_back(one_step(model, mesh, grid, k, &slice));
    } else {
      steps.push_back(one_step(model, mesh, grid, k, nullptr));
    }
  }
  return EvolutionOperator(grid, std::move(steps), u ? std::optional<DensityField>(*u) : std::nullopt);
}

DensityField propagate(const EvolutionOperator& ev, const Vector& birth) {
  if (birth.size() != ev.nodes()) throw PreconditionError("birth vector does not match the mesh");
  const AgeGrid& grid = ev.grid();
  DensityField out(grid, static_cast<int>(birth.size()));
  Vector v = birth;
  out.values.row(0) = v.transpose();
  for (int k = 0; k < grid.steps(); ++k) {
    ev.step(k, v);
    out.values.row(k + 1) = v.transpose();
  }
  out.nonnegative = (birth.array() >= 0.0).all();
  return out;
}

DensityField apply_K0(const EvolutionOperator& linear, const DensityField& f) {
  if (!linear.is_linear()) throw PreconditionError("apply_K0 needs the linear evolution");
  const AgeGrid& grid = linear.grid();
  const double da = grid.da();
  DensityField out(grid, f.nodes());
  Vector w = Vector::Zero(f.nodes());
  for (int k = 0; k < grid.steps(); ++k) {
    w += da * f.row(k);
    linear.step(k, w);
    out.values.row(k + 1) = w.transpose();
  }
  return out;
}

DensityField march(const ModelSpec& model, const SpatialMesh& mesh, const AgeGrid& grid, const Vector& birth) {
  if (birth.size() != mesh.size()) throw PreconditionError("birth vector does not match the mesh");
  DensityField out(grid, mesh.size());
  Vector v = birth;
  out.values.row(0) = v.transpose();
  for (int k = 0; k < grid.steps(); ++k) {
    const TridiagonalLU<double> lu = one_step(model, mesh, grid, k, &v);
    lu.solve_in_place(v);
    out.values.row(k + 1) = v.transpose();
  }
  out.nonnegative = (birth.array() >= 0.0).all();
  return out;
}

}  // namespace agestruct
