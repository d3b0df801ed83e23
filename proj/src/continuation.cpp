#include "agestruct/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agestruct {

namespace {

constexpr double kTrivialBirth = 1e-9;

double weighted_dot(const Vector& a, double an, const Vector& b, double bn) {
  return a.dot(b) / static_cast<double>(a.size()) + an * bn;
}

bool is_trivial(const Vector& birth) { return birth.lpNorm<Eigen::Infinity>() <= kTrivialBirth; }

}  // namespace

BranchProblem::BranchProblem(ModelSpec model, SpatialMesh mesh, AgeGrid grid, ContinuationOptions options)
    : model_(std::move(model)),
      mesh_(mesh),
      grid_(grid),
      options_(options),
      perron_(spectral_radius(assemble_Q(model_, mesh_, grid_), options.spectral_tol)) {
  if (perron_.radius < 2.0) cache_.emplace(model_, mesh_, grid_);
}

Vector BranchProblem::residual(const Vector& birth, double n, DensityField* trajectory) const {
  DensityField u = march(model_, mesh_, grid_, birth);
  Vector g = birth - n * birth_functional(model_, u);
  if (trajectory) *trajectory = std::move(u);
  return g;
}

BranchPoint diagnose(const BranchPoint& point, const BranchProblem& problem) {
  BranchPoint out = point;
  const ModelSpec& model = problem.model();
  if (out.trivial) {
    out.r_Qu = problem.perron().radius;
  } else {
    out.r_Qu = spectral_radius(assemble_Q(model, problem.mesh(), problem.grid(), &out.u),
                               problem.options().spectral_tol)
                   .radius;
  }
  out.eq72_residual = std::abs(out.n * out.r_Qu - 1.0);
  out.residual_direct = (out.birth - out.n * birth_functional(model, out.u)).lpNorm<Eigen::Infinity>();
  out.residual_400 = problem.cache() ? reformulation_residual(*problem.cache(), out.n, out.u)
                                     : std::numeric_limits<double>::quiet_NaN();
  out.min_u = out.u.min();
  out.eps = out.u.norm();
  return out;
}

BranchPoint correct(const BranchProblem& problem, double n, const Vector& guess_birth, const ArclengthPlane* plane) {
  const ContinuationOptions& opt = problem.options();
  const int nx = problem.mesh().size();
  if (guess_birth.size() != nx) throw PreconditionError("guess does not match the mesh");
  if (!guess_birth.allFinite() || !std::isfinite(n)) throw PreconditionError("non-finite corrector guess");

  const int dim = plane ? nx + 1 : nx;
  Vector birth = guess_birth;
  DensityField u(problem.grid(), nx);
  Vector g = problem.residual(birth, n, &u);
  double first_norm = -1.0;

  for (int it = 0; it <= opt.max_newton; ++it) {
    const double scale = std::max(1.0, birth.lpNorm<Eigen::Infinity>());
    const double g_norm = g.lpNorm<Eigen::Infinity>();
    double plane_res = 0.0;
    if (plane) {
      plane_res = weighted_dot(plane->tangent_birth, plane->tangent_n, birth - plane->point_birth, n - plane->point_n);
    }
    if (!std::isfinite(g_norm) || !std::isfinite(plane_res)) throw ConvergenceError("corrector produced non-finite values");
    if (first_norm < 0.0) first_norm = g_norm + std::abs(plane_res);
    if (g_norm + std::abs(plane_res) > 1e6 * (first_norm + 1.0)) throw ConvergenceError("Newton corrector diverged");

    if (g_norm <= opt.tol_corrector * scale && std::abs(plane_res) <= opt.tol_corrector) {
      if (u.min() < -opt.tol_pos) throw InvariantError("corrector converged to a negative density");
      BranchPoint point(u);
      point.n = n;
      point.trivial = is_trivial(birth);
      point.newton_iterations = it;
      return diagnose(point, problem);
    }
    if (it == opt.max_newton) break;

    // Jacobian: finite differences in B, analytic in n (dG/dn = -l(u)).
    Matrix jac(dim, dim);
    const double h = 1e-6 * (1.0 + birth.lpNorm<Eigen::Infinity>());
    for (int j = 0; j < nx; ++j) {
      Vector shifted = birth;
      shifted(j) += h;
      jac.block(0, j, nx, 1) = (problem.residual(shifted, n) - g) / h;
    }
    Vector rhs(dim);
    rhs.head(nx) = -g;
    if (plane) {
      jac.block(0, nx, nx, 1) = -birth_functional(problem.model(), u);
      jac.block(nx, 0, 1, nx) = plane->tangent_birth.transpose() / static_cast<double>(nx);
      jac(nx, nx) = plane->tangent_n;
      rhs(nx) = -plane_res;
    }
    Eigen::PartialPivLU<Matrix> lu(jac);
    const Vector delta = lu.solve(rhs);
    if (!delta.allFinite()) throw ConvergenceError("singular corrector Jacobian");

    // Halve the update while it leaves the region where the steps are M-matrices.
    for (double t = 1.0;; t *= 0.5) {
      if (t < 1e-6) throw ConvergenceError("Newton update left the admissible region");
      const Vector trial = birth + t * delta.head(nx);
      const double trial_n = plane ? n + t * delta(nx) : n;
      try {
        g = problem.residual(trial, trial_n, &u);
      } catch (const InvariantError&) {
        continue;
      }
      birth = trial;
      n = trial_n;
      break;
    }
  }
  throw ConvergenceError("Newton corrector did not converge");
}

BranchPoint bifurcation_point(const BranchProblem& problem) {
  BranchPoint point(DensityField(problem.grid(), problem.mesh().size()));
  point.n = 1.0;
  point.trivial = true;
  return diagnose(point, problem);
}

BranchPoint first_step(const BranchProblem& problem, double eps0) {
  if (eps0 == 0.0) return bifurcation_point(problem);
  if (!(eps0 > 0.0)) throw PreconditionError("eps0 must be nonnegative");
  const Vector& perron = problem.perron().vector;
  const ArclengthPlane plane{eps0 * perron, 1.0, perron, 0.0};
  BranchPoint p = correct(problem, 1.0, Vector(eps0 * perron), &plane);
  if (p.trivial) throw ConvergenceError("first step collapsed to the trivial solution");
  return p;
}

Branch trace_branch(const BranchProblem& problem) {
  const ContinuationOptions& opt = problem.options();
  Branch branch;
  branch.points.push_back(bifurcation_point(problem));
  branch.points.push_back(first_step(problem, opt.eps0));

  double step = opt.step;
  int failures_at_min = 0;
  int accepted = 1;
  for (;;) {
    const BranchPoint& cur = branch.points.back();
    if (cur.n > opt.n_cap) {
      branch.termination = Termination::NCap;
      break;
    }
    if (cur.eps > opt.norm_cap) {
      branch.termination = Termination::NormCap;
      break;
    }
    if (accepted >= opt.max_points) {
      branch.termination = Termination::MaxPoints;
      break;
    }

    const BranchPoint& prev = branch.points[branch.points.size() - 2];
    Vector tb = cur.birth - prev.birth;
    double tn = cur.n - prev.n;
    const double len = std::sqrt(weighted_dot(tb, tn, tb, tn));
    tb /= len;
    tn /= len;
    const ArclengthPlane plane{cur.birth + step * tb, cur.n + step * tn, tb, tn};

    try {
      BranchPoint next = correct(problem, plane.point_n, plane.point_birth, &plane);
      if (next.trivial) {
        if (std::abs(next.n - 1.0) > 1e-6) {
          branch.termination = Termination::ReturnedToTrivial;
          branch.points.push_back(std::move(next));
          break;
        }
        throw ConvergenceError("corrector fell back onto the bifurcation point");
      }
      const int iterations = next.newton_iterations;
      branch.points.push_back(std::move(next));
      ++accepted;
      failures_at_min = 0;
      if (iterations <= 4) step = std::min(opt.step, 1.5 * step);
    } catch (const Error&) {
      if (step > opt.step_min) {
        step = std::max(0.5 * step, opt.step_min);
      } else if (++failures_at_min >= 2) {
        throw ConvergenceError("branch tracing stalled: corrector failed twice at the minimal step");
      }
    }
  }
  return branch;
}

BranchPoint locate_norm(const BranchProblem& problem, const Branch& branch, double target) {
  const auto& pts = branch.points;
  std::size_t i = 0;
  while (i + 1 < pts.size() && !(pts[i].eps <= target && target <= pts[i + 1].eps)) ++i;
  if (i + 1 >= pts.size()) throw PreconditionError("target norm is not bracketed by the branch");

  const BranchPoint& lo_pt = pts[i];
  const BranchPoint& hi_pt = pts[i + 1];
  const Vector db = hi_pt.birth - lo_pt.birth;
  const double dn = hi_pt.n - lo_pt.n;

  auto solve_at = [&](double s) {
    const ArclengthPlane plane{lo_pt.birth + s * db, lo_pt.n + s * dn, db, dn};
    return correct(problem, plane.point_n, plane.point_birth, &plane);
  };

  // Illinois variant of regula falsi on s in [0, 1].
  double s_lo = 0.0, s_hi = 1.0;
  double f_lo = lo_pt.eps - target, f_hi = hi_pt.eps - target;
  int side = 0;
  for (int it = 0; it < 100; ++it) {
    const double s = (s_lo * f_hi - s_hi * f_lo) / (f_hi - f_lo);
    BranchPoint p = solve_at(s);
    const double f = p.eps - target;
    if (std::abs(f) <= 1e-10 * target) return p;
    if ((f < 0.0) == (f_lo < 0.0)) {
      s_lo = s;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      s_hi = s;
      f_hi = f;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  throw ConvergenceError("could not locate the branch point at the requested norm");
}

double expansion_defect(const BranchProblem& problem, const BranchPoint& point) {
  if (!(point.eps > 0.0)) throw PreconditionError("expansion defect needs a nontrivial point");
  const EvolutionOperator linear = build_evolution(problem.model(), problem.mesh(), problem.grid());
  DensityField phi = propagate(linear, problem.perron().vector);
  phi = (1.0 / phi.norm()) * phi;
  return (point.u - point.eps * phi).norm() / point.eps;
}

BranchStats branch_stats(const Branch& branch) {
  BranchStats s;
  for (const BranchPoint& p : branch.points) {
    if (p.trivial) continue;
    if (s.points == 0) {
      s.sigma_inf = s.sigma_sup = p.n;
      s.r_inf = s.r_sup = p.r_Qu;
    } else {
      s.sigma_inf = std::min(s.sigma_inf, p.n);
      s.sigma_sup = std::max(s.sigma_sup, p.n);
      s.r_inf = std::min(s.r_inf, p.r_Qu);
      s.r_sup = std::max(s.r_sup, p.r_Qu);
    }
    s.max_eq72 = std::max(s.max_eq72, std::abs(p.n * p.r_Qu - 1.0));
    ++s.points;
  }
  if (s.points == 0) throw PreconditionError("branch has no nontrivial points");
  return s;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxPoints: return "max_points";
    case Termination::NCap: return "n_cap";
    case Termination::NormCap: return "norm_cap";
    case Termination::ReturnedToTrivial: return "returned_to_trivial";
  }
  return "?";
}

}  // namespace agestruct
