#pragma once

#include "agestruct/expression.hpp"

#include <string>
#include <string_view>

namespace agestruct {

/// Whether the spatial part of the operator (diffusion and drift) is present.
/// `None` keeps only the zero-order terms, so every node decays independently.
enum class Transport { Diffusive, None };

/// Condition imposed at x = 1. The end x = 0 is always Dirichlet.
enum class RightBoundary { Robin, Dirichlet };

/// Continuous problem on the unit interval:
///
///     d_a u - (D(a,x) u_x)_x + g(u,u_x) u_x + h(u,u_x) u + mu(u,a) u = 0
///     u(0,x) = n * int_0^{a_max} cb * b(u(a,x)) u(a,x) da
///     u(a,0) = 0,  u_x(a,1) + nu0 u(a,1) = 0
///
/// Immutable once built; evaluation is pure.
struct ModelSpec {
  Expr diffusion = Expr::constant(1.0);   // D(a, x)
  Expr drift;                             // g(u, p)
  Expr absorption;                        // h(u, p)
  Expr death = Expr::constant(1.0);       // mu(u, a)
  Expr birth = Expr::constant(1.0);       // b(u), shape only
  double birth_scale = 1.0;               // cb
  double robin = 0.0;                     // nu0
  double max_age = 1.0;
  Transport transport = Transport::Diffusive;
  RightBoundary right = RightBoundary::Robin;
  int nx = 50;
  int na = 100;

  double D(double a, double x) const { return diffusion.eval({.a = a, .x = x}); }
  double g(double u, double p) const { return drift.eval({.u = u, .p = p}); }
  double h(double u, double p) const { return absorption.eval({.u = u, .p = p}); }
  double mu(double u, double a) const { return death.eval({.u = u, .a = a}); }
  /// Full fertility cb * b(u).
  double fertility(double u) const { return birth_scale * birth.eval({.u = u}); }

  /// True when some coefficient of the spatial operator or the birth law depends on u.
  bool nonlinear() const;

  /// Checks the sampled sign conditions; throws InvariantError naming the first failure.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

/// Parses the INI-style configuration documented in docs/model-format.md and
/// validates the result. Throws ParseError (with line/column) or InvariantError.
ModelSpec parse_model(std::string_view text);

/// Reads and parses a configuration file.
ModelSpec load_model(const std::string& path);

/// Canonical configuration text; parse_model(serialize_model(m)) == m.
std::string serialize_model(const ModelSpec& model);

/// theta(a) = mu(0, a) + h(0, 0), the zero-order coefficient of the linear part.
/// Throws InvariantError when it is not strictly positive.
double eval_theta(const ModelSpec& model, double a);

}  // namespace agestruct
