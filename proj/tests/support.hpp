#pragma once

#include "agestruct/evolution.hpp"
#include "agestruct/model.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace agestruct::testing {

/// Model with only the zero-order terms; every node evolves on its own.
inline ModelSpec pure_decay(const std::string& mu, const std::string& b = "1", double cb = 1.0, int na = 100,
                            int nx = 4) {
  ModelSpec m;
  m.transport = Transport::None;
  m.death = Expr::parse(mu);
  m.birth = Expr::parse(b);
  m.birth_scale = cb;
  m.nx = nx;
  m.na = na;
  return m;
}

/// D = 1, g = h = 0, Robin nu0 = 1, given mortality and fertility shape.
inline ModelSpec diffusive(const std::string& mu, const std::string& b = "1", int nx = 20, int na = 40) {
  ModelSpec m;
  m.death = Expr::parse(mu);
  m.birth = Expr::parse(b);
  m.robin = 1.0;
  m.nx = nx;
  m.na = na;
  return m;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Scalar age recurrence of the implicit scheme without transport:
/// u_{k+1} = u_k / (1 + da (mu(u_k, a_{k+1}) + h)).
inline Vector scalar_trajectory(const std::function<double(double, double)>& mu, double B, int na, double a_max,
                                double h = 0.0) {
  const double da = a_max / na;
  Vector u(na + 1);
  u(0) = B;
  for (int k = 0; k < na; ++k) {
    const double a = k + 1 == na ? a_max : (k + 1) * da;
    u(k + 1) = u(k) / (1.0 + da * (mu(u(k), a) + h));
  }
  return u;
}

/// cb * sum_k w_k b(u_k) u_k with trapezoid weights.
inline double scalar_birth(const std::function<double(double)>& fertility, const Vector& u, double a_max) {
  const int na = static_cast<int>(u.size()) - 1;
  const double da = a_max / na;
  double s = 0.0;
  for (int k = 0; k <= na; ++k) s += (k == 0 || k == na ? 0.5 : 1.0) * da * fertility(u(k)) * u(k);
  return s;
}

/// Bisection for the positive root of B - n * birth(B) on (lo, hi).
inline double bisect_birth(const std::function<double(double)>& residual, double lo, double hi) {
  double flo = residual(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace agestruct::testing

#include <random>

namespace agestruct::testing {

/// Random valid model with u-dependent drift, absorption, mortality and fertility.
inline ModelSpec random_model(std::mt19937& rng, int nx, int na) {
  std::uniform_real_distribution<double> c(0.1, 2.0);
  auto num = [&] { return std::to_string(c(rng)); };
  ModelSpec m;
  m.diffusion = Expr::parse(num() + " + " + num() + "*x*a");
  const char* drifts[] = {"u*p", "-u*p", "u^2", "-u", "sin(u)*p", "0"};
  m.drift = Expr::parse(num() + "*" + drifts[rng() % 6]);
  m.absorption = Expr::parse(num() + "*u^2 + 0.1*p^2");
  m.death = Expr::parse(num() + " + " + num() + "*u + a");
  const char* births[] = {"exp(-u)", "1/(1 + u)", "1", "2 + sin(u)"};
  m.birth = Expr::parse(births[rng() % 4]);
  m.birth_scale = c(rng);
  m.robin = rng() % 2 ? c(rng) : 0.0;
  m.max_age = c(rng);
  m.right = rng() % 4 == 0 ? RightBoundary::Dirichlet : RightBoundary::Robin;
  m.transport = rng() % 5 == 0 ? Transport::None : Transport::Diffusive;
  m.nx = nx;
  m.na = na;
  m.validate();
  return m;
}

}  // namespace agestruct::testing
