#pragma once

#include "agestruct/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace agestruct {

template <typename Scalar>
struct PerronPair {
  Scalar radius;
  VectorX<Scalar> vector;  // nonnegative, max-norm 1
  int iterations;
};

/// Power iteration from the all-ones vector for an entrywise nonnegative
/// matrix. Stops once ||Q B - r B||_inf <= tol * r with r = ||Q B||_inf.
/// When the dominant pair is nearly degenerate (slow or no convergence within
/// min(max_iter, 5000) sweeps), falls back to a dense eigensolver and takes
/// the eigenvalue of largest real part, which is r(Q) for Q >= 0.
template <typename Derived>
PerronPair<typename Derived::Scalar> perron_pair(const Eigen::MatrixBase<Derived>& q,
                                                  typename Derived::Scalar tol = 1e-12, int max_iter = 100000) {
  using Scalar = typename Derived::Scalar;
  if (q.rows() != q.cols()) throw PreconditionError("perron_pair needs a square matrix");
  VectorX<Scalar> b = VectorX<Scalar>::Ones(q.rows());
  const int sweeps = std::min(max_iter, 5000);
  for (int it = 1; it <= sweeps; ++it) {
    const VectorX<Scalar> y = q * b;
    const Scalar r = y.template lpNorm<Eigen::Infinity>();
    if (r == Scalar(0)) return {Scalar(0), b, it};
    if ((y - r * b).template lpNorm<Eigen::Infinity>() <= tol * r) return {r, b, it};
    b = y / r;
  }
  Eigen::EigenSolver<MatrixX<Scalar>> es(q.eval());
  if (es.info() != Eigen::Success) throw ConvergenceError("power iteration did not converge (near-degenerate dominant pair)");
  Eigen::Index k = 0;
  es.eigenvalues().real().maxCoeff(&k);
  VectorX<Scalar> v = es.eigenvectors().col(k).real().cwiseAbs();
  v /= v.template lpNorm<Eigen::Infinity>();
  return {es.eigenvalues()(k).real(), v, sweeps};
}

struct CharacteristicValues {
  std::vector<double> values;        // reciprocals, in order of decreasing |eigenvalue|
  std::vector<double> eigenvalues;   // the eigenvalues they came from
  std::vector<std::string> skipped;  // why the search stopped early, if it did
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> generic_start(Eigen::Index n) {
  VectorX<Scalar> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Scalar(1) + Scalar(0.5) * std::sin(Scalar(i + 1));
  return v.normalized();
}

/// Dominant real eigenpair by normalized power iteration with a Rayleigh estimate.
template <typename Scalar>
bool dominant_real_pair(const MatrixX<Scalar>& a, Scalar tol, int max_iter, Scalar& lambda, VectorX<Scalar>& x) {
  x = generic_start<Scalar>(a.rows());
  for (int it = 0; it < max_iter; ++it) {
    const VectorX<Scalar> y = a * x;
    lambda = x.dot(y);
    const Scalar scale = y.norm();
    if (scale == Scalar(0)) return false;
    if (it > 0 && (y - lambda * x).norm() <= tol * std::abs(lambda)) return true;
    x = y / scale;
  }
  return false;
}

}  // namespace detail

/// Reciprocals of the k largest-magnitude real eigenvalues via power
/// iteration and Hotelling (left/right) deflation. A dominant pair that does
/// not settle to a real eigenvector (complex pair, equal moduli) ends the
/// search with a note in `skipped`.
template <typename Derived>
CharacteristicValues characteristic_values(const Eigen::MatrixBase<Derived>& q, int k, double tol = 1e-11,
                                           int max_iter = 200000) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = q.rows();
  if (k < 1 || k > n) throw PreconditionError("k must lie in [1, dimension]");
  MatrixX<Scalar> a = q;
  const Scalar scale = a.cwiseAbs().maxCoeff();
  CharacteristicValues out;
  for (int j = 0; j < k; ++j) {
    Scalar lambda{}, lambda_left{};
    VectorX<Scalar> right, left;
    if (!detail::dominant_real_pair<Scalar>(a, Scalar(tol), max_iter, lambda, right) ||
        !detail::dominant_real_pair<Scalar>(a.transpose(), Scalar(tol), max_iter, lambda_left, left)) {
      out.skipped.push_back("eigenvalue " + std::to_string(j + 1) + ": no real dominant eigenvector (complex pair?)");
      break;
    }
    if (std::abs(lambda) <= Scalar(1e-13) * scale) {
      out.skipped.push_back("eigenvalue " + std::to_string(j + 1) + ": zero, no characteristic value");
      break;
    }
    out.eigenvalues.push_back(double(lambda));
    out.values.push_back(double(Scalar(1) / lambda));
    const Scalar denom = left.dot(right);
    if (std::abs(denom) <= Scalar(1e-12)) throw ConvergenceError("deflation breakdown: left and right vectors orthogonal");
    a -= lambda * right * left.transpose() / denom;
  }
  return out;
}

}  // namespace agestruct
