#pragma once

#include "agestruct/types.hpp"

#include <cmath>

namespace agestruct {

/// Square tridiagonal matrix stored by diagonals. `lower(0)` and
/// `upper(size()-1)` are unused and kept at zero.
template <typename Scalar>
class Tridiagonal {
 public:
  Tridiagonal() = default;
  explicit Tridiagonal(Eigen::Index n)
      : lower_(VectorX<Scalar>::Zero(n)), diag_(VectorX<Scalar>::Zero(n)), upper_(VectorX<Scalar>::Zero(n)) {}

  static Tridiagonal identity(Eigen::Index n) {
    Tridiagonal t(n);
    t.diag_.setOnes();
    return t;
  }

  Eigen::Index size() const { return diag_.size(); }

  VectorX<Scalar>& lower() { return lower_; }
  VectorX<Scalar>& diag() { return diag_; }
  VectorX<Scalar>& upper() { return upper_; }
  const VectorX<Scalar>& lower() const { return lower_; }
  const VectorX<Scalar>& diag() const { return diag_; }
  const VectorX<Scalar>& upper() const { return upper_; }

  /// I + s * (*this)
  Tridiagonal shifted_identity(Scalar s) const {
    Tridiagonal t(*this);
    t.lower_ *= s;
    t.upper_ *= s;
    t.diag_ = VectorX<Scalar>::Ones(size()) + s * diag_;
    return t;
  }

  template <typename Derived>
  VectorX<Scalar> operator*(const Eigen::MatrixBase<Derived>& v) const {
    const Eigen::Index n = size();
    VectorX<Scalar> out = diag_.cwiseProduct(v);
    if (n > 1) {
      out.tail(n - 1) += lower_.tail(n - 1).cwiseProduct(v.head(n - 1));
      out.head(n - 1) += upper_.head(n - 1).cwiseProduct(v.tail(n - 1));
    }
    return out;
  }

  MatrixX<Scalar> to_dense() const {
    const Eigen::Index n = size();
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) = diag_(i);
      if (i > 0) m(i, i - 1) = lower_(i);
      if (i + 1 < n) m(i, i + 1) = upper_(i);
    }
    return m;
  }

  /// Largest off-diagonal entry; nonpositive for a Z-matrix.
  Scalar max_off_diagonal() const {
    const Eigen::Index n = size();
    if (n < 2) return Scalar(0);
    return std::max(lower_.tail(n - 1).maxCoeff(), upper_.head(n - 1).maxCoeff());
  }

  bool operator==(const Tridiagonal& o) const {
    return lower_ == o.lower_ && diag_ == o.diag_ && upper_ == o.upper_;
  }

 private:
  VectorX<Scalar> lower_, diag_, upper_;
};

/// Thomas factorization without pivoting. For a Z-matrix with positive pivots
/// every intermediate quantity keeps its sign, so nonnegative right-hand sides
/// produce nonnegative solutions in floating point as well.
template <typename Scalar>
class TridiagonalLU {
 public:
  TridiagonalLU() = default;

  explicit TridiagonalLU(const Tridiagonal<Scalar>& t) : lower_(t.lower()), pivot_(t.size()), upper_(t.size()) {
    const Eigen::Index n = t.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar denom = i == 0 ? t.diag()(0) : t.diag()(i) - t.lower()(i) * upper_(i - 1);
      if (!(std::isfinite(denom)) || denom == Scalar(0)) throw InvariantError("singular tridiagonal matrix");
      pivot_(i) = denom;
      upper_(i) = i + 1 < n ? t.upper()(i) / denom : Scalar(0);
    }
  }

  Eigen::Index size() const { return pivot_.size(); }

  bool positive_pivots() const { return (pivot_.array() > Scalar(0)).all(); }

  template <typename Derived>
  VectorX<Scalar> solve(const Eigen::MatrixBase<Derived>& rhs) const {
    VectorX<Scalar> x = rhs;
    solve_in_place(x);
    return x;
  }

  /// Solves column by column.
  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = size();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      auto col = x.col(c);
      col(0) /= pivot_(0);
      for (Eigen::Index i = 1; i < n; ++i) col(i) = (col(i) - lower_(i) * col(i - 1)) / pivot_(i);
      for (Eigen::Index i = n - 2; i >= 0; --i) col(i) -= upper_(i) * col(i + 1);
    }
  }

 private:
  VectorX<Scalar> lower_;  // original sub-diagonal
  VectorX<Scalar> pivot_;  // eliminated diagonal
  VectorX<Scalar> upper_;  // normalized super-diagonal
};

}  // namespace agestruct
