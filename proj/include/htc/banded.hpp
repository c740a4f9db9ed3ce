#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <vector>

namespace htc {

/// Square band matrix with `lower` subdiagonals and `upper` superdiagonals.
///
/// Storage mirrors the LAPACK general-band layout with `lower` extra rows
/// above the band to hold fill-in from row interchanges, so the same object
/// can be factorized in place by BandedLU.
template <typename Scalar>
class BandedMatrix {
 public:
  using Index = Eigen::Index;

  BandedMatrix(Index n, Index lower, Index upper)
      : n_(n), kl_(lower), ku_(upper), band_(2 * lower + upper + 1, n) {
    band_.setZero();
  }

  Index rows() const noexcept { return n_; }
  Index lower() const noexcept { return kl_; }
  Index upper() const noexcept { return ku_; }

  /// Entry (i, j); requires j - upper <= i <= j + lower.
  Scalar& operator()(Index i, Index j) {
    assert(i - j <= kl_ && j - i <= ku_ + kl_);
    return band_(kl_ + ku_ + i - j, j);
  }
  Scalar operator()(Index i, Index j) const {
    if (i - j > kl_ || j - i > ku_ + kl_) return Scalar(0);
    return band_(kl_ + ku_ + i - j, j);
  }

  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> operator*(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = std::max<Index>(0, i - kl_); j <= std::min<Index>(n_ - 1, i + ku_); ++j)
        y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> toDense() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = std::max<Index>(0, i - kl_); j <= std::min<Index>(n_ - 1, i + ku_); ++j)
        d(i, j) = (*this)(i, j);
    return d;
  }

 private:
  template <typename>
  friend class BandedLU;

  Index n_, kl_, ku_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> band_;
};

/// LU factorization of a band matrix with partial (row) pivoting.
/// Cost is O(n (lower + upper) lower); the factor overwrites a copy of A.
template <typename Scalar>
class BandedLU {
 public:
  using Index = Eigen::Index;

  explicit BandedLU(BandedMatrix<Scalar> a) : lu_(std::move(a)), pivots_(lu_.rows()) {
    factorize();
  }

  /// First elimination column whose pivot vanished, if any.
  std::optional<Index> singular_column() const noexcept { return singular_; }

  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve(const Eigen::MatrixBase<Derived>& rhs) const {
    const Index n = lu_.rows(), kl = lu_.kl_, ku = lu_.ku_;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = rhs;
    for (Index k = 0; k < n; ++k) {
      if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
      for (Index i = k + 1; i <= std::min(n - 1, k + kl); ++i) x[i] -= lu_(i, k) * x[k];
    }
    for (Index k = n - 1; k >= 0; --k) {
      for (Index j = k + 1; j <= std::min(n - 1, k + ku + kl); ++j) x[k] -= lu_(k, j) * x[j];
      x[k] /= lu_(k, k);
    }
    return x;
  }

 private:
  void factorize() {
    const Index n = lu_.rows(), kl = lu_.kl_, ku = lu_.ku_;
    for (Index k = 0; k < n; ++k) {
      const Index last_row = std::min(n - 1, k + kl);
      const Index last_col = std::min(n - 1, k + ku + kl);
      Index p = k;
      for (Index i = k + 1; i <= last_row; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
      pivots_[k] = p;
      if (lu_(p, k) == Scalar(0)) {
        if (!singular_) singular_ = k;
        continue;
      }
      if (p != k)
        for (Index j = k; j <= last_col; ++j) std::swap(lu_(k, j), lu_(p, j));
      const Scalar pivot = lu_(k, k);
      for (Index i = k + 1; i <= last_row; ++i) {
        const Scalar l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        if (l == Scalar(0)) continue;
        for (Index j = k + 1; j <= last_col; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  BandedMatrix<Scalar> lu_;
  std::vector<Index> pivots_;
  std::optional<Index> singular_;
};

}  // namespace htc
