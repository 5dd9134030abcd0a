#pragma once

#include <semiclassic/types.hpp>
#include <stdexcept>
#include <vector>

namespace semiclassic {

/// Square banded matrix with kl sub- and ku super-diagonals, stored
/// column-wise in band layout: entry (i,j) lives at row (ku + i - j).
template <typename Scalar>
class Banded {
public:
  Banded() = default;
  Banded(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku),
        data_(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(kl + ku + 1, n)) {}

  int rows() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  Scalar& operator()(int i, int j) { return data_(ku_ + i - j, j); }
  Scalar operator()(int i, int j) const {
    if (j - i > ku_ || i - j > kl_) return Scalar(0);
    return data_(ku_ + i - j, j);
  }

  template <typename Other>
  void axpy(Scalar alpha, const Banded<Other>& b) {
    data_ += alpha * b.raw().template cast<Scalar>();
  }

  template <typename Vec>
  Eigen::Vector<Scalar, Eigen::Dynamic> operator*(const Vec& x) const {
    Eigen::Vector<Scalar, Eigen::Dynamic> y =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      const int ilo = std::max(0, j - ku_), ihi = std::min(n_ - 1, j + kl_);
      const Scalar xj = x[j];
      for (int i = ilo; i <= ihi; ++i) y[i] += data_(ku_ + i - j, j) * xj;
    }
    return y;
  }

  /// Bilinear form conj(x)^T A y.
  template <typename VX, typename VY>
  Scalar quad(const VX& x, const VY& y) const {
    Scalar s(0);
    for (int j = 0; j < n_; ++j) {
      const int ilo = std::max(0, j - ku_), ihi = std::min(n_ - 1, j + kl_);
      for (int i = ilo; i <= ihi; ++i)
        s += Eigen::numext::conj(Scalar(x[i])) * data_(ku_ + i - j, j) * Scalar(y[j]);
    }
    return s;
  }

  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& raw() const { return data_; }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& raw() { return data_; }

private:
  int n_ = 0, kl_ = 0, ku_ = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> data_;
};

/// y = A x for mixed scalar types (e.g. real matrix, complex vector).
template <typename Scalar, typename Vec>
auto band_mul(const Banded<Scalar>& a, const Vec& x) {
  using R = decltype(Scalar(1) * x[0]);
  Eigen::Vector<R, Eigen::Dynamic> y = Eigen::Vector<R, Eigen::Dynamic>::Zero(a.rows());
  const int n = a.rows(), kl = a.lower(), ku = a.upper();
  for (int j = 0; j < n; ++j) {
    const int ilo = std::max(0, j - ku), ihi = std::min(n - 1, j + kl);
    const auto xj = x[j];
    for (int i = ilo; i <= ihi; ++i) y[i] += a(i, j) * xj;
  }
  return y;
}

/// conj(x)^T A y for mixed scalar types.
template <typename Scalar, typename VX, typename VY>
auto band_quad(const Banded<Scalar>& a, const VX& x, const VY& y) {
  using R = decltype(Eigen::numext::conj(x[0]) * Scalar(1) * y[0]);
  R s(0);
  const int n = a.rows(), kl = a.lower(), ku = a.upper();
  for (int j = 0; j < n; ++j) {
    const int ilo = std::max(0, j - ku), ihi = std::min(n - 1, j + kl);
    for (int i = ilo; i <= ihi; ++i)
      s += Eigen::numext::conj(x[i]) * a(i, j) * y[j];
  }
  return s;
}

/// LU factorization with partial pivoting of a banded matrix (gbtrf-style).
/// Row pivoting widens the effective upper bandwidth to kl+ku.
template <typename Scalar>
class BandedLU {
public:
  BandedLU() = default;

  explicit BandedLU(const Banded<Scalar>& a)
      : n_(a.rows()), kl_(a.lower()), ku_(a.upper()) {
    const int kw = kl_ + ku_;
    ab_.setZero(kl_ + kw + 1, n_);
    ab_.block(kl_, 0, kl_ + ku_ + 1, n_) = a.raw(); // A(i,j) at row kw + i - j
    piv_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      const int imax = std::min(n_ - 1, j + kl_);
      int p = j;
      Real best = std::abs(at(j, j));
      for (int i = j + 1; i <= imax; ++i)
        if (std::abs(at(i, j)) > best) { best = std::abs(at(i, j)); p = i; }
      piv_[j] = p;
      if (best == Real(0)) throw std::runtime_error("BandedLU: singular matrix");
      const int cmax = std::min(n_ - 1, j + kw);
      if (p != j)
        for (int c = j; c <= cmax; ++c) std::swap(at(j, c), at(p, c));
      const Scalar pivot = at(j, j);
      for (int i = j + 1; i <= imax; ++i) {
        const Scalar l = at(i, j) / pivot;
        at(i, j) = l;
        for (int c = j + 1; c <= cmax; ++c) at(i, c) -= l * at(j, c);
      }
    }
  }

  Eigen::Vector<Scalar, Eigen::Dynamic>
  solve(Eigen::Vector<Scalar, Eigen::Dynamic> b) const {
    const int kw = kl_ + ku_;
    for (int j = 0; j < n_ - 1; ++j) {
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
      const int imax = std::min(n_ - 1, j + kl_);
      const Scalar bj = b[j];
      for (int i = j + 1; i <= imax; ++i) b[i] -= at(i, j) * bj;
    }
    for (int i = n_ - 1; i >= 0; --i) {
      const int cmax = std::min(n_ - 1, i + kw);
      Scalar s = b[i];
      for (int c = i + 1; c <= cmax; ++c) s -= at(i, c) * b[c];
      b[i] = s / at(i, i);
    }
    return b;
  }

  /// Solve with one round of iterative refinement when the residual of the
  /// first solve exceeds tol * ||b||.
  Eigen::Vector<Scalar, Eigen::Dynamic>
  solve_refined(const Banded<Scalar>& a,
                const Eigen::Vector<Scalar, Eigen::Dynamic>& b,
                Real tol = 1e-12) const {
    auto x = solve(b);
    Eigen::Vector<Scalar, Eigen::Dynamic> r = b - a * x;
    if (r.norm() > tol * b.norm()) x += solve(r);
    return x;
  }

private:
  Scalar& at(int i, int j) { return ab_(kl_ + ku_ + i - j, j); }
  Scalar at(int i, int j) const { return ab_(kl_ + ku_ + i - j, j); }

  int n_ = 0, kl_ = 0, ku_ = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ab_;
  std::vector<int> piv_;
};

} // namespace semiclassic
