#pragma once

#include <semiclassic/grid.hpp>
#include <semiclassic/types.hpp>
#include <memory>
#include <vector>

namespace semiclassic {

/// Gauss-Legendre rule on [-1,1].
struct GaussRule {
  std::vector<Real> nodes, weights;
  explicit GaussRule(int npts);
};

/// B-spline space of degree r on a breakpoint grid, open knot vector
/// (full multiplicity at the endpoints, simple interior knots).
///
/// Basis functions are indexed 0..dim()-1; with homogeneous Dirichlet
/// conditions the first and last are dropped, leaving dof() = dim()-2.
class SplineSpace {
public:
  SplineSpace(Grid1D grid, int degree);

  int degree() const { return r_; }
  int dim() const { return static_cast<int>(knots_.size()) - r_ - 1; }
  int dof() const { return dim() - 2; }
  const Grid1D& grid() const { return grid_; }
  const std::vector<Real>& knots() const { return knots_; }
  int bandwidth() const { return r_; } // |i-j| <= r for overlapping supports

  /// Index of the knot span containing x (clamped to the valid range).
  int find_span(Real x) const;

  /// Values and first nder derivatives of the r+1 nonzero basis functions on
  /// span s at x. Result is (nder+1) x (r+1); row 0 holds values.
  MatR basis(int span, Real x, int nder) const;

  /// First basis index active on a span.
  int first_basis(int span) const { return span - r_; }

  /// Evaluate a spline with full-coefficient vector c (length dim()).
  Complex eval(const VecC& c, Real x, int der = 0) const;

  /// Uniformly bisected space (same degree, every cell split in two).
  std::shared_ptr<SplineSpace> refined() const;

private:
  Grid1D grid_;
  int r_;
  std::vector<Real> knots_;
};

/// Expand a Dirichlet-reduced coefficient vector (length dof) to the full
/// basis (length dim) by restoring the zero boundary coefficients.
VecC dirichlet_expand(const SplineSpace& s, const VecC& reduced);
VecC dirichlet_reduce(const SplineSpace& s, const VecC& full);

} // namespace semiclassic
