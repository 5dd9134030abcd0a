#pragma once

#include <semiclassic/liouville.hpp>
#include <semiclassic/splines.hpp>
#include <semiclassic/types.hpp>
#include <semiclassic/wigner.hpp>
#include <functional>
#include <string>
#include <vector>

namespace semiclassic {

/// Moment symbol A_{alpha,beta,j}(x,k) = x^a k^b chi_{[0,4]}((-1)^j x)
/// chi_{[-1,1]}(k); j = 1 selects the left window [-4,0], j = 2 the right.
struct MomentSymbol {
  int alpha = 0, beta = 0, j = 2;

  Real x_lo() const { return j == 2 ? 0.0 : -4.0; }
  Real x_hi() const { return j == 2 ? 4.0 : 0.0; }
  Real a1(Real x) const;
  Real a2(Real k) const;
  Real operator()(Real x, Real k) const { return a1(x) * a2(k); }
  Real sup_norm() const;
  Real l2_norm() const;
  std::string name() const;
};

/// The twelve symbols of the moment family (alpha + beta <= 2, j in {1,2}).
std::vector<MomentSymbol> moment_family();

using PositionFn = std::function<Real(Real)>;

/// integral A(x) |u(x)|^2 dx by per-cell Gauss quadrature; cells containing a
/// listed breakpoint of A are split there so discontinuous windows integrate
/// exactly at quadrature order.
Real measure_position(const SplineSpace& space, const VecC& full_coeffs,
                      const PositionFn& a,
                      const std::vector<Real>& breakpoints = {});

enum class SeparableRoute { direct, via_swt };

struct SeparableResult {
  Real value = 0;
  Real quad_estimate = 0; // coarsened-grid difference
};

/// <W[u], A1(x) A2(k)> for a sampled state. The direct route integrates the
/// autocorrelation against the k transform of A2 (quadrature in K); via_swt
/// pairs the Husimi field with the symbol on its grid.
SeparableResult measure_separable(const SampledState& s, const PositionFn& a1,
                                  const PositionFn& a2,
                                  SeparableRoute route = SeparableRoute::via_swt);

/// Batched variant: the transform work is shared across all symbols.
std::vector<SeparableResult> measure_separable_batch(
    const SampledState& s,
    const std::vector<std::pair<PositionFn, PositionFn>>& obs,
    SeparableRoute route = SeparableRoute::via_swt);

/// Excess mass percentage: the fraction of total mass on {x>0} beyond one
/// half, i.e. (|u|^2({x>0}) - |u|^2({x<0})) / (2 |u|^2), in [-1/2, 1/2].
Real emp(const SplineSpace& space, const VecC& full_coeffs);
Real emp(const Ensemble& e);

enum class ObservableKind { position, separable };

/// Measurement error transported from the solver tolerance:
/// position: tol (|U| + |u|) sup|A|; separable: hbar^{-1/2} tol (|U| + |u|)
/// |A|_{L2}.
Real observable_error_bound(Real tol, ObservableKind kind, Real hbar,
                            Real norm_u, Real norm_U, Real symbol_norm);

/// rho = <x,y> / (|x| |y|).
Real correlation(const std::vector<Real>& xs, const std::vector<Real>& ys);

struct MeasurementRow {
  Real t = 0;
  std::string symbol;
  int alpha = 0, beta = 0, j = 0;
  Real quantum = 0, classical = 0, bound = 0;
  bool flag = false; // discrepancy exceeds the bound
};

void write_measurements_csv(const std::vector<MeasurementRow>& rows,
                            const std::string& path);

} // namespace semiclassic
