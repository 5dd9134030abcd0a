#pragma once

#include <semiclassic/splines.hpp>
#include <semiclassic/test_function.hpp>
#include <semiclassic/types.hpp>
#include <string>
#include <utility>

namespace semiclassic {

/// Uniformly sampled complex state (the transforms operate on samples only).
struct SampledState {
  Real x0 = 0, dx = 1;
  VecC u;
  Real hbar = 1;
  Real x(int i) const { return x0 + i * dx; }
};

/// Sample a spline state on a uniform grid fine enough for phase content up
/// to wavenumber k_cap (8 points per wavelength hbar/k_cap).
SampledState resample(const SplineSpace& space, const VecC& full_coeffs,
                      Real hbar, Real k_cap = 0.5);

struct PhaseSpaceField {
  enum class Kind { wigner, swt, husimi, classical_density };
  VecR x, k; // uniform axes
  MatR values; // x rows, k cols
  Real hbar = 1;
  Real sigma_x = 0, sigma_k = 0;
  Kind kind = Kind::wigner;

  Real dx() const { return x.size() > 1 ? x[1] - x[0] : 1.0; }
  Real dk() const { return k.size() > 1 ? k[1] - k[0] : 1.0; }
  Real total_mass() const { return values.sum() * dx() * dk(); }
  Real l2_norm() const { return std::sqrt(values.squaredNorm() * dx() * dk()); }
};

/// Wigner transform W(x,k) = integral e^{-2 pi i k y} u(x+hbar y/2)
/// conj(u)(x-hbar y/2) dy, evaluated by FFT over the y samples. x_stride
/// decimates the output x axis; y_count limits the y range (0 = cover the
/// whole support) and is rejected if the autocorrelation has not decayed
/// below 1e-8 of its peak at the cutoff.
PhaseSpaceField wigner(const SampledState& s, int x_stride = 1, int y_count = 0);

/// Smoothed Wigner transform, factored form: Gaussian convolution in x'
/// (truncated at 8 standard deviations) followed by the damped FFT in y.
/// sigma_x = 0 skips the convolution (k-only smoothing).
PhaseSpaceField swt(const SampledState& s, Real sigma_x, Real sigma_k,
                    int x_stride = 1);

/// SWT with sigma_x = sigma_k = 1; nonnegative up to 1e-12 relative.
PhaseSpaceField husimi(const SampledState& s, int x_stride = 1);

/// Trapezoid marginals: (position density over k, momentum density over x).
std::pair<VecR, VecR> marginals(const PhaseSpaceField& f);

struct PairResult {
  Real value = 0;
  Real coarse = 0; // same quadrature on every other grid point
  Real error_estimate() const { return std::abs(value - coarse); }
};

/// <field, phi> by 2D quadrature on the field grid.
PairResult pair_field(const PhaseSpaceField& f, const TestFunction& phi);
PairResult pair_field(const PhaseSpaceField& f, const MatR& phi_on_grid);

/// Lemma-type bound hbar (pi/2) sigma_k^2 M^2 |||phi|||_M for the pairing gap
/// between the Wigner transform and its k-smoothed version.
Real smoothing_gap_bound(Real hbar, Real sigma_k, Real M, Real bm_norm_phi);

struct GapCheck {
  Real lhs = 0, rhs = 0;
  bool ok = false;
};

/// Computes |<W - W^{0,sigma_k}, phi>| against the bound.
GapCheck verify_gap(const SampledState& s, const TestFunction& phi, Real M,
                    Real sigma_k, int m_max = 24);

/// Grid dump: <base>.meta key/value sidecar plus <base>.bin flat row-major
/// (x-major) little-endian doubles.
void save_field(const PhaseSpaceField& f, const std::string& base);
PhaseSpaceField load_field(const std::string& base);

} // namespace semiclassic
