#pragma once

#include <semiclassic/grid.hpp>
#include <semiclassic/splines.hpp>
#include <semiclassic/types.hpp>
#include <functional>
#include <memory>

namespace semiclassic {

enum class InitialFamily {
  gaussian_wkb,     // hbar^{-1/4} e^{-(pi/2)((x-x0)/sqrt(hbar))^2} e^{i m sqrt|x0| (x-x0)/hbar}
  double_well_init, // a0 = e^{-25x^2/2}, S0 = -(1/5) log(e^{5(x-1/2)} + e^{-5(x-1/2)})
  nonsmooth_init,   // Gaussian envelope, S0 = 25 sqrt(1.5) (x-x0)
  tdp_init,         // a0 = e^{-lambda^2 (x-1/2)^2}, S0 = 5(x^2-x)
  collision_pair,   // two mirrored packets with relative phase e^{i 2 pi theta}
  wkb_slice,        // a0 = (1+tanh(7(x+3)))(1+tanh(7(1-x))), S0 = -(2/3)|x|^{3/2}
};

struct InitialDataSpec {
  InitialFamily family = InitialFamily::gaussian_wkb;
  Real x0 = -1.5;
  Real m = 1.0;     // momentum multiplier on the phase
  Real theta = 0.0; // relative phase (collision_pair only)
  Real lambda = 5.0;
};

/// Closed-form evaluator of the datum.
std::function<Complex(Real)> initial_state(const InitialDataSpec& spec, Real hbar);

/// Largest phase gradient |m S0'| over [a,b]; 0 for phase-free data.
Real max_phase_gradient(const InitialDataSpec& spec, Real a, Real b);

struct Wavefunction {
  std::shared_ptr<const SplineSpace> space;
  VecC coeffs; // Dirichlet-reduced
  Real hbar = 1.0;
  Real l2_norm = 0;
  Real projection_error = 0;
};

/// L2-project the datum onto the spline space on the given grid. Throws if the
/// grid resolves the oscillation with fewer than 8 points per wavelength
/// 2 pi hbar / |m S0'|.
Wavefunction build_initial_data(const InitialDataSpec& spec, const Grid1D& grid,
                                int degree, Real hbar);

} // namespace semiclassic
