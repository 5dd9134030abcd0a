#pragma once

#include <semiclassic/banded.hpp>
#include <semiclassic/potential.hpp>
#include <semiclassic/splines.hpp>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semiclassic {

using StateFn = std::function<Complex(Real)>;
using ForcingFn = std::function<Complex(Real, Real)>;

/// Galerkin matrices of the semiclassical Hamiltonian on a spline space,
/// Dirichlet-reduced. hamiltonian = (hbar^2/2) * stiffness + potential,
/// so that i*hbar*M*du/dt = A*u + load.
struct DiscreteOperator {
  std::shared_ptr<const SplineSpace> space;
  Real hbar = 1.0;
  Real t_assembled = 0.0;
  Real energy_shift = 0.0;          // constant subtracted from V (gauge)
  Banded<Real> mass_full;           // dim x dim, no boundary reduction
  Banded<Real> mass, stiffness, potential; // dof x dof
  Banded<Real> boundary_mass;       // mass restricted to the 5% end regions
  Banded<Real> hamiltonian() const;

  Real mass_norm(const VecC& u) const; // sqrt(u^H M u)
};

/// Assemble mass/stiffness/potential matrices with per-cell Gauss quadrature
/// of order >= 2r+1. Every interior singular point of the potential must be a
/// breakpoint of the space.
DiscreteOperator assemble(std::shared_ptr<const SplineSpace> space,
                          const Potential& pot, Real t, Real hbar,
                          Real energy_shift = 0.0, int quad_pts = 0);

/// Re-assemble only the potential matrix at time t (time-dependent runs).
Banded<Real> assemble_potential(const SplineSpace& space, const Potential& pot,
                                Real t, Real energy_shift = 0.0, int quad_pts = 0);

/// Load vector b_i = integral f(x,t) B_i(x) dx, Dirichlet-reduced.
VecC assemble_load(const SplineSpace& space, const ForcingFn& f, Real t,
                   int quad_pts = 0);

/// L2 projection onto the Dirichlet-reduced space; error is the quadrature
/// norm of the projection residual.
struct ProjectionResult {
  VecC coeffs; // reduced
  Real error;
  Real norm; // L2 norm of the projected state
};
ProjectionResult project_l2(const DiscreteOperator& op, const StateFn& u0,
                            int quad_pts = 0);

/// One Crank-Nicolson step with a cached banded factorization:
/// (i hbar M/dt - A/2) u_next = (i hbar M/dt + A/2) u_prev + load(t_mid).
class CNStepper {
public:
  CNStepper(const DiscreteOperator& op, Real dt);
  CNStepper(const DiscreteOperator& op, const Banded<Real>& potential_mid, Real dt);

  VecC step(const VecC& u) const;
  VecC step(const VecC& u, const VecC& midpoint_load) const;
  Real dt() const { return dt_; }

private:
  void build(const DiscreteOperator& op, const Banded<Real>& pot, Real dt);
  Real dt_;
  Banded<Complex> lhs_, rhs_;
  BandedLU<Complex> lu_;
};

/// Free-function form of the CN step (assembles the factorization each call).
VecC cn_step(const DiscreteOperator& op_midpoint, const VecC& u_prev, Real dt,
             const VecC* midpoint_load = nullptr);

/// Exact transfer of a spline to a space with additional knots (Boehm
/// insertion); both vectors are full-length coefficient vectors.
VecC transfer_to_refined(const SplineSpace& coarse, const SplineSpace& fine,
                         const VecC& full_coeffs);

struct StepRecord {
  Real t, dt;
  int dof;
  Real es, et, mass, boundary_mass;
};

struct EstimatorReport {
  Real E0 = 0, ES = 0, ET = 0;
  Real tol = 0;
  std::vector<StepRecord> per_step;
  Real total() const { return E0 + ES + ET; }
};

struct Snapshot {
  Real t;
  std::shared_ptr<const SplineSpace> space;
  VecC coeffs; // reduced
  Real hbar;
  Real energy_shift;
};

struct SolveTrace {
  std::vector<Snapshot> snapshots;
  EstimatorReport report;
  bool success = false;
  std::string failure_reason;
  bool domain_warning = false; // boundary mass exceeded 1e-6
  Real boundary_mass_max = 0;
};

/// Two-level hierarchical estimator around one CN step: the step is advanced
/// with two half steps; et compares against a single full step (Richardson,
/// factor 1/(2^2-1)); es is the coarse-unrepresentable component of the same
/// step taken on a uniformly bisected space.
struct StepEstimate {
  VecC u_next; // reduced, coarse space
  Real es, et;
};

StepEstimate estimate_step(const DiscreteOperator& op,
                           const DiscreteOperator& op_fine, const Potential& pot,
                           const ForcingFn& forcing, const VecC& u_prev, Real t,
                           Real dt);

struct AdaptiveOptions {
  std::vector<Real> snapshot_times; // T is always recorded
  Real dt_init = 0;                 // 0 -> T/200
  Real energy_shift = 0.0;
  int max_dof = 400000;
  long max_steps = 5000000;
  ForcingFn forcing;
  int quad_pts = 0;
  int max_redo_per_step = 60;
};

SolveTrace solve_adaptive(std::shared_ptr<const SplineSpace> space0,
                          const Potential& pot, const StateFn& u0, Real T,
                          Real tol, Real hbar, AdaptiveOptions opts = {});

/// Fixed uniform-mesh run accumulating the space/time estimators (EOC tables).
struct UniformRunResult {
  Real E0 = 0, ES = 0, ET = 0;
  VecC final_state; // reduced
  std::shared_ptr<const SplineSpace> space;
};
UniformRunResult run_uniform_estimate(std::shared_ptr<const SplineSpace> space,
                                      const Potential& pot, const StateFn& u0,
                                      Real T, int nsteps, Real hbar,
                                      bool with_es, bool with_et,
                                      const ForcingFn& forcing = nullptr,
                                      Real energy_shift = 0.0);

/// Experimental orders of convergence: EOC_l = log(v_l/v_{l+1}) / log(n_{l+1}/n_l).
std::vector<Real> eoc(const std::vector<Real>& values, const std::vector<Real>& sizes);

} // namespace semiclassic
