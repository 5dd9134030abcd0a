#pragma once

#include <semiclassic/potential.hpp>
#include <semiclassic/types.hpp>
#include <semiclassic/wigner.hpp>
#include <functional>
#include <string>
#include <vector>

namespace semiclassic {

enum class EnergyLabel { S_plus, S_minus, S_zero };

struct Particle {
  Real weight = 0;
  Real x = 0, k = 0;
  EnergyLabel label = EnergyLabel::S_zero;
};

struct Ensemble {
  std::vector<Particle> particles;
  Real hbar = 1;
  Real total_weight() const;
};

/// What happens to a particle that lands exactly on the conical fixed point
/// with saddle energy. All three choices are weak solutions; freezing is the
/// side-neutral default.
enum class VertexPolicy { freeze, scatter_left, scatter_right };

struct FlowSpec {
  enum class Mode { closed_form_conical, numeric_rk4 };
  Potential potential = Potential::abs_linear(-1.0);
  Mode mode = Mode::closed_form_conical;
  Real slope = 1.0;    // c in V = V(x*) - c|x - x*| (closed-form mode)
  Real center = 0.0;   // x*
  VertexPolicy policy = VertexPolicy::freeze;
  Real hbar = 1.0;     // sets the RK4 step min(1e-3, sqrt(hbar)/10)

  Real saddle_energy() const { return potential.value(center); }
};

/// H(x,k) = (2 pi k)^2 / 2 + V(x).
Real hamiltonian(Real x, Real k, const Potential& V);

/// Characteristic flow of H for time t (t may be negative in smooth regions).
/// Closed-form mode stitches the per-side quadratic arcs at crossings of
/// x = x*; a particle arriving at the vertex with zero momentum follows the
/// continuation policy. Numeric mode is RK4 with bisection event location.
std::pair<Real, Real> trajectory(Real x0, Real k0, Real t, const FlowSpec& flow);

struct PartitionWeights {
  Real plus = 0, minus = 0, zero = 0;
};

/// Label every particle by its energy relative to the saddle value V(x*):
/// S_plus above, S_minus below, S_zero within 1e-12.
PartitionWeights partition(Ensemble& e, const Potential& V, Real center);

/// Deterministic cell-center sampling of a (nonnegative) phase-space field.
/// Cells are merged into square blocks so at most n_target particles result;
/// blocks with mass below mass_threshold times the heaviest block are
/// dropped and their mass reported as truncated.
struct SampleResult {
  Ensemble ensemble;
  Real truncated_mass = 0;
};
SampleResult sample_particles(const PhaseSpaceField& f, int n_target,
                              Real mass_threshold);

/// Move every particle along its trajectory; weights and labels unchanged.
Ensemble propagate(const Ensemble& e, Real t, const FlowSpec& flow);

using SymbolFn = std::function<Real(Real, Real)>;

/// sum_j M_j A(X_j, K_j).
Real measure_ensemble(const Ensemble& e, const SymbolFn& a);

struct InterferenceEvent {
  Real t = 0;
  Real mass_left = 0, mass_right = 0;
};

struct InterferenceOptions {
  Real eps = 0;       // 0 = 3 sqrt(hbar)
  Real window = 0;    // 0 = sqrt(hbar)
  Real mass_frac = 0.05;
  Real k_star = 0;    // vertex momentum
};

/// For every particle transiting the phase-space ball of radius eps around
/// (x*, k*), record the time of closest approach tagged by the side it came
/// from; an event fires in a window of width `window` where both sides
/// deliver at least mass_frac of the total mass.
std::vector<InterferenceEvent> detect_interference(const Ensemble& e,
                                                   const FlowSpec& flow, Real T,
                                                   InterferenceOptions opt = {});

void write_ensemble_csv(const Ensemble& e, const std::string& path);
void write_events_csv(const std::vector<InterferenceEvent>& events,
                      const std::string& path);

} // namespace semiclassic
