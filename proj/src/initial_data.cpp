#include <semiclassic/initial_data.hpp>

#include <semiclassic/potential.hpp>
#include <semiclassic/schrodinger.hpp>
#include <cmath>
#include <stdexcept>

namespace semiclassic {

namespace {

Complex gaussian_packet(Real x, Real x0, Real m, Real hbar) {
  const Real z = (x - x0) / std::sqrt(hbar);
  const Real amp = std::pow(hbar, -0.25) * std::exp(-0.5 * kPi * z * z);
  const Real phase = m * std::sqrt(std::abs(x0)) * (x - x0) / hbar;
  return amp * std::exp(kI * phase);
}

} // namespace

std::function<Complex(Real)> initial_state(const InitialDataSpec& spec, Real hbar) {
  switch (spec.family) {
    case InitialFamily::gaussian_wkb:
      return [spec, hbar](Real x) { return gaussian_packet(x, spec.x0, spec.m, hbar); };
    case InitialFamily::double_well_init:
      return [spec, hbar](Real x) {
        const Real a0 = std::exp(-12.5 * x * x);
        const Real s0 =
            -0.2 * std::log(std::exp(5 * (x - 0.5)) + std::exp(-5 * (x - 0.5)));
        return a0 * std::exp(kI * spec.m * s0 / hbar);
      };
    case InitialFamily::nonsmooth_init:
      return [spec, hbar](Real x) {
        const Real z = (x - spec.x0) / std::sqrt(hbar);
        const Real a0 = std::pow(hbar, -0.25) * std::exp(-0.5 * kPi * z * z);
        const Real s0 = 25.0 * std::sqrt(1.5) * (x - spec.x0);
        return a0 * std::exp(kI * spec.m * s0 / hbar);
      };
    case InitialFamily::tdp_init:
      return [spec, hbar](Real x) {
        const Real a0 = std::exp(-spec.lambda * spec.lambda * (x - 0.5) * (x - 0.5));
        const Real s0 = 5.0 * (x * x - x);
        return a0 * std::exp(kI * spec.m * s0 / hbar);
      };
    case InitialFamily::collision_pair:
      return [spec, hbar](Real x) {
        const Complex left = gaussian_packet(x, spec.x0, spec.m, hbar);
        const Complex right = gaussian_packet(x, -spec.x0, -spec.m, hbar);
        return left + right * std::exp(kI * 2.0 * kPi * spec.theta);
      };
    case InitialFamily::wkb_slice:
      return [spec, hbar](Real x) {
        const Real a0 = (1 + std::tanh(7 * (x + 3))) * (1 + std::tanh(7 * (1 - x)));
        const Real s0 = -(2.0 / 3.0) * std::pow(std::abs(x), 1.5);
        return a0 * std::exp(kI * spec.m * s0 / hbar);
      };
  }
  throw std::logic_error("initial_state: unknown family");
}

Real max_phase_gradient(const InitialDataSpec& spec, Real a, Real b) {
  const Real m = std::abs(spec.m);
  switch (spec.family) {
    case InitialFamily::gaussian_wkb:
    case InitialFamily::collision_pair:
      return m * std::sqrt(std::abs(spec.x0));
    case InitialFamily::double_well_init:
      return m; // |S0'| = |tanh(5(x-1/2))| <= 1
    case InitialFamily::nonsmooth_init:
      return m * 25.0 * std::sqrt(1.5);
    case InitialFamily::tdp_init:
      return m * 5.0 * std::max(std::abs(2 * a - 1), std::abs(2 * b - 1));
    case InitialFamily::wkb_slice:
      return m * std::sqrt(std::max(std::abs(a), std::abs(b)));
  }
  return 0;
}

Wavefunction build_initial_data(const InitialDataSpec& spec, const Grid1D& grid,
                                int degree, Real hbar) {
  const Real grad = max_phase_gradient(spec, grid.a(), grid.b());
  if (grad > 0) {
    const Real wavelength = 2 * kPi * hbar / grad;
    Real h_max = 0;
    const auto& nodes = grid.nodes();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      h_max = std::max(h_max, nodes[i + 1] - nodes[i]);
    if (h_max > wavelength / 8)
      throw std::runtime_error(
          "build_initial_data: grid resolves fewer than 8 points per wavelength");
  }

  auto space = std::make_shared<SplineSpace>(grid, degree);
  const Potential zero = Potential::smooth([](Real) { return 0.0; },
                                           [](Real) { return 0.0; });
  const DiscreteOperator op = assemble(space, zero, 0.0, hbar);
  const ProjectionResult proj = project_l2(op, initial_state(spec, hbar));

  Wavefunction wf;
  wf.space = std::move(space);
  wf.coeffs = proj.coeffs;
  wf.hbar = hbar;
  wf.l2_norm = proj.norm;
  wf.projection_error = proj.error;
  return wf;
}

} // namespace semiclassic
