#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <semiclassic/initial_data.hpp>
#include <semiclassic/potential.hpp>
#include <semiclassic/schrodinger.hpp>
#include <Eigen/Dense>
#include <cmath>

using namespace semiclassic;

namespace {

MatR densify(const Banded<Real>& a) {
  MatR d = MatR::Zero(a.rows(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.rows(); ++j) d(i, j) = a(i, j);
  return d;
}

StateFn dwp_datum(Real hbar) {
  return [hbar](Real x) {
    const Real a0 = std::exp(-12.5 * x * x);
    const Real s0 = -0.2 * std::log(std::exp(5 * (x - 0.5)) + std::exp(-5 * (x - 0.5)));
    return a0 * std::exp(kI * s0 / hbar);
  };
}

} // namespace

TEST_CASE("crank-nicolson multiplies eigenmodes by a unit-modulus factor") {
  const Real hbar = 1.0, dt = 0.05;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(0, 1, 20), 3);
  const Potential zero = Potential::smooth([](Real) { return 0.0; }, [](Real) { return 0.0; });
  const DiscreteOperator op = assemble(space, zero, 0.0, hbar);
  const MatR A = densify(op.hamiltonian());
  const MatR M = densify(op.mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatR> eig(A, M);
  REQUIRE(eig.info() == Eigen::Success);
  const CNStepper st(op, dt);
  for (int mode : {0, 3, 7}) {
    const Real lambda = eig.eigenvalues()[mode];
    const VecC v = eig.eigenvectors().col(mode).cast<Complex>();
    const Complex mu = (kI * hbar / dt + lambda / 2.0) / (kI * hbar / dt - lambda / 2.0);
    CHECK(std::abs(std::abs(mu) - 1.0) < 1e-14);
    const VecC w = st.step(v);
    CHECK((w - mu * v).norm() < 1e-12 * v.norm());
  }
}

TEST_CASE("mass is conserved over many steps") {
  const Real hbar = 0.25;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-2, 2, 100), 3);
  const DiscreteOperator op = assemble(space, Potential::double_well(), 0.0, hbar);
  const ProjectionResult proj = project_l2(op, dwp_datum(hbar));
  const CNStepper st(op, 0.005);
  VecC u = proj.coeffs;
  const Real m0 = op.mass_norm(u);
  for (int n = 0; n < 200; ++n) u = st.step(u);
  CHECK(std::abs(op.mass_norm(u) - m0) < 1e-10);
}

TEST_CASE("time estimator scales like dt^3 per step") {
  const Real hbar = 0.25;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-2, 2, 120), 3);
  const DiscreteOperator op = assemble(space, Potential::double_well(), 0.0, hbar);
  const DiscreteOperator opf = assemble(space->refined(), Potential::double_well(), 0.0, hbar);
  const ProjectionResult proj = project_l2(op, dwp_datum(hbar));
  const Potential V = Potential::double_well();
  const Real dt = 0.02;
  const StepEstimate e1 = estimate_step(op, opf, V, nullptr, proj.coeffs, 0.0, dt);
  const StepEstimate e2 = estimate_step(op, opf, V, nullptr, proj.coeffs, 0.0, dt / 2);
  const Real ratio = e1.et / e2.et;
  CHECK(ratio > 6.0);
  CHECK(ratio < 10.0);
}

TEST_CASE("space estimator is insensitive to the step size") {
  const Real hbar = 0.25;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-2, 2, 60), 3);
  const Potential V = Potential::double_well();
  const DiscreteOperator op = assemble(space, V, 0.0, hbar);
  const DiscreteOperator opf = assemble(space->refined(), V, 0.0, hbar);
  const ProjectionResult proj = project_l2(op, dwp_datum(hbar));
  const StepEstimate e1 = estimate_step(op, opf, V, nullptr, proj.coeffs, 0.0, 0.02);
  const StepEstimate e2 = estimate_step(op, opf, V, nullptr, proj.coeffs, 0.0, 0.01);
  CHECK(e1.es / 0.02 == doctest::Approx(e2.es / 0.01).epsilon(0.2));
}

TEST_CASE("eoc recovers synthetic orders exactly") {
  std::vector<Real> sizes{10, 20, 40, 80}, vals;
  for (Real n : sizes) vals.push_back(7.3 * std::pow(n, -2.5));
  const auto orders = eoc(vals, sizes);
  REQUIRE(orders.size() == 3);
  for (Real p : orders) CHECK(p == doctest::Approx(2.5).epsilon(1e-12));
  CHECK_THROWS(eoc({1.0}, {1.0}));
}

TEST_CASE("zero initial data stays zero") {
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-1, 1, 20), 3);
  SolveTrace tr = solve_adaptive(space, Potential::double_well(),
                                 [](Real) { return Complex(0, 0); }, 0.2, 1e-3, 0.5);
  CHECK(tr.success);
  for (const auto& snap : tr.snapshots) CHECK(snap.coeffs.norm() < 1e-14);
}

TEST_CASE("manufactured forcing keeps the true error within the reported bound") {
  // Exact solution e^{-(x-t)^2} e^{i(2x-3t)} of i u_t = -u_xx/2 + V u + f,
  // V = x^2/2, hbar = 1, with f in closed form.
  const Real hbar = 1.0, al = 1.0, c = 1.0, be = 2.0, om = 3.0;
  auto u_ex = [=](Real x, Real t) {
    return std::exp(-al * (x - c * t) * (x - c * t)) * std::exp(kI * (be * x - om * t));
  };
  ForcingFn f = [=](Real x, Real t) {
    const Real y = x - c * t;
    const Complex dxfac = Complex(-2 * al * y, be);
    const Complex ut = Complex(2 * al * c * y, -om);
    return (kI * ut + 0.5 * (dxfac * dxfac - 2 * al) - 0.5 * x * x) * u_ex(x, t);
  };
  const Real T = 0.5, tol = 1e-2;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-7, 8, 60), 3);
  AdaptiveOptions opts;
  opts.forcing = f;
  SolveTrace tr = solve_adaptive(space, Potential::smooth([](Real x) { return 0.5 * x * x; },
                                                          [](Real x) { return x; }),
                                 [&](Real x) { return u_ex(x, 0.0); }, T, tol, hbar, opts);
  REQUIRE(tr.success);
  const auto& snap = tr.snapshots.back();
  REQUIRE(snap.t == doctest::Approx(T));
  const VecC full = dirichlet_expand(*snap.space, snap.coeffs);
  // True L2 error by quadrature.
  const GaussRule rule(6);
  Real err2 = 0;
  const auto& nodes = snap.space->grid().nodes();
  for (std::size_t cidx = 0; cidx + 1 < nodes.size(); ++cidx) {
    const Real h2 = 0.5 * (nodes[cidx + 1] - nodes[cidx]);
    const Real xm = 0.5 * (nodes[cidx] + nodes[cidx + 1]);
    for (int q = 0; q < 6; ++q) {
      const Real x = xm + h2 * rule.nodes[q];
      err2 += h2 * rule.weights[q] * std::norm(snap.space->eval(full, x) - u_ex(x, T));
    }
  }
  const Real err = std::sqrt(err2);
  CHECK(tr.report.total() <= tol);
  CHECK(err <= 3.0 * tr.report.total());
}

TEST_CASE("adaptive run handles the time-dependent potential") {
  const Real hbar = 1.0;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-1, 2, 24), 3);
  auto u0 = [](Real x) {
    return std::exp(-25.0 * (x - 0.5) * (x - 0.5)) * std::exp(kI * (5 * (x * x - x)));
  };
  AdaptiveOptions opts;
  opts.snapshot_times = {0.5};
  SolveTrace tr = solve_adaptive(space, Potential::tdp(), u0, 1.0, 5e-2, hbar, opts);
  REQUIRE(tr.success);
  CHECK(tr.snapshots.size() == 3); // 0, 0.5, 1
  CHECK(tr.report.total() <= 5e-2);
  // The chirped datum spreads toward the edges of [-1,2]; the boundary
  // monitor reports it without derailing the run.
  CHECK(tr.boundary_mass_max < 0.05);
  // Mass conservation along the accepted path.
  const Real m0 = tr.report.per_step.front().mass;
  const Real m1 = tr.report.per_step.back().mass;
  CHECK(std::abs(m1 - m0) < 1e-8);
}
