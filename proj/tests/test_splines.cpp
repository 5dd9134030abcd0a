#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <semiclassic/banded.hpp>
#include <semiclassic/potential.hpp>
#include <semiclassic/schrodinger.hpp>
#include <semiclassic/splines.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <random>

using namespace semiclassic;

namespace {

Potential zero_potential() {
  return Potential::smooth([](Real) { return 0.0; }, [](Real) { return 0.0; });
}

} // namespace

TEST_CASE("gauss rules integrate polynomials exactly") {
  for (int q = 1; q <= 10; ++q) {
    const GaussRule rule(q);
    for (int deg = 0; deg <= 2 * q - 1; ++deg) {
      Real s = 0;
      for (int i = 0; i < q; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const Real exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
}

TEST_CASE("basis forms a partition of unity") {
  for (int r : {1, 2, 3, 5}) {
    const SplineSpace s(Grid1D::uniform(-1.3, 2.1, 17), r);
    std::mt19937 rng(7);
    std::uniform_real_distribution<Real> dist(-1.3, 2.1);
    for (int trial = 0; trial < 50; ++trial) {
      const Real x = dist(rng);
      const MatR b = s.basis(s.find_span(x), x, 1);
      CHECK(b.row(0).sum() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(std::abs(b.row(1).sum()) < 1e-10);
    }
  }
}

TEST_CASE("spline spaces reproduce polynomials up to their degree") {
  for (int r : {2, 3, 5}) {
    const SplineSpace s(Grid1D::uniform(0.0, 1.0, 9), r);
    // Interpolate x^r at Greville-like sample points by least squares on a
    // dense sample, then check pointwise reproduction.
    const int nsamp = 5 * s.dim();
    MatC A = MatC::Zero(nsamp, s.dim());
    VecC rhs(nsamp);
    for (int i = 0; i < nsamp; ++i) {
      const Real x = Real(i) / (nsamp - 1);
      const int span = s.find_span(x);
      const MatR b = s.basis(span, x, 0);
      for (int j = 0; j <= r; ++j) A(i, s.first_basis(span) + j) = b(0, j);
      rhs[i] = std::pow(x, r) + 0.5 * x - 0.25;
    }
    const VecC c = A.colPivHouseholderQr().solve(rhs);
    for (Real x : {0.05, 0.33, 0.71, 0.99}) {
      const Real exact = std::pow(x, r) + 0.5 * x - 0.25;
      CHECK(std::abs(s.eval(c, x) - exact) < 1e-10);
      const Real dexact = r * std::pow(x, r - 1) + 0.5;
      CHECK(std::abs(s.eval(c, x, 1) - dexact) < 1e-8);
    }
  }
}

TEST_CASE("linear spline stiffness is the classic tridiagonal") {
  const int M = 10;
  const Real h = 1.0 / M;
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(0, 1, M), 1);
  const DiscreteOperator op = assemble(space, zero_potential(), 0.0, 1.0);
  for (int i = 0; i < op.stiffness.rows(); ++i) {
    CHECK(op.stiffness(i, i) == doctest::Approx(2.0 / h));
    if (i > 0) CHECK(op.stiffness(i, i - 1) == doctest::Approx(-1.0 / h));
    CHECK(op.mass(i, i) == doctest::Approx(2.0 * h / 3.0));
    if (i > 0) CHECK(op.mass(i, i - 1) == doctest::Approx(h / 6.0));
  }
}

TEST_CASE("mass matrix row sums integrate the basis") {
  // Sum_j M_ij = integral B_i, and the basis sums to one, so the grand sum
  // is the interval length.
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-2, 2, 13), 3);
  const DiscreteOperator op = assemble(space, zero_potential(), 0.0, 1.0);
  Real total = 0;
  for (int i = 0; i < op.mass_full.rows(); ++i)
    for (int j = 0; j < op.mass_full.rows(); ++j) total += op.mass_full(i, j);
  CHECK(total == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("potential matrix with V=10|x| matches adaptive quadrature") {
  // Breakpoint at the kink keeps the per-cell quadrature exact.
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-1, 1, 8), 2);
  const Potential V = Potential::abs_linear(10.0);
  const DiscreteOperator op = assemble(space, V, 0.0, 1.0);
  // Oracle: very fine midpoint rule per entry.
  const VecC e0 = VecC::Unit(op.potential.rows(), 2);
  for (int i = 2; i <= 4; ++i) {
    const VecC ei = VecC::Unit(op.potential.rows(), i);
    const VecC fi = dirichlet_expand(*space, ei);
    const VecC f0 = dirichlet_expand(*space, e0);
    Real s = 0;
    const int n = 200000;
    for (int q = 0; q < n; ++q) {
      const Real x = -1.0 + 2.0 * (q + 0.5) / n;
      s += 2.0 / n * 10.0 * std::abs(x) * (space->eval(fi, x) * space->eval(f0, x)).real();
    }
    CHECK(band_quad(op.potential, ei, e0).real() == doctest::Approx(s).epsilon(1e-6));
  }
}

TEST_CASE("assembly refuses a kink inside a cell") {
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(-1, 1, 7), 2);
  CHECK_THROWS(assemble(space, Potential::abs_linear(1.0), 0.0, 1.0));
}

TEST_CASE("banded LU agrees with dense solve") {
  std::mt19937 rng(42);
  std::normal_distribution<Real> dist;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 40, kl = 3, ku = 2;
    Banded<Real> a(n, kl, ku);
    MatR dense = MatR::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i) {
        const Real v = dist(rng) + (i == j ? 4.0 : 0.0);
        a(i, j) = v;
        dense(i, j) = v;
      }
    VecR b(n);
    for (int i = 0; i < n; ++i) b[i] = dist(rng);
    const BandedLU<Real> lu(a);
    const VecR x = lu.solve(b);
    const VecR xd = dense.partialPivLu().solve(b);
    CHECK((x - xd).norm() < 1e-11 * xd.norm());
    const VecR xr = lu.solve_refined(a, b);
    CHECK((dense * xr - b).norm() < 1e-12 * b.norm());
  }
}

TEST_CASE("complex banded LU agrees with dense solve") {
  std::mt19937 rng(1);
  std::normal_distribution<Real> dist;
  const int n = 30, kl = 2, ku = 2;
  Banded<Complex> a(n, kl, ku);
  MatC dense = MatC::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i) {
      const Complex v = Complex(dist(rng), dist(rng)) + (i == j ? Complex(3, 3) : Complex(0, 0));
      a(i, j) = v;
      dense(i, j) = v;
    }
  VecC b(n);
  for (int i = 0; i < n; ++i) b[i] = Complex(dist(rng), dist(rng));
  const BandedLU<Complex> lu(a);
  const VecC x = lu.solve_refined(a, b);
  CHECK((dense * x - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("banded matvec and quadratic form match dense") {
  std::mt19937 rng(5);
  std::normal_distribution<Real> dist;
  const int n = 25, k = 3;
  Banded<Real> a(n, k, k);
  MatR dense = MatR::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - k); i <= std::min(n - 1, j + k); ++i) {
      const Real v = dist(rng);
      a(i, j) = v;
      dense(i, j) = v;
    }
  VecC x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = Complex(dist(rng), dist(rng));
    y[i] = Complex(dist(rng), dist(rng));
  }
  CHECK((band_mul(a, x) - dense.cast<Complex>() * x).norm() < 1e-13);
  const Complex q = band_quad(a, x, y);
  const Complex qd = x.dot(dense.cast<Complex>() * y);
  CHECK(std::abs(q - qd) < 1e-12);
}

TEST_CASE("knot insertion transfers a spline exactly") {
  const SplineSpace coarse(Grid1D::uniform(-1, 1, 6), 3);
  const auto fine = coarse.refined();
  std::mt19937 rng(9);
  std::normal_distribution<Real> dist;
  VecC c(coarse.dim());
  for (int i = 0; i < c.size(); ++i) c[i] = Complex(dist(rng), dist(rng));
  const VecC cf = transfer_to_refined(coarse, *fine, c);
  REQUIRE(cf.size() == fine->dim());
  for (Real x = -0.999; x < 1.0; x += 0.0713)
    CHECK(std::abs(coarse.eval(c, x) - fine->eval(cf, x)) < 1e-13);
  // Boundary coefficients stay put.
  CHECK(std::abs(cf[0] - c[0]) < 1e-15);
  CHECK(std::abs(cf[cf.size() - 1] - c[c.size() - 1]) < 1e-15);
}

TEST_CASE("generalized eigenpair of the free hamiltonian via inverse iteration") {
  // A v = lambda M v with A = stiffness/2 on [0,1]: continuum eigenvalues
  // (pi n)^2/2; cubic splines on a modest mesh get the ground state closely.
  auto space = std::make_shared<SplineSpace>(Grid1D::uniform(0, 1, 24), 3);
  DiscreteOperator op = assemble(space, zero_potential(), 0.0, 1.0);
  const int n = op.mass.rows();
  Banded<Real> a = op.stiffness;
  a.raw() *= 0.5;
  // Inverse iteration on (A - mu M) with mu below the ground state.
  const Real mu = 2.0;
  Banded<Real> shifted = a;
  shifted.axpy(-mu, op.mass);
  const BandedLU<Real> lu(shifted);
  VecR v = VecR::Ones(n);
  Real lambda = 0;
  for (int it = 0; it < 60; ++it) {
    VecR w = lu.solve(band_mul(op.mass, v));
    w /= w.norm();
    lambda = band_quad(a, w, w) / band_quad(op.mass, w, w);
    v = w;
  }
  CHECK(lambda == doctest::Approx(kPi * kPi / 2).epsilon(1e-8));
  // Residual of the generalized eigenproblem.
  const VecR res = band_mul(a, v) - lambda * band_mul(op.mass, v);
  CHECK(res.norm() < 1e-8);
}
