#include <semiclassic/splines.hpp>

#include <cmath>
#include <stdexcept>

namespace semiclassic {

GaussRule::GaussRule(int npts) {
  if (npts < 1) throw std::invalid_argument("GaussRule: npts >= 1");
  nodes.resize(npts);
  weights.resize(npts);
  // Newton on Legendre polynomials.
  for (int i = 0; i < npts; ++i) {
    Real x = std::cos(kPi * (i + 0.75) / (npts + 0.5));
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1.0, p1 = x;
      for (int k = 2; k <= npts; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const Real dp = npts * (x * p1 - p0) / (x * x - 1.0);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    Real p0 = 1.0, p1 = x;
    for (int k = 2; k <= npts; ++k) {
      const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const Real dp = npts * (x * p1 - p0) / (x * x - 1.0);
    nodes[npts - 1 - i] = x;
    weights[npts - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

SplineSpace::SplineSpace(Grid1D grid, int degree) : grid_(std::move(grid)), r_(degree) {
  if (degree < 1) throw std::invalid_argument("SplineSpace: degree >= 1");
  const auto& nodes = grid_.nodes();
  knots_.reserve(nodes.size() + 2 * r_);
  for (int i = 0; i <= r_; ++i) knots_.push_back(grid_.a());
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) knots_.push_back(nodes[i]);
  for (int i = 0; i <= r_; ++i) knots_.push_back(grid_.b());
}

int SplineSpace::find_span(Real x) const {
  const int n = dim() - 1;
  if (x >= knots_[n + 1]) return n;
  if (x <= knots_[r_]) return r_;
  int lo = r_, hi = n + 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (x < knots_[mid] ? hi : lo) = mid;
  }
  return lo;
}

MatR SplineSpace::basis(int span, Real x, int nder) const {
  // de Boor recursion with derivative triangle ("DersBasisFuns").
  const int p = r_;
  MatR ndu(p + 1, p + 1);
  std::vector<Real> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    Real saved = 0.0;
    for (int k = 0; k < j; ++k) {
      ndu(j, k) = right[k + 1] + left[j - k];
      const Real temp = ndu(k, j - 1) / ndu(j, k);
      ndu(k, j) = saved + right[k + 1] * temp;
      saved = left[j - k] * temp;
    }
    ndu(j, j) = saved;
  }
  MatR ders = MatR::Zero(nder + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
  MatR a(2, p + 1);
  for (int rr = 0; rr <= p; ++rr) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= nder; ++k) {
      Real d = 0.0;
      const int rk = rr - k, pk = p - k;
      if (rr >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = rr - 1 <= pk ? k - 1 : p - rr;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (rr <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, rr);
        d += a(s2, k) * ndu(rr, pk);
      }
      ders(k, rr) = d;
      std::swap(s1, s2);
    }
  }
  Real fac = p;
  for (int k = 1; k <= nder; ++k) {
    ders.row(k) *= fac;
    fac *= (p - k);
  }
  return ders;
}

Complex SplineSpace::eval(const VecC& c, Real x, int der) const {
  if (x < grid_.a() || x > grid_.b()) return Complex(0, 0);
  const int span = find_span(x);
  const MatR b = basis(span, x, der);
  Complex s(0, 0);
  const int i0 = first_basis(span);
  for (int j = 0; j <= r_; ++j) s += c[i0 + j] * b(der, j);
  return s;
}

std::shared_ptr<SplineSpace> SplineSpace::refined() const {
  const auto& nodes = grid_.nodes();
  std::vector<Real> fine;
  fine.reserve(2 * nodes.size());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    fine.push_back(nodes[i]);
    fine.push_back(0.5 * (nodes[i] + nodes[i + 1]));
  }
  fine.push_back(nodes.back());
  return std::make_shared<SplineSpace>(Grid1D(grid_.a(), grid_.b(), std::move(fine)), r_);
}

VecC dirichlet_expand(const SplineSpace& s, const VecC& reduced) {
  VecC full = VecC::Zero(s.dim());
  full.segment(1, s.dof()) = reduced;
  return full;
}

VecC dirichlet_reduce(const SplineSpace& s, const VecC& full) {
  return full.segment(1, s.dof());
}

} // namespace semiclassic
