#include <semiclassic/observables.hpp>

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace semiclassic {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

Real ipow(Real x, int p) {
  Real r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

} // namespace

Real MomentSymbol::a1(Real x) const {
  if (x < x_lo() || x > x_hi()) return 0.0;
  return ipow(x, alpha);
}

Real MomentSymbol::a2(Real k) const {
  if (k < -1.0 || k > 1.0) return 0.0;
  return ipow(k, beta);
}

Real MomentSymbol::sup_norm() const { return ipow(4.0, alpha); }

Real MomentSymbol::l2_norm() const {
  const Real ix = ipow(4.0, 2 * alpha + 1) / (2 * alpha + 1);
  const Real ik = 2.0 / (2 * beta + 1);
  return std::sqrt(ix * ik);
}

std::string MomentSymbol::name() const {
  return "A_" + std::to_string(alpha) + "_" + std::to_string(beta) + "_" +
         std::to_string(j);
}

std::vector<MomentSymbol> moment_family() {
  std::vector<MomentSymbol> out;
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b)
      for (int j : {1, 2}) out.push_back({a, b, j});
  return out;
}

Real measure_position(const SplineSpace& space, const VecC& full_coeffs,
                      const PositionFn& a, const std::vector<Real>& breakpoints) {
  const GaussRule rule(space.degree() + 3);
  const auto& nodes = space.grid().nodes();
  Real sum = 0;
  for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
    // Split the cell at any interior breakpoint of the symbol.
    std::vector<Real> pts{nodes[c]};
    for (Real b : breakpoints)
      if (b > nodes[c] && b < nodes[c + 1]) pts.push_back(b);
    pts.push_back(nodes[c + 1]);
    std::sort(pts.begin(), pts.end());
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const Real h2 = 0.5 * (pts[s + 1] - pts[s]);
      const Real xm = 0.5 * (pts[s] + pts[s + 1]);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const Real x = xm + h2 * rule.nodes[q];
        sum += h2 * rule.weights[q] * a(x) * std::norm(space.eval(full_coeffs, x));
      }
    }
  }
  return sum;
}

std::vector<SeparableResult> measure_separable_batch(
    const SampledState& s, const std::vector<std::pair<PositionFn, PositionFn>>& obs,
    SeparableRoute route) {
  const int n = static_cast<int>(s.u.size());
  const int nobs = static_cast<int>(obs.size());
  std::vector<SeparableResult> out(nobs);

  if (route == SeparableRoute::via_swt) {
    const PhaseSpaceField f = husimi(s);
    const int nx = static_cast<int>(f.x.size()), nk = static_cast<int>(f.k.size());
    for (int o = 0; o < nobs; ++o) {
      VecR a2v(nk);
      for (int m = 0; m < nk; ++m) a2v[m] = obs[o].second(f.k[m]);
      Real full = 0, coarse = 0;
      for (int i = 0; i < nx; ++i) {
        const Real a1v = obs[o].first(f.x[i]);
        if (a1v == 0) continue;
        full += a1v * f.values.row(i).dot(a2v);
        if (i % 2 == 0) {
          Real rc = 0;
          for (int m = 0; m < nk; m += 2) rc += f.values(i, m) * a2v[m];
          coarse += a1v * rc;
        }
      }
      out[o].value = full * f.dx() * f.dk();
      out[o].quad_estimate = std::abs(out[o].value - coarse * 4 * f.dx() * f.dk());
    }
    return out;
  }

  // Direct route: stream the Wigner rows (FFT over the autocorrelation) and
  // pair each with A1(x) A2(k); the stride-2 subsum provides the estimate.
  const Real dy = 2 * s.dx / s.hbar;
  const int nfft = next_pow2(2 * n);
  const Real dk = 1.0 / (nfft * dy);
  MatR a2v(nobs, nfft);
  for (int o = 0; o < nobs; ++o)
    for (int m = 0; m < nfft; ++m) a2v(o, m) = obs[o].second((m - nfft / 2) * dk);

  Eigen::FFT<Real> fft;
  VecC a(nfft), spec(nfft);
  VecR row(nfft);
  VecR full = VecR::Zero(nobs), coarse = VecR::Zero(nobs);
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int o = 0; o < nobs; ++o) any = any || obs[o].first(s.x(i)) != 0;
    if (!any) continue;
    a.setZero();
    for (int jj = 0; jj < n; ++jj) {
      if (i + jj >= n || i - jj < 0) break;
      const Complex c = s.u[i + jj] * std::conj(s.u[i - jj]);
      a[jj] = c;
      if (jj > 0) a[nfft - jj] = std::conj(c);
    }
    fft.fwd(spec, a);
    for (int m = 0; m < nfft; ++m) row[m] = spec[(m + nfft / 2) % nfft].real() * dy;
    for (int o = 0; o < nobs; ++o) {
      const Real a1v = obs[o].first(s.x(i));
      if (a1v == 0) continue;
      const Real rd = row.dot(a2v.row(o));
      full[o] += a1v * rd;
      if (i % 2 == 0) coarse[o] += a1v * rd;
    }
  }
  for (int o = 0; o < nobs; ++o) {
    out[o].value = full[o] * s.dx * dk;
    out[o].quad_estimate = std::abs(out[o].value - coarse[o] * 2 * s.dx * dk);
  }
  return out;
}

SeparableResult measure_separable(const SampledState& s, const PositionFn& a1,
                                  const PositionFn& a2, SeparableRoute route) {
  return measure_separable_batch(s, {{a1, a2}}, route)[0];
}

Real emp(const SplineSpace& space, const VecC& full_coeffs) {
  const Real diff = measure_position(
      space, full_coeffs,
      [](Real x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }, {0.0});
  const Real total =
      measure_position(space, full_coeffs, [](Real) { return 1.0; }, {});
  return total > 0 ? 0.5 * diff / total : 0.0;
}

Real emp(const Ensemble& e) {
  const Real diff = measure_ensemble(e, [](Real x, Real) {
    return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  });
  const Real total = e.total_weight();
  return total > 0 ? 0.5 * diff / total : 0.0;
}

Real observable_error_bound(Real tol, ObservableKind kind, Real hbar,
                            Real norm_u, Real norm_U, Real symbol_norm) {
  const Real base = tol * (norm_u + norm_U) * symbol_norm;
  return kind == ObservableKind::position ? base : base / std::sqrt(hbar);
}

Real correlation(const std::vector<Real>& xs, const std::vector<Real>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("correlation: need equal lengths >= 2");
  Real xy = 0, xx = 0, yy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xy += xs[i] * ys[i];
    xx += xs[i] * xs[i];
    yy += ys[i] * ys[i];
  }
  if (xx == 0 || yy == 0)
    throw std::invalid_argument("correlation: zero vector");
  return xy / std::sqrt(xx * yy);
}

void write_measurements_csv(const std::vector<MeasurementRow>& rows,
                            const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_measurements_csv: cannot open " + path);
  f.precision(17);
  f << "t,symbol,alpha,beta,j,quantum,classical,bound,flag\n";
  for (const auto& r : rows)
    f << r.t << "," << r.symbol << "," << r.alpha << "," << r.beta << "," << r.j
      << "," << r.quantum << "," << r.classical << "," << r.bound << ","
      << (r.flag ? 1 : 0) << "\n";
}

} // namespace semiclassic
