#include <semiclassic/wigner.hpp>

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>

namespace semiclassic {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

const char* kind_name(PhaseSpaceField::Kind k) {
  switch (k) {
    case PhaseSpaceField::Kind::wigner: return "wigner";
    case PhaseSpaceField::Kind::swt: return "swt";
    case PhaseSpaceField::Kind::husimi: return "husimi";
    case PhaseSpaceField::Kind::classical_density: return "classical_density";
  }
  return "unknown";
}

PhaseSpaceField::Kind kind_from_name(const std::string& s) {
  if (s == "wigner") return PhaseSpaceField::Kind::wigner;
  if (s == "swt") return PhaseSpaceField::Kind::swt;
  if (s == "husimi") return PhaseSpaceField::Kind::husimi;
  if (s == "classical_density") return PhaseSpaceField::Kind::classical_density;
  throw std::runtime_error("load_field: unknown kind " + s);
}

/// FFT over the symmetric product array a_j (j = -Ny..Ny-1 wrapped into
/// length nfft) and unwrap into k order -nfft/2..nfft/2-1.
struct YTransform {
  Eigen::FFT<Real> fft;
  VecC buf_in, buf_out;

  VecR run(const VecC& a, Real dy, Real& im_max, Real& re_max) {
    const int nfft = static_cast<int>(a.size());
    buf_out.resize(nfft);
    VecC tmp = a;
    fft.fwd(buf_out, tmp);
    VecR row(nfft);
    for (int n = 0; n < nfft; ++n) {
      const int src = (n + nfft / 2) % nfft; // k index n-nfft/2
      const Complex v = buf_out[src] * dy;
      im_max = std::max(im_max, std::abs(v.imag()));
      re_max = std::max(re_max, std::abs(v.real()));
      row[n] = v.real();
    }
    return row;
  }
};

} // namespace

SampledState resample(const SplineSpace& space, const VecC& full_coeffs,
                      Real hbar, Real k_cap) {
  if (k_cap <= 0) throw std::invalid_argument("resample: k_cap > 0");
  SampledState s;
  s.hbar = hbar;
  const Real a = space.grid().a(), b = space.grid().b();
  const Real dx_target = hbar / (8 * k_cap);
  const int n = static_cast<int>(std::ceil((b - a) / dx_target)) + 1;
  s.x0 = a;
  s.dx = (b - a) / (n - 1);
  s.u.resize(n);
  for (int i = 0; i < n; ++i) s.u[i] = space.eval(full_coeffs, a + i * s.dx);
  return s;
}

PhaseSpaceField wigner(const SampledState& s, int x_stride, int y_count) {
  const int n = static_cast<int>(s.u.size());
  if (n < 2) throw std::invalid_argument("wigner: need at least 2 samples");
  const Real dy = 2 * s.dx / s.hbar;
  int ny = y_count > 0 ? y_count : n;
  ny = std::min(ny, n);
  if (y_count > 0 && y_count < n) {
    // The autocorrelation must have decayed at the cutoff.
    Real cmax = 0, cedge = 0;
    for (int i = 0; i < n; ++i) {
      cmax = std::max(cmax, std::norm(s.u[i]));
      const int jp = i + (ny - 1), jm = i - (ny - 1);
      if (jp < n && jm >= 0)
        cedge = std::max(cedge, std::abs(s.u[jp] * std::conj(s.u[jm])));
    }
    if (cedge > 1e-8 * cmax)
      throw std::runtime_error("wigner: autocorrelation not decayed at y_max");
  }
  const int nfft = next_pow2(2 * ny);

  PhaseSpaceField f;
  f.hbar = s.hbar;
  f.kind = PhaseSpaceField::Kind::wigner;
  const int nx = (n - 1) / x_stride + 1;
  f.x.resize(nx);
  for (int i = 0; i < nx; ++i) f.x[i] = s.x(i * x_stride);
  const Real dk = 1.0 / (nfft * dy);
  f.k.resize(nfft);
  for (int m = 0; m < nfft; ++m) f.k[m] = (m - nfft / 2) * dk;
  f.values.resize(nx, nfft);

  YTransform yt;
  Real im_max = 0, re_max = 0;
  VecC a(nfft);
  for (int ix = 0; ix < nx; ++ix) {
    const int i = ix * x_stride;
    a.setZero();
    for (int j = 0; j < ny; ++j) {
      if (i + j >= n || i - j < 0) break;
      const Complex c = s.u[i + j] * std::conj(s.u[i - j]);
      a[j] = c;
      if (j > 0) a[nfft - j] = std::conj(c);
    }
    f.values.row(ix) = yt.run(a, dy, im_max, re_max);
  }
  if (im_max > 1e-10 * std::max(re_max, Real(1e-300)))
    throw std::logic_error("wigner: imaginary residue above tolerance");
  return f;
}

PhaseSpaceField swt(const SampledState& s, Real sigma_x, Real sigma_k,
                    int x_stride) {
  if (sigma_x < 0 || sigma_x > 1 || sigma_k < 0 || sigma_k > 1)
    throw std::invalid_argument("swt: smoothing widths must be in [0,1]");
  const int n = static_cast<int>(s.u.size());
  const Real hbar = s.hbar;
  const Real dy = 2 * s.dx / hbar;

  int ny = n;
  if (sigma_k > 0) {
    // Damping e^{-(pi/2) hbar sigma_k^2 y^2} below 1e-12 past y_max.
    const Real y_max = std::sqrt(2 * std::log(1e12) / (kPi * hbar * sigma_k * sigma_k));
    ny = std::min(n, static_cast<int>(std::ceil(y_max / dy)) + 1);
  }
  // Zero-pad so the k axis resolves the smoothed structure.
  int nfft = next_pow2(2 * ny);
  if (sigma_k > 0) {
    const Real dk_target = 0.25 * std::max(sigma_k, Real(0.25)) * std::sqrt(hbar / (4 * kPi));
    nfft = std::max(nfft, next_pow2(static_cast<int>(1.0 / (dk_target * dy))));
  }

  // x' Gaussian kernel, truncated at 8 standard deviations.
  int w = 0;
  VecR kernel;
  Real prefactor = dy; // y Riemann sum
  if (sigma_x > 0) {
    const Real sg = sigma_x * std::sqrt(hbar / (4 * kPi));
    w = static_cast<int>(std::ceil(8 * sg / s.dx));
    kernel.resize(2 * w + 1);
    const Real c = 2 * kPi / (hbar * sigma_x * sigma_x);
    for (int t = -w; t <= w; ++t)
      kernel[t + w] = std::exp(-c * (t * s.dx) * (t * s.dx));
    prefactor *= std::sqrt(2.0) / (std::sqrt(hbar) * sigma_x) * s.dx;
  }

  PhaseSpaceField f;
  f.hbar = hbar;
  f.sigma_x = sigma_x;
  f.sigma_k = sigma_k;
  f.kind = PhaseSpaceField::Kind::swt;
  const int nx = (n - 1) / x_stride + 1;
  f.x.resize(nx);
  for (int i = 0; i < nx; ++i) f.x[i] = s.x(i * x_stride);
  const Real dk = 1.0 / (nfft * dy);
  f.k.resize(nfft);
  for (int m = 0; m < nfft; ++m) f.k[m] = (m - nfft / 2) * dk;
  f.values.resize(nx, nfft);

  // Damping factors per y index.
  VecR damp(ny);
  for (int j = 0; j < ny; ++j) {
    const Real y = j * dy;
    damp[j] = std::exp(-0.5 * kPi * hbar * sigma_k * sigma_k * y * y);
  }

  YTransform yt;
  Real im_max = 0, re_max = 0;
  VecC a(nfft);
  for (int ix = 0; ix < nx; ++ix) {
    const int i = ix * x_stride;
    a.setZero();
    for (int j = 0; j < ny; ++j) {
      Complex c(0, 0);
      if (sigma_x > 0) {
        for (int t = -w; t <= w; ++t) {
          const int ip = i + t + j, im = i + t - j;
          if (ip < 0 || ip >= n || im < 0 || im >= n) continue;
          c += kernel[t + w] * s.u[ip] * std::conj(s.u[im]);
        }
      } else {
        if (i + j < n && i - j >= 0) c = s.u[i + j] * std::conj(s.u[i - j]);
      }
      c *= damp[j] * prefactor / dy; // dy reapplied inside the transform
      a[j] = c;
      if (j > 0) a[nfft - j] = std::conj(c);
    }
    f.values.row(ix) = yt.run(a, dy, im_max, re_max);
  }
  if (im_max > 1e-10 * std::max(re_max, Real(1e-300)))
    throw std::logic_error("swt: imaginary residue above tolerance");
  return f;
}

PhaseSpaceField husimi(const SampledState& s, int x_stride) {
  PhaseSpaceField f = swt(s, 1.0, 1.0, x_stride);
  f.kind = PhaseSpaceField::Kind::husimi;
  const Real vmax = f.values.maxCoeff();
  if (f.values.minCoeff() < -1e-12 * std::max(vmax, Real(1)))
    throw std::logic_error("husimi: negative values beyond tolerance");
  return f;
}

std::pair<VecR, VecR> marginals(const PhaseSpaceField& f) {
  const int nx = static_cast<int>(f.x.size()), nk = static_cast<int>(f.k.size());
  VecR wx = VecR::Constant(nx, f.dx());
  wx[0] *= 0.5;
  wx[nx - 1] *= 0.5;
  VecR wk = VecR::Constant(nk, f.dk());
  wk[0] *= 0.5;
  wk[nk - 1] *= 0.5;
  VecR pos = f.values * wk;
  VecR mom = f.values.transpose() * wx;
  return {pos, mom};
}

PairResult pair_field(const PhaseSpaceField& f, const MatR& phi_on_grid) {
  if (phi_on_grid.rows() != f.values.rows() || phi_on_grid.cols() != f.values.cols())
    throw std::invalid_argument("pair_field: grid mismatch");
  PairResult r;
  r.value = (f.values.array() * phi_on_grid.array()).sum() * f.dx() * f.dk();
  Real s = 0;
  for (int i = 0; i < f.values.rows(); i += 2)
    for (int j = 0; j < f.values.cols(); j += 2)
      s += f.values(i, j) * phi_on_grid(i, j);
  r.coarse = s * 4 * f.dx() * f.dk();
  return r;
}

PairResult pair_field(const PhaseSpaceField& f, const TestFunction& phi) {
  return pair_field(f, evaluate(phi, f.x, f.k));
}

Real smoothing_gap_bound(Real hbar, Real sigma_k, Real M, Real bm_norm_phi) {
  return hbar * 0.5 * kPi * sigma_k * sigma_k * M * M * bm_norm_phi;
}

GapCheck verify_gap(const SampledState& s, const TestFunction& phi, Real M,
                    Real sigma_k, int m_max) {
  GapCheck g;
  g.rhs = smoothing_gap_bound(s.hbar, sigma_k, M, bm_norm(phi, M, m_max).total());

  // <W - W^{0,sigma_k}, phi> in the y representation: the k integral of
  // e^{-2 pi i k y} phi(x,k) collapses onto phihat(X, K=y), leaving
  //   int c(x,y) (1 - damp(y)) psi(x,y) dx dy,
  // with psi(x,y) = int e^{2 pi i x X} phihat(X, y) dX supported in |y| <= L.
  const int n = static_cast<int>(s.u.size());
  const Real dy = 2 * s.dx / s.hbar;
  const int ny = std::min(n, static_cast<int>(std::floor(phi.L / dy)) + 1);

  // Linear interpolation of phihat in K at K = y_j, then inverse transform
  // over X at every sample point x_i.
  const int nX = static_cast<int>(phi.X.size());
  Complex acc(0, 0);
  for (int j = -(ny - 1); j <= ny - 1; ++j) {
    const Real y = j * dy;
    if (std::abs(y) > phi.L) continue;
    // phihat(:, K=y) by linear interpolation.
    const Real pos = (y - phi.K[0]) / phi.dK();
    const int j0 = std::max(0, std::min(static_cast<int>(phi.K.size()) - 2,
                                        static_cast<int>(std::floor(pos))));
    const Real tfrac = std::min(Real(1), std::max(Real(0), pos - j0));
    VecC col = (1 - tfrac) * phi.phat.col(j0) + tfrac * phi.phat.col(j0 + 1);
    const Real one_minus_damp =
        1.0 - std::exp(-0.5 * kPi * s.hbar * sigma_k * sigma_k * y * y);
    if (one_minus_damp == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const int ip = i + j, im = i - j;
      if (ip < 0 || ip >= n || im < 0 || im >= n) continue;
      const Complex c = s.u[ip] * std::conj(s.u[im]);
      // phihat_k(x_i, y) via the X sum.
      Complex ph(0, 0);
      for (int aX = 0; aX < nX; ++aX)
        ph += col[aX] * std::exp(kI * (2 * kPi * s.x(i) * phi.X[aX]));
      ph *= phi.dX();
      acc += c * one_minus_damp * ph;
    }
  }
  g.lhs = std::abs(acc * s.dx * dy);
  g.ok = g.lhs <= g.rhs * (1 + 1e-6);
  return g;
}

void save_field(const PhaseSpaceField& f, const std::string& base) {
  std::ofstream meta(base + ".meta");
  if (!meta) throw std::runtime_error("save_field: cannot open " + base + ".meta");
  meta.precision(17);
  meta << "nx " << f.x.size() << "\n"
       << "nk " << f.k.size() << "\n"
       << "x0 " << (f.x.size() ? f.x[0] : 0.0) << "\n"
       << "dx " << f.dx() << "\n"
       << "k0 " << (f.k.size() ? f.k[0] : 0.0) << "\n"
       << "dk " << f.dk() << "\n"
       << "hbar " << f.hbar << "\n"
       << "sigma_x " << f.sigma_x << "\n"
       << "sigma_k " << f.sigma_k << "\n"
       << "kind " << kind_name(f.kind) << "\n"
       << "scaling raw\n";
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("save_field: cannot open " + base + ".bin");
  for (int i = 0; i < f.values.rows(); ++i) {
    // Row-major (x-major) little-endian doubles.
    const VecR row = f.values.row(i);
    bin.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double)) * row.size());
  }
}

PhaseSpaceField load_field(const std::string& base) {
  std::ifstream meta(base + ".meta");
  if (!meta) throw std::runtime_error("load_field: cannot open " + base + ".meta");
  std::map<std::string, std::string> kv;
  std::string key, val;
  while (meta >> key >> val) kv[key] = val;
  PhaseSpaceField f;
  const int nx = std::stoi(kv.at("nx")), nk = std::stoi(kv.at("nk"));
  const Real x0 = std::stod(kv.at("x0")), dx = std::stod(kv.at("dx"));
  const Real k0 = std::stod(kv.at("k0")), dk = std::stod(kv.at("dk"));
  f.hbar = std::stod(kv.at("hbar"));
  f.sigma_x = std::stod(kv.at("sigma_x"));
  f.sigma_k = std::stod(kv.at("sigma_k"));
  f.kind = kind_from_name(kv.at("kind"));
  f.x.resize(nx);
  for (int i = 0; i < nx; ++i) f.x[i] = x0 + i * dx;
  f.k.resize(nk);
  for (int j = 0; j < nk; ++j) f.k[j] = k0 + j * dk;
  f.values.resize(nx, nk);
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("load_field: cannot open " + base + ".bin");
  for (int i = 0; i < nx; ++i) {
    VecR row(nk);
    bin.read(reinterpret_cast<char*>(row.data()),
             static_cast<std::streamsize>(sizeof(double)) * nk);
    if (!bin) throw std::runtime_error("load_field: short payload");
    f.values.row(i) = row;
  }
  return f;
}

} // namespace semiclassic
