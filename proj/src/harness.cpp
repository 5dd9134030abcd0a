#include <semiclassic/harness.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace semiclassic {

namespace {

const std::vector<Real> kObservationTimes{1.1788, 1.5717, 1.9647, 2.3577};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Real get_real(const std::map<std::string, std::string>& p, const std::string& key,
              Real fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  std::size_t pos = 0;
  const Real v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config value for '" + key + "' is not a number");
  return v;
}

int get_int(const std::map<std::string, std::string>& p, const std::string& key,
            int fallback) {
  const Real v = get_real(p, key, fallback);
  return static_cast<int>(std::lround(v));
}

void check_keys(const std::map<std::string, std::string>& params,
                const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : params)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw std::invalid_argument("unknown parameter '" + k + "'");
}

int even_cells(Real width, Real dx) {
  int m = static_cast<int>(std::ceil(width / dx));
  if (m % 2) ++m;
  return std::max(m, 16);
}

/// Uniform samples of a closed-form state at the transform grid spacing.
SampledState sample_closed_form(const std::function<Complex(Real)>& u, Real a,
                                Real b, Real hbar, Real k_cap = 0.5) {
  SampledState s;
  s.hbar = hbar;
  s.dx = hbar / (8 * k_cap);
  s.x0 = a;
  const int n = static_cast<int>(std::ceil((b - a) / s.dx)) + 1;
  s.u.resize(n);
  for (int i = 0; i < n; ++i) s.u[i] = u(s.x(i));
  return s;
}

/// Particle approximation of the initial phase-space density. Smoothing is
/// kept well below the Husimi scale: sigma = 1 inflates the sampled momentum
/// variance by hbar/4pi, which visibly biases second moments and the
/// separatrix split, while sigma = 0.25 suppresses collision cross terms just
/// as completely. WKB-type data leave faint oscillatory residues at this
/// smoothing level; they are clipped before the nonnegative sampling step.
Ensemble sampled_density(const SampledState& s0, int n_target) {
  PhaseSpaceField f = swt(s0, 0.25, 0.25);
  f.values = f.values.cwiseMax(0.0);
  // Crop to the populated bounding box: the block merge inside
  // sample_particles sizes its blocks from the whole grid, and a packet
  // occupying a sliver of the domain would otherwise be sampled at block
  // resolution comparable to its own width.
  const Real cut = 1e-10 * f.values.maxCoeff();
  const int nx = static_cast<int>(f.x.size());
  const int nk = static_cast<int>(f.k.size());
  int i0 = nx, i1 = -1, j0 = nk, j1 = -1;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nk; ++j)
      if (f.values(i, j) > cut) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
      }
  if (i1 >= i0 && (i1 - i0 + 1 < nx || j1 - j0 + 1 < nk)) {
    f.values = f.values.block(i0, j0, i1 - i0 + 1, j1 - j0 + 1).eval();
    f.x = f.x.segment(i0, i1 - i0 + 1).eval();
    f.k = f.k.segment(j0, j1 - j0 + 1).eval();
  }
  return sample_particles(f, n_target, 1e-6).ensemble;
}

Real fit_slope(const std::vector<Real>& xs, const std::vector<Real>& ys) {
  const int n = static_cast<int>(xs.size());
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

std::map<std::string, std::string> parse_config_text(
    const std::string& text, const std::vector<std::string>& allowed_keys) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::string value;
    std::getline(ls, value);
    value = trim(value);
    if (!value.empty() && value[0] == '=') value = trim(value.substr(1));
    if (std::find(allowed_keys.begin(), allowed_keys.end(), key) ==
        allowed_keys.end())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    if (value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key '" + key + "' has no value");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(
    const std::string& path, const std::vector<std::string>& allowed_keys) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), allowed_keys);
}

std::string file_checksum(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[65536];
  while (f) {
    f.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_manifest: cannot open " + path);
  f.precision(17);
  f << "scenario " << m.scenario << "\n";
  f << "version " << m.version << "\n";
  f << "success " << (m.success ? 1 : 0) << "\n";
  f << "wall_seconds " << m.wall_seconds << "\n";
  if (!m.message.empty()) f << "message " << m.message << "\n";
  for (const auto& [k, v] : m.params) f << "param " << k << " " << v << "\n";
  for (const auto& [p, c] : m.files) f << "file " << p << " " << c << "\n";
}

void write_plot_script(const std::string& csv_path, const std::string& gp_path,
                       const std::string& title, int x_col, int y_col) {
  std::ofstream f(gp_path);
  if (!f) throw std::runtime_error("write_plot_script: cannot open " + gp_path);
  f << "set datafile separator ','\n"
    << "set terminal pngcairo size 900,600\n"
    << "set output '" << csv_path << ".png'\n"
    << "set title '" << title << "'\n"
    << "set key autotitle columnhead\n"
    << "set grid\n"
    << "plot '" << csv_path << "' using " << x_col << ":" << y_col
    << " with linespoints\n";
}

// ---------------------------------------------------------------------------
// EOC tables

EocTable eoc_doublewell_table() {
  const Real hbar = 0.25, T = 1.0;
  const Potential V = Potential::double_well();
  InitialDataSpec spec;
  spec.family = InitialFamily::double_well_init;
  const auto u0 = initial_state(spec, hbar);

  EocTable t;
  t.space_sizes = {35, 50, 70, 100, 145, 200};
  for (Real M : t.space_sizes) {
    auto sp = std::make_shared<SplineSpace>(
        Grid1D::uniform(-2, 2, static_cast<int>(M)), 3);
    t.es.push_back(run_uniform_estimate(sp, V, u0, T, 200, hbar, true, false).ES);
  }
  t.eoc_s = eoc(t.es, t.space_sizes);

  auto sp = std::make_shared<SplineSpace>(Grid1D::uniform(-2, 2, 200), 3);
  t.time_sizes = {80, 160, 320, 640, 1280, 2560};
  for (Real N : t.time_sizes)
    t.et.push_back(run_uniform_estimate(sp, V, u0, T, static_cast<int>(N), hbar,
                                        false, true).ET);
  t.eoc_t = eoc(t.et, t.time_sizes);
  return t;
}

EocTable eoc_nonsmooth_table() {
  const Real hbar = 0.5, T = 0.1;
  const Potential V = Potential::abs_linear(10.0);
  InitialDataSpec spec;
  spec.family = InitialFamily::nonsmooth_init;
  spec.x0 = -1.5;
  const auto u0 = initial_state(spec, hbar);

  // Even cell counts keep the kink of V at a knot. The datum oscillates at
  // wavelength ~0.1, so the ladder starts inside the resolved regime.
  EocTable t;
  t.space_sizes = {800, 1000, 1200, 1600, 2000, 3200};
  for (Real M : t.space_sizes) {
    auto sp = std::make_shared<SplineSpace>(
        Grid1D::uniform(-4, 4, static_cast<int>(M)), 4);
    t.es.push_back(run_uniform_estimate(sp, V, u0, T, 100, hbar, true, false).ES);
  }
  t.eoc_s = eoc(t.es, t.space_sizes);

  auto sp = std::make_shared<SplineSpace>(Grid1D::uniform(-4, 4, 800), 4);
  t.time_sizes = {2000, 4000, 8000, 16000, 32000};
  for (Real N : t.time_sizes)
    t.et.push_back(run_uniform_estimate(sp, V, u0, T, static_cast<int>(N), hbar,
                                        false, true).ET);
  t.eoc_t = eoc(t.et, t.time_sizes);
  return t;
}

void write_eoc_csv(const EocTable& t, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_eoc_csv: cannot open " + path);
  f.precision(17);
  f << "kind,size,estimator,eoc\n";
  for (std::size_t i = 0; i < t.space_sizes.size(); ++i) {
    f << "space," << t.space_sizes[i] << "," << t.es[i] << ",";
    if (i > 0) f << t.eoc_s[i - 1];
    f << "\n";
  }
  for (std::size_t i = 0; i < t.time_sizes.size(); ++i) {
    f << "time," << t.time_sizes[i] << "," << t.et[i] << ",";
    if (i > 0) f << t.eoc_t[i - 1];
    f << "\n";
  }
}

// ---------------------------------------------------------------------------
// Splitting pipeline

SplitResult run_split(const SplitOptions& opt) {
  SplitResult out;
  const Real a = -6, b = 6, hbar = opt.hbar;

  InitialDataSpec spec;
  spec.family = opt.collision ? InitialFamily::collision_pair : opt.family;
  spec.x0 = -1.5;
  spec.m = opt.m;
  spec.theta = opt.theta;

  // Initial mesh resolving both the phase oscillation (8 points per
  // wavelength) and the sqrt(hbar) envelope; adaptivity takes it from there.
  // Quintic splines keep the resolved-regime dof manageable at small hbar.
  const Real grad = max_phase_gradient(spec, a, b);
  Real dx = std::min(std::sqrt(hbar) / 8, 0.02);
  if (grad > 0) dx = std::min(dx, 2 * kPi * hbar / (10 * grad));
  auto space0 = std::make_shared<SplineSpace>(
      Grid1D::uniform(a, b, even_cells(b - a, dx)), 5);

  AdaptiveOptions aopt;
  if (!opt.snapshot_times.empty()) {
    aopt.snapshot_times = opt.snapshot_times;
  } else if (!opt.collision) {
    for (Real t : kObservationTimes)
      if (t < opt.T - 1e-12) aopt.snapshot_times.push_back(t);
  }
  aopt.energy_shift = opt.potential.value(0.0);
  // Start near the step size the gauged oscillation will force anyway; the
  // default T/200 makes the first step cascade through redos.
  aopt.dt_init = std::min(opt.T / 200, hbar / 20);

  const auto u0 = initial_state(spec, hbar);
  const SolveTrace tr =
      solve_adaptive(space0, opt.potential, u0, opt.T, opt.tol, hbar, aopt);
  out.snapshots = tr.snapshots;
  if (!tr.success) {
    out.failure_reason = tr.failure_reason;
    return out;
  }

  // Quantum norm (conserved); used in the transported error bounds.
  Real norm0 = 1;
  {
    const auto& s0 = tr.snapshots.front();
    const VecC full = dirichlet_expand(*s0.space, s0.coeffs);
    norm0 = std::sqrt(
        measure_position(*s0.space, full, [](Real) { return 1.0; }));
  }
  out.norm_U = norm0;

  // Classical side: lightly smoothed Wigner transform of the phase-stripped
  // datum (the smoothed cross term is negligible), deterministic particle
  // sampling, separatrix partition, conical transport.
  InitialDataSpec cspec = spec;
  cspec.theta = 0;
  const SampledState s0 =
      sample_closed_form(initial_state(cspec, hbar), a, b, hbar);
  Ensemble ens = sampled_density(s0, opt.n_particles);
  if (opt.collision) {
    // The phase-stripped pair is symmetric under (x,k) -> (-x,-k); enforce
    // that exactly so the classical reference carries no sampling imbalance.
    std::vector<Particle> sym;
    sym.reserve(2 * ens.particles.size());
    for (const Particle& p : ens.particles) {
      Particle q = p;
      q.weight *= 0.5;
      sym.push_back(q);
      q.x = -q.x;
      q.k = -q.k;
      sym.push_back(q);
    }
    ens.particles = std::move(sym);
  }
  out.weights = partition(ens, opt.potential, 0.0);

  FlowSpec flow;
  flow.potential = opt.potential;
  flow.mode = FlowSpec::Mode::closed_form_conical;
  flow.slope = std::abs(opt.potential.derivative(0.0));
  flow.center = 0.0;
  flow.hbar = hbar;

  const auto fam = moment_family();
  std::vector<std::pair<PositionFn, PositionFn>> obs;
  for (const auto& m : fam)
    obs.push_back({[m](Real x) { return m.a1(x); },
                   [m](Real k) { return m.a2(k); }});

  std::vector<Real> qv, cv;
  for (const auto& snap : tr.snapshots) {
    const VecC full = dirichlet_expand(*snap.space, snap.coeffs);
    const SampledState su = resample(*snap.space, full, hbar);
    const auto qs = measure_separable_batch(su, obs, SeparableRoute::direct);
    const Ensemble et = propagate(ens, snap.t, flow);
    for (std::size_t o = 0; o < fam.size(); ++o) {
      MeasurementRow row;
      row.t = snap.t;
      row.symbol = fam[o].name();
      row.alpha = fam[o].alpha;
      row.beta = fam[o].beta;
      row.j = fam[o].j;
      row.quantum = qs[o].value;
      row.classical = measure_ensemble(
          et, [&](Real x, Real k) { return fam[o](x, k); });
      const bool pos = fam[o].beta == 0;
      row.bound = observable_error_bound(
          opt.tol, pos ? ObservableKind::position : ObservableKind::separable,
          hbar, norm0, norm0, pos ? fam[o].sup_norm() : fam[o].l2_norm());
      row.flag = std::abs(row.quantum - row.classical) > row.bound;
      out.rows.push_back(row);
      if (snap.t > 1e-12) {
        qv.push_back(row.quantum);
        cv.push_back(row.classical);
      }
    }
  }
  if (qv.size() >= 2) out.correlation = correlation(qv, cv);

  {
    const auto& sf = tr.snapshots.back();
    const VecC full = dirichlet_expand(*sf.space, sf.coeffs);
    out.right_mass_final = measure_position(
        *sf.space, full, [](Real x) { return x > 0 ? 1.0 : 0.0; }, {0.0});
    out.emp_quantum = emp(*sf.space, full);
  }
  out.emp_classical = emp(propagate(ens, opt.T, flow));
  out.emp_bound = observable_error_bound(opt.tol, ObservableKind::position,
                                         hbar, norm0, norm0, 1.0);
  out.events = detect_interference(ens, flow, opt.T);
  out.success = true;
  return out;
}

Real default_tol(Real hbar) { return hbar >= 1e-2 ? 1e-2 : 2e-2; }

std::vector<EmpRow> emp_sweep(const std::vector<Real>& thetas,
                              const std::vector<Real>& hbars, Real tol) {
  std::vector<EmpRow> rows;
  for (Real hbar : hbars) {
    for (Real theta : thetas) {
      SplitOptions opt;
      opt.hbar = hbar;
      opt.m = 1.0;
      opt.theta = theta;
      opt.collision = true;
      opt.tol = tol > 0 ? tol : default_tol(hbar);
      opt.T = 3.0;
      const SplitResult r = run_split(opt);
      if (!r.success)
        throw std::runtime_error("emp_sweep: solve failed at theta=" +
                                 std::to_string(theta) + ": " + r.failure_reason);
      rows.push_back({theta, hbar, r.emp_quantum, r.emp_classical, r.emp_bound});
    }
  }
  return rows;
}

void write_emp_csv(const std::vector<EmpRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_emp_csv: cannot open " + path);
  f.precision(17);
  f << "theta,hbar,emp_quantum,emp_classical,bound\n";
  for (const auto& r : rows)
    f << r.theta << "," << r.hbar << "," << r.emp_quantum << ","
      << r.emp_classical << "," << r.bound << "\n";
}

// ---------------------------------------------------------------------------
// Convergence-rate experiment

Real pair_ensemble(const Ensemble& e, const TestFunction& phi) {
  const int nX = static_cast<int>(phi.X.size());
  const int nK = static_cast<int>(phi.K.size());
  const Real w = phi.dX() * phi.dK();
  Real sum = 0;
  VecC ek(nK);
  for (const auto& p : e.particles) {
    for (int b = 0; b < nK; ++b)
      ek[b] = std::exp(kI * (2 * kPi * p.k * phi.K[b]));
    const VecC row = phi.phat * ek;
    Complex v = 0;
    for (int a = 0; a < nX; ++a)
      v += std::exp(kI * (2 * kPi * p.x * phi.X[a])) * row[a];
    sum += p.weight * (v * w).real();
  }
  return sum;
}

std::vector<TestFunction> default_rate_test_functions() {
  const Real sx = 0.6, sk = 0.25, L = 2.5, LX = 3.0;
  const int n = 64;
  std::vector<std::pair<Real, Real>> centers{
      {0, 0},    {1, 0},      {-1, 0},      {0, 0.25},
      {0, -0.25}, {1.5, 0.3}, {-1.5, -0.3}, {0.5, -0.2}};
  std::vector<TestFunction> out;
  for (const auto& [xc, kc] : centers)
    out.push_back(gaussian_test_function(xc, kc, sx, sk, L, LX, n, n));
  return out;
}

RateResult rate_experiment(Real a_hoelder, const std::vector<Real>& hbars,
                           const std::vector<TestFunction>& phis,
                           const Potential* potential_override) {
  if (a_hoelder <= 0 || a_hoelder >= 1)
    throw std::invalid_argument("rate_experiment: a must be in (0,1)");
  const Potential V = potential_override ? *potential_override
                                         : Potential::saddle_hoelder(a_hoelder);
  const Real T = 1.0, xa = -4, xb = 4, vmax = 3.5;

  RateResult out;
  out.hbars = hbars;
  for (Real hbar : hbars) {
    InitialDataSpec spec;
    spec.family = InitialFamily::gaussian_wkb;
    spec.x0 = 0.0;
    spec.m = 0.0;
    const auto u0 = initial_state(spec, hbar);

    const Real dx = std::min(std::sqrt(hbar) / 8, 2 * kPi * hbar / (8 * vmax));
    auto space0 = std::make_shared<SplineSpace>(
        Grid1D::uniform(xa, xb, even_cells(xb - xa, dx)), 5);
    const SolveTrace tr = solve_adaptive(space0, V, u0, T, 1e-2, hbar);
    if (!tr.success)
      throw std::runtime_error("rate_experiment: solve failed at hbar=" +
                               std::to_string(hbar) + ": " + tr.failure_reason);
    const auto& sf = tr.snapshots.back();
    const VecC full = dirichlet_expand(*sf.space, sf.coeffs);
    const PhaseSpaceField Wq = husimi(resample(*sf.space, full, hbar, 0.75));

    FlowSpec flow;
    flow.potential = V;
    flow.mode = FlowSpec::Mode::numeric_rk4;
    flow.center = 0.0;
    flow.hbar = hbar;
    const SampledState s0 = sample_closed_form(u0, xa, xb, hbar, 0.75);
    const Ensemble ens = propagate(sampled_density(s0, 20000), T, flow);

    Real D = 0;
    for (const auto& phi : phis)
      D = std::max(D, std::abs(pair_field(Wq, phi).value -
                               pair_ensemble(ens, phi)));
    out.D.push_back(D);
  }

  out.monotone = true;
  for (std::size_t i = 0; i + 1 < out.D.size(); ++i)
    if (out.D[i + 1] >= out.D[i]) out.monotone = false;
  if (out.monotone && out.D.size() >= 2) {
    std::vector<Real> lx, ly;
    for (std::size_t i = 0; i < out.D.size(); ++i) {
      lx.push_back(std::log(hbars[i]));
      ly.push_back(std::log(out.D[i]));
    }
    out.slope = fit_slope(lx, ly);
    out.fitted = true;
  }
  return out;
}

void write_rate_csv(const RateResult& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_rate_csv: cannot open " + path);
  f.precision(17);
  f << "hbar,D\n";
  for (std::size_t i = 0; i < r.hbars.size(); ++i)
    f << r.hbars[i] << "," << r.D[i] << "\n";
}

// ---------------------------------------------------------------------------
// Scenario dispatch

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void emit_split_artifacts(const SplitResult& r, const SplitOptions& opt,
                          const std::string& dir,
                          std::vector<std::string>& files) {
  const std::string meas = join_path(dir, "measurements.csv");
  write_measurements_csv(r.rows, meas);
  files.push_back(meas);
  const std::string gp = join_path(dir, "measurements.gp");
  write_plot_script(meas, gp, "quantum vs classical moments", 1, 6);
  files.push_back(gp);

  const std::string ev = join_path(dir, "events.csv");
  write_events_csv(r.events, ev);
  files.push_back(ev);

  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    const auto& snap = r.snapshots[i];
    const VecC full = dirichlet_expand(*snap.space, snap.coeffs);
    const PhaseSpaceField f = husimi(resample(*snap.space, full, opt.hbar));
    const std::string base = join_path(dir, "husimi_t" + std::to_string(i));
    save_field(f, base);
    files.push_back(base + ".meta");
    files.push_back(base + ".bin");
  }
}

void dispatch_scenario(const Scenario& s, RunManifest& man,
                       std::vector<std::string>& files) {
  const std::string& dir = s.out_dir;
  auto set_param = [&](const std::string& k, Real v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    man.params.push_back({k, os.str()});
  };

  if (s.name == "eoc_doublewell" || s.name == "eoc_nonsmooth") {
    check_keys(s.params, {});
    const EocTable t = s.name == "eoc_doublewell" ? eoc_doublewell_table()
                                                  : eoc_nonsmooth_table();
    const std::string csv = join_path(dir, "eoc.csv");
    write_eoc_csv(t, csv);
    files.push_back(csv);
    const std::string gp = join_path(dir, "eoc.gp");
    write_plot_script(csv, gp, "estimator vs resolution", 2, 3);
    files.push_back(gp);
    std::ostringstream msg;
    msg << "eoc_s_final=" << t.eoc_s.back() << " eoc_t_final=" << t.eoc_t.back();
    man.message = msg.str();
    man.success = true;
    return;
  }

  if (s.name == "adaptive_tdp") {
    check_keys(s.params, {"hbar", "tol", "T"});
    const Real hbar = get_real(s.params, "hbar", 1.0);
    const Real tol = get_real(s.params, "tol", 1e-2);
    const Real T = get_real(s.params, "T", 1.0);
    set_param("hbar", hbar);
    set_param("tol", tol);
    set_param("T", T);

    InitialDataSpec spec;
    spec.family = InitialFamily::tdp_init;
    auto space0 =
        std::make_shared<SplineSpace>(Grid1D::uniform(-1, 2, 64), 3);
    AdaptiveOptions aopt;
    aopt.snapshot_times = {T / 2};
    const SolveTrace tr = solve_adaptive(space0, Potential::tdp(),
                                         initial_state(spec, hbar), T, tol,
                                         hbar, aopt);
    const std::string steps = join_path(dir, "steps.csv");
    {
      std::ofstream f(steps);
      f.precision(17);
      f << "step,t,dt,dof,es,et,mass,boundary_mass\n";
      int i = 0;
      for (const auto& r : tr.report.per_step)
        f << i++ << "," << r.t << "," << r.dt << "," << r.dof << "," << r.es
          << "," << r.et << "," << r.mass << "," << r.boundary_mass << "\n";
    }
    files.push_back(steps);
    const std::string gp = join_path(dir, "steps.gp");
    write_plot_script(steps, gp, "adaptive step sizes", 2, 3);
    files.push_back(gp);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      const auto& snap = tr.snapshots[i];
      const VecC full = dirichlet_expand(*snap.space, snap.coeffs);
      const PhaseSpaceField f = husimi(resample(*snap.space, full, hbar, 4.0));
      const std::string base = join_path(dir, "husimi_t" + std::to_string(i));
      save_field(f, base);
      files.push_back(base + ".meta");
      files.push_back(base + ".bin");
    }
    std::ostringstream msg;
    msg << "steps=" << tr.report.per_step.size()
        << " estimator_total=" << tr.report.total();
    man.message = msg.str();
    man.success = tr.success;
    if (!tr.success) man.message += " failure=" + tr.failure_reason;
    return;
  }

  if (s.name == "split_noninterference" || s.name == "collide_interference" ||
      s.name == "wkb_slice") {
    SplitOptions opt;
    if (s.name == "split_noninterference") {
      check_keys(s.params, {"hbar", "m", "tol", "T", "n_particles"});
      opt.m = get_real(s.params, "m", 0.9186);
    } else if (s.name == "collide_interference") {
      check_keys(s.params, {"hbar", "theta", "tol", "T", "n_particles"});
      opt.collision = true;
      opt.theta = get_real(s.params, "theta", 0.25);
      opt.m = 1.0;
      opt.T = 3.0;
    } else {
      check_keys(s.params, {"hbar", "tol", "T", "n_particles"});
      opt.family = InitialFamily::wkb_slice;
      opt.potential = Potential::corner_splitting_wide();
      opt.T = 4.0;
      opt.snapshot_times = {1.0, 2.0, 3.0};
    }
    opt.hbar = get_real(s.params, "hbar", 1e-2);
    opt.tol = get_real(s.params, "tol", default_tol(opt.hbar));
    opt.T = get_real(s.params, "T", opt.T);
    opt.n_particles = get_int(s.params, "n_particles", opt.n_particles);
    set_param("hbar", opt.hbar);
    set_param("tol", opt.tol);
    set_param("T", opt.T);
    if (s.name == "split_noninterference") set_param("m", opt.m);
    if (s.name == "collide_interference") set_param("theta", opt.theta);

    const SplitResult r = run_split(opt);
    emit_split_artifacts(r, opt, dir, files);
    if (s.name == "collide_interference") {
      const std::string empf = join_path(dir, "emp.csv");
      write_emp_csv({{opt.theta, opt.hbar, r.emp_quantum, r.emp_classical,
                      r.emp_bound}},
                    empf);
      files.push_back(empf);
    }
    std::ostringstream msg;
    msg << "correlation=" << r.correlation << " w_plus=" << r.weights.plus
        << " w_minus=" << r.weights.minus << " emp=" << r.emp_quantum
        << " events=" << r.events.size();
    man.message = msg.str();
    man.success = r.success;
    if (!r.success) man.message += " failure=" + r.failure_reason;
    return;
  }

  if (s.name == "rate_c1a") {
    check_keys(s.params, {"a"});
    const Real a = get_real(s.params, "a", 0.5);
    set_param("a", a);
    const RateResult r =
        rate_experiment(a, {0.1, 0.05, 0.025}, default_rate_test_functions());
    const std::string csv = join_path(dir, "rate.csv");
    write_rate_csv(r, csv);
    files.push_back(csv);
    const std::string gp = join_path(dir, "rate.gp");
    write_plot_script(csv, gp, "discrepancy vs hbar", 1, 2);
    files.push_back(gp);
    std::ostringstream msg;
    msg << "monotone=" << (r.monotone ? 1 : 0);
    if (r.fitted) msg << " slope=" << r.slope;
    man.message = msg.str();
    man.success = true;
    return;
  }

  throw std::invalid_argument("unknown scenario '" + s.name + "'");
}

} // namespace

RunManifest run_scenario(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.scenario = s.name;
  std::filesystem::create_directories(s.out_dir);
  std::vector<std::string> files;
  try {
    dispatch_scenario(s, man, files);
  } catch (const std::exception& e) {
    man.success = false;
    man.message = e.what();
  }
  for (const auto& f : files)
    if (std::filesystem::exists(f)) man.files.push_back({f, file_checksum(f)});
  man.wall_seconds =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(man, join_path(s.out_dir, "manifest.txt"));
  return man;
}

} // namespace semiclassic
