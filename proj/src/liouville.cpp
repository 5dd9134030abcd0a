#include <semiclassic/liouville.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace semiclassic {

namespace {

int sgn(Real v) { return (v > 0) - (v < 0); }

const char* label_name(EnergyLabel l) {
  switch (l) {
    case EnergyLabel::S_plus: return "S_plus";
    case EnergyLabel::S_minus: return "S_minus";
    case EnergyLabel::S_zero: return "S_zero";
  }
  return "?";
}

/// Smallest root of (c s / 2) t^2 + v t + d0 = 0 in (0, t_max], or -1.
Real first_crossing(Real c, int s, Real v, Real d0, Real t_max) {
  const Real a = 0.5 * c * s;
  const Real disc = v * v - 2 * c * s * d0;
  if (disc < 0) return -1;
  const Real sq = std::sqrt(disc);
  const Real r1 = (-v - sq) / (2 * a), r2 = (-v + sq) / (2 * a);
  Real best = -1;
  for (Real r : {std::min(r1, r2), std::max(r1, r2)})
    if (r > 0 && r <= t_max) { best = r; break; }
  return best;
}

std::pair<Real, Real> advance_conical(Real x, Real k, Real t, const FlowSpec& fl) {
  const Real c = fl.slope, xs = fl.center;
  if (c <= 0) throw std::invalid_argument("trajectory: conical slope must be positive");
  const Real Hs = fl.saddle_energy();
  Real t_rem = t;
  while (t_rem > 0) {
    Real v = 2 * kPi * k;
    Real d0 = x - xs;
    int s;
    if (d0 == 0 && v == 0) {
      // Fixed point with saddle energy: continuation policy.
      if (fl.policy == VertexPolicy::freeze) return {xs, 0.0};
      s = fl.policy == VertexPolicy::scatter_right ? 1 : -1;
    } else {
      s = d0 != 0 ? sgn(d0) : sgn(v);
    }
    // Separatrix arc moving inward: lands exactly on the vertex (the
    // discriminant is a roundoff-level number there, so the energy decides).
    const Real H = 0.5 * v * v + fl.potential.value(x);
    if (std::abs(H - Hs) <= 1e-12 && s * v < 0) {
      const Real tv = std::abs(v) / c;
      if (tv > t_rem) {
        x += v * t_rem + 0.5 * c * s * t_rem * t_rem;
        k += c * s * t_rem / (2 * kPi);
        return {x, k};
      }
      t_rem -= tv;
      x = xs;
      k = 0;
      continue;
    }
    const Real tc = first_crossing(c, s, v, d0, t_rem);
    if (tc < 0) {
      x += v * t_rem + 0.5 * c * s * t_rem * t_rem;
      k += c * s * t_rem / (2 * kPi);
      return {x, k};
    }
    t_rem -= tc;
    // Passes over the vertex with momentum intact in sign.
    x = xs;
    k += c * s * tc / (2 * kPi);
  }
  return {x, k};
}

struct RK4 {
  const Potential& V;

  std::pair<Real, Real> deriv(Real x, Real k) const {
    return {2 * kPi * k, -V.derivative(x) / (2 * kPi)};
  }

  std::pair<Real, Real> step(Real x, Real k, Real h) const {
    const auto [dx1, dk1] = deriv(x, k);
    const auto [dx2, dk2] = deriv(x + 0.5 * h * dx1, k + 0.5 * h * dk1);
    const auto [dx3, dk3] = deriv(x + 0.5 * h * dx2, k + 0.5 * h * dk2);
    const auto [dx4, dk4] = deriv(x + h * dx3, k + h * dk3);
    return {x + h / 6 * (dx1 + 2 * dx2 + 2 * dx3 + dx4),
            k + h / 6 * (dk1 + 2 * dk2 + 2 * dk3 + dk4)};
  }
};

std::pair<Real, Real> advance_rk4(Real x, Real k, Real t, const FlowSpec& fl) {
  const RK4 rk{fl.potential};
  const Real xs = fl.center, Hs = fl.saddle_energy();
  const Real h0 = std::min(Real(1e-3), std::sqrt(fl.hbar) / 10);
  Real t_rem = t;
  while (t_rem > 1e-15) {
    const Real h = std::min(h0, t_rem);
    auto [x1, k1] = rk.step(x, k, h);
    if ((x - xs) * (x1 - xs) < 0) {
      // Bisect the crossing time to 1e-12.
      Real lo = 0, hi = h;
      while (hi - lo > 1e-12) {
        const Real mid = 0.5 * (lo + hi);
        const auto [xm, km] = rk.step(x, k, mid);
        ((x - xs) * (xm - xs) < 0 ? hi : lo) = mid;
      }
      const Real tc = 0.5 * (lo + hi);
      auto [xc, kc] = rk.step(x, k, tc);
      t_rem -= tc;
      const Real H = hamiltonian(xc, kc, fl.potential);
      if (std::abs(2 * kPi * kc) < 1e-8 && std::abs(H - Hs) <= 1e-8) {
        // Vertex arrival: hand over to the closed-form continuation with the
        // local slope (the RK4 step degenerates on the separatrix).
        const Real c_loc = std::abs(fl.potential.derivative(xs));
        if (c_loc <= 0)
          throw std::runtime_error("trajectory: vertex reached with no conical slope");
        FlowSpec local = fl;
        local.mode = FlowSpec::Mode::closed_form_conical;
        local.slope = c_loc;
        return advance_conical(xs, 0.0, t_rem, local);
      }
      x = xs;
      k = kc;
      continue;
    }
    x = x1;
    k = k1;
    t_rem -= h;
  }
  return {x, k};
}

} // namespace

Real Ensemble::total_weight() const {
  Real s = 0;
  for (const auto& p : particles) s += p.weight;
  return s;
}

Real hamiltonian(Real x, Real k, const Potential& V) {
  const Real v = 2 * kPi * k;
  return 0.5 * v * v + V.value(x);
}

std::pair<Real, Real> trajectory(Real x0, Real k0, Real t, const FlowSpec& flow) {
  if (t == 0) return {x0, k0};
  if (t < 0) {
    // Time reversal: (x,k,t) -> (x,-k,-t).
    auto [x, k] = trajectory(x0, -k0, -t, flow);
    return {x, -k};
  }
  if (flow.mode == FlowSpec::Mode::closed_form_conical)
    return advance_conical(x0, k0, t, flow);
  return advance_rk4(x0, k0, t, flow);
}

PartitionWeights partition(Ensemble& e, const Potential& V, Real center) {
  const Real Hs = V.value(center);
  PartitionWeights w;
  for (auto& p : e.particles) {
    const Real H = hamiltonian(p.x, p.k, V);
    if (std::abs(H - Hs) <= 1e-12) {
      p.label = EnergyLabel::S_zero;
      w.zero += p.weight;
    } else if (H > Hs) {
      p.label = EnergyLabel::S_plus;
      w.plus += p.weight;
    } else {
      p.label = EnergyLabel::S_minus;
      w.minus += p.weight;
    }
  }
  return w;
}

SampleResult sample_particles(const PhaseSpaceField& f, int n_target,
                              Real mass_threshold) {
  const int nx = static_cast<int>(f.x.size()), nk = static_cast<int>(f.k.size());
  if (nx == 0 || nk == 0) throw std::invalid_argument("sample_particles: empty field");
  const Real vmax = f.values.maxCoeff();
  if (f.values.minCoeff() < -1e-12 * std::max(vmax, Real(1)))
    throw std::invalid_argument("sample_particles: field has negative mass");

  // Merge cells into b x b blocks so at most n_target particles result.
  int b = 1;
  while (static_cast<long>((nx + b - 1) / b) * ((nk + b - 1) / b) > n_target) ++b;
  const Real cell = f.dx() * f.dk();

  struct Block {
    Real mass, x, k;
  };
  std::vector<Block> blocks;
  Real total = 0, max_mass = 0;
  for (int i0 = 0; i0 < nx; i0 += b)
    for (int j0 = 0; j0 < nk; j0 += b) {
      const int ni = std::min(b, nx - i0), nj = std::min(b, nk - j0);
      const Real m = f.values.block(i0, j0, ni, nj).sum() * cell;
      const Real xc = 0.5 * (f.x[i0] + f.x[i0 + ni - 1]);
      const Real kc = 0.5 * (f.k[j0] + f.k[j0 + nj - 1]);
      blocks.push_back({m, xc, kc});
      total += m;
      max_mass = std::max(max_mass, m);
    }

  SampleResult r;
  r.ensemble.hbar = f.hbar;
  for (const auto& blk : blocks) {
    if (blk.mass > mass_threshold * max_mass)
      r.ensemble.particles.push_back({blk.mass, blk.x, blk.k, EnergyLabel::S_zero});
    else
      r.truncated_mass += blk.mass;
  }
  if (r.ensemble.particles.empty())
    throw std::runtime_error("sample_particles: threshold removed all mass");
  return r;
}

Ensemble propagate(const Ensemble& e, Real t, const FlowSpec& flow) {
  Ensemble out = e;
  for (auto& p : out.particles) {
    const auto [x, k] = trajectory(p.x, p.k, t, flow);
    p.x = x;
    p.k = k;
  }
  return out;
}

Real measure_ensemble(const Ensemble& e, const SymbolFn& a) {
  Real s = 0;
  for (const auto& p : e.particles) s += p.weight * a(p.x, p.k);
  return s;
}

std::vector<InterferenceEvent> detect_interference(const Ensemble& e,
                                                   const FlowSpec& flow, Real T,
                                                   InterferenceOptions opt) {
  const Real eps = opt.eps > 0 ? opt.eps : 3 * std::sqrt(e.hbar);
  const Real win = opt.window > 0 ? opt.window : std::sqrt(e.hbar);
  const Real dt = win / 20;
  const Real total = e.total_weight();

  // Per particle: time of closest approach during the first transit of the
  // ball, tagged by the side the particle came from.
  struct Arrival {
    Real t, mass;
    int side;
  };
  std::vector<Arrival> arrivals;
  const int nsteps = static_cast<int>(std::ceil(T / dt));
  for (const auto& p0 : e.particles) {
    Real x = p0.x, k = p0.k, prev_x = p0.x;
    bool entered = false;
    Real best = 0, best_t = 0;
    int side = 0;
    for (int n = 0; n <= nsteps; ++n) {
      const Real t = n * dt;
      const Real dx = x - flow.center, dk = k - opt.k_star;
      const Real d2 = dx * dx + dk * dk;
      if (d2 <= eps * eps) {
        if (!entered) {
          entered = true;
          best = d2;
          best_t = t;
          side = sgn(prev_x - flow.center);
          if (side == 0) side = sgn(dx);
          if (side == 0) side = k >= 0 ? -1 : 1; // moving right came from left
        } else if (d2 < best) {
          best = d2;
          best_t = t;
        }
      } else if (entered) {
        break;
      }
      prev_x = x;
      const auto [xn, kn] = trajectory(x, k, dt, flow);
      x = xn;
      k = kn;
    }
    if (entered) arrivals.push_back({best_t, p0.weight, side});
  }

  std::sort(arrivals.begin(), arrivals.end(),
            [](const Arrival& a, const Arrival& b) { return a.t < b.t; });

  // Coincidence: a window of width win in which both sides deliver at least
  // mass_frac of the total; overlapping qualifying windows merge.
  std::vector<InterferenceEvent> events;
  const std::size_t n = arrivals.size();
  std::size_t i = 0;
  while (i < n) {
    Real ml = 0, mr = 0;
    std::size_t j = i;
    while (j < n && arrivals[j].t < arrivals[i].t + win) {
      (arrivals[j].side < 0 ? ml : mr) += arrivals[j].mass;
      ++j;
    }
    if (ml < opt.mass_frac * total || mr < opt.mass_frac * total) {
      ++i;
      continue;
    }
    Real mass_l = ml, mass_r = mr;
    std::size_t jend = j, i2 = i + 1;
    while (i2 < n && arrivals[i2].t < arrivals[jend - 1].t + win) {
      Real l2 = 0, r2 = 0;
      std::size_t j2 = i2;
      while (j2 < n && arrivals[j2].t < arrivals[i2].t + win) {
        (arrivals[j2].side < 0 ? l2 : r2) += arrivals[j2].mass;
        ++j2;
      }
      if (l2 >= opt.mass_frac * total && r2 >= opt.mass_frac * total) {
        jend = std::max(jend, j2);
        mass_l = std::max(mass_l, l2);
        mass_r = std::max(mass_r, r2);
      }
      ++i2;
    }
    Real tm = 0, mm = 0;
    for (std::size_t q = i; q < jend; ++q) {
      tm += arrivals[q].t * arrivals[q].mass;
      mm += arrivals[q].mass;
    }
    events.push_back({tm / mm, mass_l, mass_r});
    i = jend;
  }
  return events;
}

void write_ensemble_csv(const Ensemble& e, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_ensemble_csv: cannot open " + path);
  f.precision(17);
  f << "weight,x,k,label\n";
  for (const auto& p : e.particles)
    f << p.weight << "," << p.x << "," << p.k << "," << label_name(p.label) << "\n";
}

void write_events_csv(const std::vector<InterferenceEvent>& events,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_events_csv: cannot open " + path);
  f.precision(17);
  f << "t,side,mass\n";
  for (const auto& ev : events) {
    f << ev.t << ",left," << ev.mass_left << "\n";
    f << ev.t << ",right," << ev.mass_right << "\n";
  }
}

} // namespace semiclassic
