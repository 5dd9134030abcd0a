#include <semiclassic/potential.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiclassic {

Potential Potential::smooth(ScalarFn v, ScalarFn dv) {
  Potential p;
  p.kind_ = Kind::closed_form_smooth;
  p.value_ = [v = std::move(v)](Real x, Real) { return v(x); };
  p.deriv_ = [dv = std::move(dv)](Real x, Real) { return dv(x); };
  return p;
}

Potential Potential::conical(ScalarFn v0, ScalarFn dv0, ScalarFn w, ScalarFn dw,
                             ScalarFn g, ScalarFn dg, Real a_hoelder,
                             std::vector<Real> singular_points) {
  if (a_hoelder < 0 || a_hoelder >= 1)
    throw std::invalid_argument("conical potential: a must be in [0,1)");
  for (Real s : singular_points)
    if (std::abs(g(s)) > 1e-12)
      throw std::invalid_argument("conical potential: singular point is not a root of g");
  Potential p;
  p.kind_ = Kind::conical_composite;
  p.a_hoelder_ = a_hoelder;
  std::sort(singular_points.begin(), singular_points.end());
  p.singular_points_ = std::move(singular_points);
  const Real ap1 = 1 + a_hoelder;
  p.value_ = [v0, w, g, ap1](Real x, Real) {
    return v0(x) + w(x) * std::pow(std::abs(g(x)), ap1);
  };
  p.deriv_ = [v0, dv0, w, dw, g, dg, ap1, a = a_hoelder](Real x, Real) {
    const Real gx = g(x);
    const Real sgn = gx > 0 ? 1.0 : (gx < 0 ? -1.0 : -1.0); // left limit at kinks
    const Real absg = std::abs(gx);
    const Real pow_a = a == 0.0 ? 1.0 : std::pow(absg, a);
    return dv0(x) + dw(x) * std::pow(absg, ap1) + w(x) * ap1 * pow_a * sgn * dg(x);
  };
  return p;
}

Potential Potential::time_dependent(SpaceTimeFn v, SpaceTimeFn dv) {
  Potential p;
  p.kind_ = Kind::time_dependent;
  p.value_ = std::move(v);
  p.deriv_ = std::move(dv);
  return p;
}

Potential Potential::tabulated(std::vector<Real> xs, std::vector<Real> vs) {
  if (xs.size() != vs.size() || xs.size() < 2)
    throw std::invalid_argument("tabulated potential: need matching xs/vs, size >= 2");
  Potential p;
  p.kind_ = Kind::tabulated;
  auto interp = [xs = std::move(xs), vs = std::move(vs)](Real x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it == xs.begin() ? 1 : std::min<std::size_t>(it - xs.begin(), xs.size() - 1);
    const Real t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return vs[i - 1] * (1 - t) + vs[i] * t;
  };
  auto dinterp = [interp](Real x) {
    const Real h = 1e-6;
    return (interp(x + h) - interp(x - h)) / (2 * h);
  };
  p.value_ = [interp](Real x, Real) { return interp(x); };
  p.deriv_ = [dinterp](Real x, Real) { return dinterp(x); };
  return p;
}

namespace {
// (1+tanh(s(x+c)))(1+tanh(-s(x-c))) envelope and its derivative.
struct Envelope {
  Real s, c;
  Real value(Real x) const {
    return (1 + std::tanh(s * (x + c))) * (1 + std::tanh(-s * (x - c)));
  }
  Real deriv(Real x) const {
    const Real tp = std::tanh(s * (x + c)), tm = std::tanh(-s * (x - c));
    const Real dp = s * (1 - tp * tp), dm = -s * (1 - tm * tm);
    return dp * (1 + tm) + (1 + tp) * dm;
  }
};

Potential make_corner(Real transition_center) {
  Envelope env{4.0, transition_center};
  return Potential::conical(
      [env](Real x) { return 1.0 + env.value(x) * (4.0 - 0.0) / 8.0 + 0.0 * x; },
      [env](Real x) { return env.deriv(x) * 4.0 / 8.0; },
      [env](Real x) { return -env.value(x) / 8.0; },
      [env](Real x) { return -env.deriv(x) / 8.0; },
      [](Real x) { return x; }, [](Real) { return 1.0; },
      0.0, {0.0});
}
} // namespace

Potential Potential::corner_splitting() { return make_corner(2.5); }
Potential Potential::corner_splitting_wide() { return make_corner(4.0); }

Potential Potential::abs_linear(Real c) {
  return conical([](Real) { return 0.0; }, [](Real) { return 0.0; },
                 [c](Real) { return c; }, [](Real) { return 0.0; },
                 [](Real x) { return x; }, [](Real) { return 1.0; },
                 0.0, {0.0});
}

Potential Potential::saddle_hoelder(Real a_hoelder) {
  Envelope b{4.0, 3.0}; // ~1 for |x|<2, ~0 for |x|>4
  return conical([](Real) { return 0.0; }, [](Real) { return 0.0; },
                 [b](Real x) { return -b.value(x) / 4.0; },
                 [b](Real x) { return -b.deriv(x) / 4.0; },
                 [](Real x) { return x; }, [](Real) { return 1.0; },
                 a_hoelder, {0.0});
}

Potential Potential::double_well() {
  return smooth([](Real x) { return std::pow(x * x - 0.25, 2); },
                [](Real x) { return 4.0 * x * (x * x - 0.25); });
}

Potential Potential::tdp() {
  return time_dependent([](Real x, Real t) { return x * x / (2 * (t + 0.05)); },
                        [](Real x, Real t) { return x / (t + 0.05); });
}

} // namespace semiclassic
