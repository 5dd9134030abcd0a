#pragma once

#include <semiclassic/types.hpp>
#include <functional>
#include <vector>

namespace semiclassic {

/// Potential descriptor: closed-form value and a.e. derivative, plus an
/// explicit list of conical singular points (kinks of |g|^{1+a} factors).
///
/// The derivative is the classical derivative wherever g(x) != 0; at a
/// singular point the left-sided limit is returned.
class Potential {
public:
  enum class Kind { closed_form_smooth, conical_composite, time_dependent, tabulated };

  using ScalarFn = std::function<Real(Real)>;
  using SpaceTimeFn = std::function<Real(Real, Real)>;

  static Potential smooth(ScalarFn v, ScalarFn dv);
  /// V(x) = V0(x) + w(x) |g(x)|^{1+a}, with the roots of g listed explicitly.
  static Potential conical(ScalarFn v0, ScalarFn dv0, ScalarFn w, ScalarFn dw,
                           ScalarFn g, ScalarFn dg, Real a_hoelder,
                           std::vector<Real> singular_points);
  static Potential time_dependent(SpaceTimeFn v, SpaceTimeFn dv);
  static Potential tabulated(std::vector<Real> xs, std::vector<Real> vs);

  Real value(Real x, Real t = 0.0) const { return value_(x, t); }
  Real derivative(Real x, Real t = 0.0) const { return deriv_(x, t); }

  Kind kind() const { return kind_; }
  Real a_hoelder() const { return a_hoelder_; }
  const std::vector<Real>& singular_points() const { return singular_points_; }
  bool is_time_dependent() const { return kind_ == Kind::time_dependent; }

  // -- built-in potentials used by the experiments --

  /// 1 + (1+tanh(4(x+2.5)))(1+tanh(-4(x-2.5)))(-|x|+4)/8 ; kink at x = 0,
  /// exponentially close to 3 - |x|/2 near the origin.
  static Potential corner_splitting();
  /// Variant with tanh transitions at +-4 (the sliced-WKB experiment).
  static Potential corner_splitting_wide();
  /// V = c*|x| (c may be negative; c=-1 is the canonical singular saddle).
  static Potential abs_linear(Real c);
  /// V = -|x|^{1+a} b(x) with a smooth tanh cutoff b (=1 for |x|<2, =0 for |x|>4).
  static Potential saddle_hoelder(Real a_hoelder);
  /// Double-well (x^2-0.25)^2.
  static Potential double_well();
  /// V(x,t) = x^2 / (2(t+0.05)).
  static Potential tdp();

private:
  Potential() = default;
  Kind kind_ = Kind::closed_form_smooth;
  SpaceTimeFn value_, deriv_;
  Real a_hoelder_ = 0.0;
  std::vector<Real> singular_points_;
};

} // namespace semiclassic
