#pragma once

#include <semiclassic/types.hpp>
#include <vector>

namespace semiclassic {

/// 1D interval [a,b] with a strictly increasing node sequence including both
/// endpoints.
class Grid1D {
public:
  Grid1D(Real a, Real b, std::vector<Real> nodes);

  static Grid1D uniform(Real a, Real b, int cells);

  Real a() const { return a_; }
  Real b() const { return b_; }
  const std::vector<Real>& nodes() const { return nodes_; }
  int cell_count() const { return static_cast<int>(nodes_.size()) - 1; }

  bool contains(Real x) const { return x >= a_ && x <= b_; }
  Real spacing_min() const;

private:
  Real a_, b_;
  std::vector<Real> nodes_;
};

/// Semiclassical parameters shared across modules.
struct SemiclassicalConfig {
  Real hbar = 1e-2;
  Real sigma_x = 0.7071067811865476; // 1/sqrt(2), display-grade smoothing
  Real sigma_k = 0.7071067811865476;
  Real M_bm = 4.0;

  void validate() const;
};

} // namespace semiclassic
