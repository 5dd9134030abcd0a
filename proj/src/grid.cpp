#include <semiclassic/grid.hpp>

#include <limits>
#include <stdexcept>

namespace semiclassic {

Grid1D::Grid1D(Real a, Real b, std::vector<Real> nodes)
    : a_(a), b_(b), nodes_(std::move(nodes)) {
  if (!(a < b)) throw std::invalid_argument("Grid1D: need a < b");
  if (nodes_.size() < 2) throw std::invalid_argument("Grid1D: need >= 2 nodes");
  if (nodes_.front() != a || nodes_.back() != b)
    throw std::invalid_argument("Grid1D: nodes must start at a and end at b");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1]))
      throw std::invalid_argument("Grid1D: nodes must be strictly increasing");
}

Grid1D Grid1D::uniform(Real a, Real b, int cells) {
  if (cells < 1) throw std::invalid_argument("Grid1D::uniform: cells >= 1");
  std::vector<Real> nodes(cells + 1);
  const Real h = (b - a) / cells;
  for (int i = 0; i <= cells; ++i) nodes[i] = a + h * i;
  nodes.front() = a;
  nodes.back() = b;
  return Grid1D(a, b, std::move(nodes));
}

Real Grid1D::spacing_min() const {
  Real h = std::numeric_limits<Real>::infinity();
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    h = std::min(h, nodes_[i] - nodes_[i - 1]);
  return h;
}

void SemiclassicalConfig::validate() const {
  if (!(hbar > 0)) throw std::invalid_argument("config: hbar must be > 0");
  if (!(sigma_x > 0 && sigma_x <= 1.0))
    throw std::invalid_argument("config: sigma_x must be in (0,1]");
  if (!(sigma_k > 0 && sigma_k <= 1.0))
    throw std::invalid_argument("config: sigma_k must be in (0,1]");
  if (!(M_bm > 0)) throw std::invalid_argument("config: M_bm must be > 0");
}

} // namespace semiclassic
