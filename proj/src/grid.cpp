#include "gdef/grid.hpp"

namespace gdef {

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int k : n) s *= static_cast<std::size_t>(k);
  return s;
}

double Grid::step(int axis) const {
  return n[axis] > 1 ? (hi[axis] - lo[axis]) / (n[axis] - 1) : 0.0;
}

double Grid::coordinate(int axis, int k) const { return lo[axis] + k * step(axis); }

std::vector<int> Grid::unflatten(std::size_t flat) const {
  std::vector<int> idx(n.size());
  for (int a = axes() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n[a]);
    flat /= n[a];
  }
  return idx;
}

std::size_t Grid::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < axes(); ++a) flat = flat * n[a] + idx[a];
  return flat;
}

std::vector<double> Grid::node(std::size_t flat) const {
  auto idx = unflatten(flat);
  std::vector<double> x(n.size());
  for (int a = 0; a < axes(); ++a) x[a] = coordinate(a, idx[a]);
  return x;
}

std::vector<std::vector<double>> Grid::nodes() const {
  std::vector<std::vector<double>> out;
  out.reserve(size());
  for (std::size_t f = 0; f < size(); ++f) out.push_back(node(f));
  return out;
}

Grid Grid::resampled(int k) const {
  Grid g = *this;
  for (auto& v : g.n) v = k;
  return g;
}

}  // namespace gdef
