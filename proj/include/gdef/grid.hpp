#pragma once

// Tensor-product lattice in a box of real parameters.

#include <cstddef>
#include <vector>

namespace gdef {

struct Grid {
  std::vector<double> lo, hi;
  std::vector<int> n;  // nodes per axis, >= 1

  int axes() const { return static_cast<int>(n.size()); }
  std::size_t size() const;
  double step(int axis) const;
  double coordinate(int axis, int k) const;
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& idx) const;
  std::vector<double> node(std::size_t flat) const;
  std::vector<std::vector<double>> nodes() const;
  // Grid of the same box with every axis resampled to k nodes.
  Grid resampled(int k) const;
};

}  // namespace gdef
