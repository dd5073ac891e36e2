#pragma once

// Fixed-step classical Runge-Kutta with a step-halving error estimate.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "gdef/residual.hpp"

namespace gdef {

template <class Rhs>
Eigen::VectorXcd rk4(const Rhs& f, Eigen::VectorXcd y, double s0, double s1, int steps) {
  const double h = (s1 - s0) / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = s0 + k * h;
    const Eigen::VectorXcd k1 = f(s, y);
    const Eigen::VectorXcd k2 = f(s + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = f(s + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = f(s + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

struct HalvedStep {
  Eigen::VectorXcd y;
  double error = 0.0;  // max-norm difference between the two step sizes
};

// Integrates with n and 2n steps; returns the Richardson combination.
template <class Rhs>
HalvedStep rk4_halved(const Rhs& f, const Eigen::VectorXcd& y0, double s0, double s1, int steps) {
  const Eigen::VectorXcd coarse = rk4(f, y0, s0, s1, steps);
  const Eigen::VectorXcd fine = rk4(f, y0, s0, s1, 2 * steps);
  HalvedStep out;
  out.error = max_abs(fine - coarse);
  out.y = fine + (fine - coarse) / 15.0;
  return out;
}

// Doubles the step count until the halving estimate is within tol * max(1, |y|),
// at most max_doublings times. The caller gates the returned error.
template <class Rhs>
HalvedStep rk4_refined(const Rhs& f, const Eigen::VectorXcd& y0, double s0, double s1, int steps, double tol,
                       int max_doublings = 10) {
  HalvedStep st = rk4_halved(f, y0, s0, s1, steps);
  for (int k = 0; k < max_doublings && std::isfinite(st.error) &&
                  st.error > tol * std::max(1.0, st.y.cwiseAbs().maxCoeff());
       ++k) {
    steps *= 2;
    st = rk4_halved(f, y0, s0, s1, steps);
  }
  return st;
}

inline int steps_for(double length, double max_step) {
  return std::max(2, static_cast<int>(std::ceil(std::abs(length) / max_step)));
}

}  // namespace gdef
