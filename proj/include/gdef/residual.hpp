#pragma once

// Running maxima for residuals. Unlike std::max these keep a NaN once one
// appears, so a broken evaluation cannot hide behind a finite maximum.

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <string>

namespace gdef {

inline double worst_of(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  return a < b ? b : a;
}

inline double worst_of(std::initializer_list<double> xs) {
  double m = 0.0;
  for (double x : xs) m = worst_of(m, x);
  return m;
}

// Largest absolute entry; NaN when any entry is not finite, 0 when empty.
template <class M>
double max_abs(const M& m) {
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  return m.cwiseAbs().maxCoeff();
}

// Short form for messages; std::to_string prints small residuals as 0.000000.
inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace gdef
