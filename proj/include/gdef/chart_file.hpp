#pragma once

// Plain-text chart files.
//
//   # comment
//   [meta]
//   name = flat_torus_p1
//   p = 1
//   s = 0
//   pairs =               (conjugate pairs, e.g. "0-1, 2-3")
//   ambient = sphere      (or hyperbolic)
//   [christoffel]
//   G_0_1 = <expr>        (Gamma_{01}^1; omitted entries are 0)
//   [metric]
//   g_0_0 = <expr>        (i <= j; omitted entries are 0)
//   [immersion]
//   h_0 = <expr>
//   [support]
//   gamma = <expr>
//   [grid]
//   lo = 0, 0
//   hi = 1, 1
//   n = 9, 9
//   basepoint = 0.5, 0.5
//   [curves]
//   signature = -1, 1, 1
//   alpha1_0 = <expr in u0>
//   alpha2_0 = <expr in u0>
//   u = -1, 1
//   v = -1, 1
//   basepoint = 0, 0
//   [expected]
//   key = value           (regression fixtures, kept as strings)

#include <map>
#include <optional>
#include <string>

#include "gdef/chart.hpp"
#include "gdef/curves.hpp"
#include "gdef/grid.hpp"

namespace gdef {

struct ChartFile {
  std::string name;
  std::optional<ConjugateChart> chart;
  Grid grid;
  std::vector<double> basepoint;
  std::optional<CurvePair> curves;
  std::map<std::string, std::string> expected;
};

ChartFile parse_chart_file(const std::string& text);
ChartFile load_chart_file(const std::string& path);

}  // namespace gdef
