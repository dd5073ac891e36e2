#pragma once

// Conjugate charts as DMZ systems and their pointwise predicates.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "gdef/expr.hpp"
#include "gdef/grid.hpp"

namespace gdef {

using Point = std::vector<cd>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

class ConjugateChart {
 public:
  // pairs lists the conjugate coordinate pairs (a, b); every other index is real.
  // eps is +1 for the sphere, -1 for the hyperbolic space.
  ConjugateChart(int p, std::vector<std::pair<int, int>> pairs, int eps);

  int p() const { return p_; }
  int dims() const { return p_ + 1; }
  int s() const { return static_cast<int>(pairs_.size()); }
  int eps() const { return eps_; }
  int conj(int i) const { return conj_[i]; }
  const std::vector<int>& conj_map() const { return conj_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  bool is_real_index(int i) const { return conj_[i] == i; }

  // Christoffel symbol Gamma_{ji}^i: coefficient of d_i in nabla_{d_j} d_i, j != i.
  void set_christoffel(int j, int i, Expr e);
  const Expr& christoffel(int j, int i) const { return christoffel_[j][i]; }
  void set_metric(int i, int j, Expr e);
  const Expr& metric(int i, int j) const { return metric_[std::min(i, j)][std::max(i, j)]; }
  void set_immersion(std::vector<Expr> h) { h_ = std::move(h); }
  const std::vector<Expr>& immersion() const { return h_; }
  bool has_immersion() const { return !h_.empty(); }
  void set_support(Expr g) { support_ = std::move(g); }
  const Expr& support() const { return support_; }
  bool has_support() const { return support_ != nullptr; }

  // Ambient dimension n+1 of the immersion, 0 if absent.
  int ambient_dim() const { return static_cast<int>(h_.size()); }
  // Diagonal of the ambient inner product: (eps, 1, ..., 1).
  Eigen::VectorXd ambient_metric() const;

  // Real parameters t -> coordinates u; a pair (a, b) maps to t_a + i t_b, t_a - i t_b.
  Point coords(const std::vector<double>& t) const;
  // Row a holds the coefficients of d/dt_a in the basis d_0..d_p.
  MatrixC direction_weights() const;
  // Antiholomorphic involution u_i -> conj(u_{conj i}); fixes the real slice.
  Point conjugate(const Point& u) const;

 private:
  int p_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> conj_;
  int eps_;
  std::vector<std::vector<Expr>> christoffel_;
  std::vector<std::vector<Expr>> metric_;
  std::vector<Expr> h_;
  Expr support_;
};

// Jets of every chart coefficient at one point.
struct ChartJets {
  std::vector<std::vector<Jet>> christoffel;  // [j][i] = Gamma_{ji}^i, zero on the diagonal
  std::vector<std::vector<Jet>> metric;       // symmetric
};
ChartJets chart_jets(const ConjugateChart& chart, const Point& u, int order);

// Plain values of Gamma_{ji}^i and g_ij at a point.
struct ChartValues {
  MatrixC christoffel;  // (j, i)
  MatrixC metric;
};
ChartValues chart_values(const ConjugateChart& chart, const Point& u);

std::vector<Point> chart_points(const ConjugateChart& chart, const Grid& grid);

struct DmzResidualReport {
  std::vector<Point> points;
  // values[point][pair] holds Q_ij(field) for i < j, one entry per field component.
  std::vector<std::vector<VectorC>> values;
  std::vector<std::pair<int, int>> pairs;
  double max_norm = 0.0;
};

// Q_ij(xi) = d2_ij xi - Gamma_{ji}^i d_i xi - Gamma_{ij}^j d_j xi + eps g_ij xi.
DmzResidualReport dmz_apply(const ConjugateChart& chart, const std::vector<Expr>& field,
                            const std::vector<Point>& points);

struct IntegrabilityResult {
  bool vacuous = false;  // fewer than three coordinates
  double max_residual = 0.0;
};
IntegrabilityResult integrability_residual(const ConjugateChart& chart,
                                           const std::vector<Point>& points);

// Coefficients of a DMZ system d2_ij xi + a_{ij}^j d_j xi + a_{ji}^i d_i xi + b_ij xi.
struct DmzSystem {
  int dims = 0;
  std::vector<std::vector<Expr>> a;  // [i][j] = a_{ij}^j
  std::vector<std::vector<Expr>> b;  // symmetric
  static DmzSystem from_chart(const ConjugateChart& chart);
};

struct LaplaceInvariants {
  std::map<std::pair<int, int>, cd> m2;            // m_ij, i != j
  std::map<std::tuple<int, int, int>, cd> m3;      // m_ijk, distinct
};
LaplaceInvariants laplace_invariants(const DmzSystem& sys, const Point& u);

// |d_1 Gamma_{01}^1 - Gamma_{10}^0 Gamma_{01}^1 + eps g_01|, maximised over points.
double intersection_type_residual(const ConjugateChart& chart, const std::vector<Point>& points);

struct GeometricConsistency {
  double metric = 0.0;     // |g_ij - <d_i h, d_j h>|
  double unit_norm = 0.0;  // |<h,h> - eps|
  double dmz = 0.0;        // max |Q_ij(h)|
};
GeometricConsistency geometric_consistency(const ConjugateChart& chart,
                                           const std::vector<Point>& points);

struct ConjugationCheck {
  double christoffel = 0.0;
  double metric = 0.0;
};
// Gamma_{ji}^i(conj u) = conj(Gamma_{conj j, conj i}^{conj i}(u)) and likewise for g.
ConjugationCheck conjugation_check(const ConjugateChart& chart, const std::vector<Point>& points);

}  // namespace gdef
