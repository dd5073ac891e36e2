#pragma once

// Gauss parametrization psi(x, w) = gamma h + grad gamma + w of a hypersurface
// from its Gauss image h and support function gamma, together with the
// operator P_w, splitting tensors and a numerical rank check.
//
// Only real charts (no conjugate pairs) are accepted: h must be a real
// immersion for the parametrization to make sense.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gdef/chart.hpp"
#include "gdef/grid.hpp"

namespace gdef {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Values and derivatives of h and gamma at one point of the chart.
struct GaussPoint {
  std::vector<double> x;
  Mat H;                  // columns d_i h
  std::vector<Mat> HH;    // HH[i] columns d_i d_j h
  Vec h;
  Vec eta;               // ambient product diagonal
  double gamma = 0.0;
  Vec dgamma;             // d_i gamma
  Mat ddgamma;            // d_i d_j gamma
  Mat metric;             // chart metric g_ij
  Mat metric_inv;
  Mat normals;            // columns: orthonormal frame of the normal space of h in the sphere
  std::vector<Mat> christoffel;  // christoffel[k](i, j) = Gamma^k_ij induced by h
};

class GaussData {
 public:
  // Throws WrongDimension unless h and gamma are present and the chart is real.
  explicit GaussData(ConjugateChart chart, std::vector<double> reference = {});

  const ConjugateChart& chart() const { return chart_; }
  int p() const { return chart_.p(); }
  int dims() const { return chart_.dims(); }
  int ambient_dim() const { return chart_.ambient_dim(); }  // n + 1
  int n() const { return ambient_dim() - 1; }
  int fiber_dim() const { return n() - p() - 1; }
  const Vec& eta() const { return eta_; }
  double product(const Vec& a, const Vec& b) const { return a.dot(eta_.asDiagonal() * b); }

  // Throws SingularMetric.
  GaussPoint at(const std::vector<double>& x) const;
  // Normal frame alone (cheaper than at()).
  Mat normal_frame(const std::vector<double>& x) const;

 private:
  Mat frame_from(const Vec& h, const Mat& H) const;

  ConjugateChart chart_;
  Vec eta_;
  std::vector<int> axes_;  // ambient axes seeding the reference frame
  Mat seeds_;              // vectors orthonormalised into the normal frame
};

// psi(x, t) with fiber coordinates t in the normal frame.
Vec gauss_parametrize(const GaussData& gd, const std::vector<double>& x, const Vec& t);
Vec gauss_parametrize(const GaussData& gd, const GaussPoint& gp, const Vec& t);

// Fourth-order finite-difference Jacobian of psi in (x, t); columns base then fiber.
Mat psi_jacobian(const GaussData& gd, const std::vector<double>& x, const Vec& t, double h = 1e-3);

// B_xi: (B)^k_i = g^{kl} <d_i d_l h, xi> for xi in the normal frame coordinates.
Mat b_operator(const GaussPoint& gp, const Vec& xi);
Mat hessian(const GaussPoint& gp);  // Hess gamma, lowered
Mat p_operator(const GaussData& gd, const std::vector<double>& x, const Vec& t);
Mat p_operator(const GaussPoint& gp, const Vec& t);

// C_xi = B_xi P_w^{-1}. Throws SingularP when P_w is numerically singular.
Mat splitting_tensor(const GaussData& gd, const std::vector<double>& x, const Vec& t, const Vec& xi,
                     double cond_cap = 1e12);

struct Genericity {
  bool applicable = true;  // false when the fiber is trivial
  bool generic = false;
  double p_condition = 0.0;
  Vec witness;
  double best_gap = 0.0;  // minimal eigenvalue gap over spectral radius for the witness
};
struct GenericityOptions {
  double margin = 1e-6;
  double cond_cap = 1e12;
  int samples = 64;
  std::uint64_t seed = 3;
};
Genericity genericity_test(const GaussData& gd, const std::vector<double>& x, const Vec& t,
                           const GenericityOptions& opts = {});

struct RankReport {
  int samples = 0;
  int min_immersion_rank = 0;  // rank of the Jacobian of psi, ideally n
  int min_shape_rank = 0;      // ideally p + 1
  int max_shape_rank = 0;
  double support_residual = 0.0;        // | <psi, N> - gamma |
  double normal_alignment = 0.0;        // | |<N, h>| - 1 |
  double fiber_annihilation = 0.0;      // |A v| / |A| on fiber directions
  double p_consistency = 0.0;           // shape values vs -diag(g P) on the base directions
};
// Samples psi over the grid of base points and the fiber offsets given as rows of fiber_points.
RankReport hypersurface_rank_check(const GaussData& gd, const Grid& grid, const Mat& fiber_points,
                                   double rank_tol = 1e-6);

// <A d_i, d_i> for the base coordinate directions, from P_w.
Vec shape_values(const GaussPoint& gp, const Vec& t);

}  // namespace gdef
