#pragma once

// Pairs of curves in a semi-Euclidean space: shared dimension, the orthogonal
// splitting of their spans, and the honest-deformation interval.

#include <vector>

#include <Eigen/Dense>

#include "gdef/expr.hpp"

namespace gdef {

struct CurvePair {
  std::vector<Expr> alpha1, alpha2;  // components as expressions in u0
  Eigen::VectorXd signature;         // diagonal of the ambient product, entries +-1
  double u_lo = -1.0, u_hi = 1.0, v_lo = -1.0, v_hi = 1.0;
  double u_base = 0.0, v_base = 0.0;
  // Ambient linear map applied to both curves (identity unless set).
  Eigen::MatrixXd transform;

  int ambient_dim() const { return static_cast<int>(signature.size()); }
  Eigen::VectorXd position(int which, double t) const;
  Eigen::VectorXd velocity(int which, double t) const;
  double product(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

struct SharedDimension {
  int rank = 0;
  std::vector<double> singular_values;
  int samples = 0;
};
SharedDimension shared_dimension(const CurvePair& pair, int samples = 64, double tol_rel = 1e-8);

struct OrthogonalSplit {
  Eigen::MatrixXd V1, Vl, V2;  // columns span the subspaces
  int l = 0;
  int dim_span1 = 0, dim_span2 = 0;
  double containment_residual = 0.0;  // span(alpha_i) inside V_i + V^l
  double orthogonality_residual = 0.0;
  std::vector<double> gram_spectrum_union;   // eigenvalues of the product on span1 + span2
  std::vector<double> gram_spectrum_shared;  // eigenvalues on V^l
};
// Throws DegenerateSpan when the spans are numerically degenerate.
OrthogonalSplit orthogonal_split(const CurvePair& pair, int samples = 64, double tol_rel = 1e-8);

struct HonestInterval {
  double lo = 0.0, hi = 0.0;
  double projected1 = 0.0, projected2 = 0.0;  // <bar alpha_i', bar alpha_i'>
};
// Interval at the basepoint (u_base, v_base).
HonestInterval honest_interval(const CurvePair& pair, int samples = 64);
// Intersection of the pointwise intervals over the windows.
HonestInterval honest_interval_window(const CurvePair& pair, double u_lo, double u_hi, double v_lo,
                                      double v_hi, int samples = 64);

}  // namespace gdef
