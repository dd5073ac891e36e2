#include "gdef/curves.hpp"

#include <algorithm>
#include <cmath>

#include "gdef/errors.hpp"
#include "gdef/residual.hpp"
#include "gdef/jet.hpp"

namespace gdef {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (n - 1);
  return out;
}

// Orthonormal (Euclidean) basis of the column space.
Mat column_space(const Mat& m, double tol_rel) {
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > tol_rel * sv(0) && sv(k) > 1e-14) ++r;
  return svd.matrixU().leftCols(r);
}

// Orthonormal basis of the null space of m (columns).
Mat null_space(const Mat& m, double tol_rel) {
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  const double scale = sv.size() ? sv(0) : 0.0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > tol_rel * std::max(scale, 1.0)) ++r;
  return svd.matrixV().rightCols(n - r);
}

Mat velocities(const CurvePair& pair, int which, double lo, double hi, int samples) {
  Mat out(pair.ambient_dim(), samples);
  const auto ts = linspace(lo, hi, samples);
  for (int k = 0; k < samples; ++k) out.col(k) = pair.velocity(which, ts[k]);
  return out;
}

std::vector<double> spectrum(const Mat& gram) {
  std::vector<double> out;
  if (gram.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  for (int k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k));
  return out;
}

double min_abs(const std::vector<double>& v) {
  double m = INFINITY;
  for (double x : v) m = std::min(m, std::abs(x));
  return m;
}

}  // namespace

Eigen::VectorXd CurvePair::position(int which, double t) const {
  const auto& alpha = which == 1 ? alpha1 : alpha2;
  Vec x(ambient_dim());
  for (int k = 0; k < ambient_dim(); ++k) x(k) = evaluate(alpha[k], {cd(t)}).real();
  return transform.size() ? Vec(transform * x) : x;
}

Eigen::VectorXd CurvePair::velocity(int which, double t) const {
  const auto& alpha = which == 1 ? alpha1 : alpha2;
  Vec x(ambient_dim());
  for (int k = 0; k < ambient_dim(); ++k) x(k) = eval_jet(alpha[k], {cd(t)}, 1).d(0).real();
  return transform.size() ? Vec(transform * x) : x;
}

double CurvePair::product(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return x.dot(signature.asDiagonal() * y);
}

SharedDimension shared_dimension(const CurvePair& pair, int samples, double tol_rel) {
  const Mat a = velocities(pair, 1, pair.u_lo, pair.u_hi, samples);
  const Mat b = velocities(pair, 2, pair.v_lo, pair.v_hi, samples);
  const Mat gram = a.transpose() * pair.signature.asDiagonal() * b;
  Eigen::JacobiSVD<Mat> svd(gram);
  SharedDimension sd;
  sd.samples = samples;
  const auto& sv = svd.singularValues();
  for (int k = 0; k < sv.size(); ++k) sd.singular_values.push_back(sv(k));
  const double floor = 1e-12 * std::max(1.0, a.norm() * b.norm());
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > tol_rel * sv(0) && sv(k) > floor) ++sd.rank;
  return sd;
}

OrthogonalSplit orthogonal_split(const CurvePair& pair, int samples, double tol_rel) {
  const auto eta = pair.signature.asDiagonal();
  const Mat S1 = column_space(velocities(pair, 1, pair.u_lo, pair.u_hi, samples), tol_rel);
  const Mat S2 = column_space(velocities(pair, 2, pair.v_lo, pair.v_hi, samples), tol_rel);
  Mat both(S1.rows(), S1.cols() + S2.cols());
  both << S1, S2;
  const Mat U = column_space(both, tol_rel);

  OrthogonalSplit out;
  out.dim_span1 = static_cast<int>(S1.cols());
  out.dim_span2 = static_cast<int>(S2.cols());
  out.gram_spectrum_union = spectrum(U.transpose() * eta * U);
  const double deg_tol = 1e-8;
  if (min_abs(out.gram_spectrum_union) < deg_tol)
    throw DegenerateSpan("the product is degenerate on the sum of the spans");
  for (const Mat* S : {&S1, &S2}) {
    const Mat perp = null_space(S->transpose() * eta, tol_rel);
    const auto sp = spectrum(perp.transpose() * eta * perp);
    if (sp.empty()) continue;
    if (min_abs(sp) < deg_tol || sp.front() * sp.back() < 0)
      throw DegenerateSpan("the orthogonal complement of a span is not definite");
  }

  // V1 = S1 cap S2^perp, V2 = S2 cap S1^perp
  out.V1 = S1 * null_space(S2.transpose() * eta * S1, tol_rel);
  out.V2 = S2 * null_space(S1.transpose() * eta * S2, tol_rel);
  Mat outer(U.rows(), out.V1.cols() + out.V2.cols());
  outer << out.V1, out.V2;
  if (outer.cols() && min_abs(spectrum(outer.transpose() * eta * outer)) < deg_tol)
    throw DegenerateSpan("V1 + V2 is degenerate");
  out.Vl = outer.cols() ? Mat(U * null_space(outer.transpose() * eta * U, tol_rel)) : U;
  out.l = static_cast<int>(out.Vl.cols());
  out.gram_spectrum_shared = spectrum(out.Vl.transpose() * eta * out.Vl);

  auto residual_outside = [&](const Mat& S, const Mat& A) {
    Mat span(A.rows(), A.cols() + out.Vl.cols());
    span << A, out.Vl;
    double worst = 0.0;
    for (int k = 0; k < S.cols(); ++k) {
      const Vec c = span.colPivHouseholderQr().solve(S.col(k));
      worst = worst_of(worst, (span * c - S.col(k)).norm());
    }
    return worst;
  };
  out.containment_residual = worst_of(residual_outside(S1, out.V1), residual_outside(S2, out.V2));
  auto cross = [&](const Mat& A, const Mat& B) {
    if (A.cols() == 0 || B.cols() == 0) return 0.0;
    return (A.transpose() * eta * B).cwiseAbs().maxCoeff();
  };
  out.orthogonality_residual =
      worst_of({cross(out.V1, out.V2), cross(out.V1, out.Vl), cross(out.V2, out.Vl)});
  return out;
}

namespace {

struct Projector {
  Mat P;  // metric-orthogonal projection onto V^l
};

Projector shared_plane(const CurvePair& pair, int samples) {
  for (int which : {1, 2}) {
    const double lo = which == 1 ? pair.u_lo : pair.v_lo;
    const double hi = which == 1 ? pair.u_hi : pair.v_hi;
    for (double t : linspace(lo, hi, samples)) {
      const Vec v = pair.velocity(which, t);
      if (std::abs(pair.product(v, v) + 1.0) > 1e-8)
        throw NotPolarNormalized("<alpha" + std::to_string(which) + "', alpha" + std::to_string(which) +
                                 "'> differs from -1 at " + short_number(t));
    }
  }
  const SharedDimension sd = shared_dimension(pair, samples);
  if (sd.rank != 2)
    throw SharedDimensionNotTwo("shared dimension is " + std::to_string(sd.rank) + ", expected 2");
  const OrthogonalSplit split = orthogonal_split(pair, samples);
  const auto eta = pair.signature.asDiagonal();
  const Mat& V = split.Vl;
  Projector pr;
  pr.P = V * (V.transpose() * eta * V).inverse() * V.transpose() * eta;
  return pr;
}

double projected_norm(const CurvePair& pair, const Projector& pr, int which, double t) {
  const Vec v = pr.P * pair.velocity(which, t);
  return pair.product(v, v);
}

HonestInterval make_interval(double a, double b) {
  if (a * b <= 1.0)
    throw EmptyInterval("product of projected norms " + short_number(a * b) + " is not above 1");
  HonestInterval hi;
  hi.projected1 = a;
  hi.projected2 = b;
  hi.lo = a;
  hi.hi = 1.0 / b;
  if (!(hi.lo < hi.hi)) throw EmptyInterval("interval endpoints are not ordered");
  return hi;
}

}  // namespace

HonestInterval honest_interval(const CurvePair& pair, int samples) {
  const Projector pr = shared_plane(pair, samples);
  return make_interval(projected_norm(pair, pr, 1, pair.u_base), projected_norm(pair, pr, 2, pair.v_base));
}

HonestInterval honest_interval_window(const CurvePair& pair, double u_lo, double u_hi, double v_lo,
                                      double v_hi, int samples) {
  const Projector pr = shared_plane(pair, samples);
  HonestInterval out;
  out.lo = -INFINITY;
  out.hi = INFINITY;
  for (double u : linspace(u_lo, u_hi, samples))
    for (double v : linspace(v_lo, v_hi, samples)) {
      const HonestInterval pt = make_interval(projected_norm(pair, pr, 1, u), projected_norm(pair, pr, 2, v));
      if (pt.lo > out.lo) out.lo = pt.lo, out.projected1 = pt.projected1;
      if (pt.hi < out.hi) out.hi = pt.hi, out.projected2 = pt.projected2;
    }
  if (!(out.lo < out.hi)) throw EmptyInterval("pointwise intervals have empty intersection");
  return out;
}

}  // namespace gdef
