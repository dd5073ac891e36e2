#include "gdef/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gdef/errors.hpp"
#include "gdef/residual.hpp"

namespace gdef {

namespace {

Point to_point(const std::vector<double>& x) { return Point(x.begin(), x.end()); }

// Rank with a threshold relative to the largest singular value.
int numeric_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > tol * std::max(sv(0), 1e-300)) ++r;
  return sv(0) == 0.0 ? 0 : r;
}

}  // namespace

GaussData::GaussData(ConjugateChart chart, std::vector<double> reference) : chart_(std::move(chart)) {
  if (!chart_.has_immersion() || !chart_.has_support())
    throw WrongDimension("Gauss data needs [immersion] and [support]");
  if (chart_.s() != 0) throw WrongDimension("Gauss data needs a chart without conjugate pairs");
  if (fiber_dim() < 0)
    throw WrongDimension("immersion has " + std::to_string(ambient_dim()) +
                         " components, fewer than p + 2 = " + std::to_string(p() + 2));
  eta_ = chart_.ambient_metric();
  if (reference.empty()) reference.assign(dims(), 0.0);
  if (static_cast<int>(reference.size()) != dims()) throw WrongDimension("reference point size");

  // Pick, greedily, the ambient axes that stay furthest from span{h, d_i h}.
  const GaussPoint gp = [&] {
    GaussPoint g;
    const Point u = to_point(reference);
    const int N = ambient_dim();
    g.h.resize(N);
    g.H.resize(N, dims());
    for (int c = 0; c < N; ++c) {
      const Jet j = eval_jet(chart_.immersion()[c], u, 1);
      g.h(c) = j.value().real();
      for (int i = 0; i < dims(); ++i) g.H(c, i) = j.d(i).real();
    }
    return g;
  }();
  std::vector<Vec> basis;
  auto add = [&](Vec v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= product(v, b) / product(b, b) * b;
    return v;
  };
  basis.push_back(gp.h);
  for (int i = 0; i < dims(); ++i) basis.push_back(add(gp.H.col(i)));
  for (int k = 0; k < fiber_dim(); ++k) {
    int best = -1;
    double best_norm = -1.0;
    for (int a = 0; a < ambient_dim(); ++a) {
      if (std::find(axes_.begin(), axes_.end(), a) != axes_.end()) continue;
      const Vec r = add(Vec::Unit(ambient_dim(), a));
      const double nrm = std::abs(product(r, r));
      if (nrm > best_norm) best_norm = nrm, best = a;
    }
    axes_.push_back(best);
    basis.push_back(add(Vec::Unit(ambient_dim(), best)));
  }
  seeds_.resize(ambient_dim(), fiber_dim());
  for (int k = 0; k < fiber_dim(); ++k) seeds_.col(k) = Vec::Unit(ambient_dim(), axes_[k]);
  // Later frames are seeded by the reference frame itself, which stays away
  // from the tangent space on a neighbourhood of the reference point.
  seeds_ = frame_from(gp.h, gp.H);
}

Mat GaussData::frame_from(const Vec& h, const Mat& H) const {
  std::vector<Vec> basis;
  auto orth = [&](Vec v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= product(v, b) / product(b, b) * b;
    return v;
  };
  basis.push_back(h);
  for (int i = 0; i < H.cols(); ++i) basis.push_back(orth(H.col(i)));
  Mat out(ambient_dim(), fiber_dim());
  for (int k = 0; k < fiber_dim(); ++k) {
    Vec v = orth(seeds_.col(k));
    const double nrm = std::abs(product(v, v));
    if (!(nrm > 1e-10 * seeds_.col(k).squaredNorm()))
      throw SingularMetric("normal frame degenerates: a reference normal is tangent here");
    v /= std::sqrt(nrm);
    basis.push_back(v);
    out.col(k) = v;
  }
  return out;
}

Mat GaussData::normal_frame(const std::vector<double>& x) const {
  const Point u = to_point(x);
  const int N = ambient_dim();
  Vec h(N);
  Mat H(N, dims());
  for (int c = 0; c < N; ++c) {
    const Jet j = eval_jet(chart_.immersion()[c], u, 1);
    h(c) = j.value().real();
    for (int i = 0; i < dims(); ++i) H(c, i) = j.d(i).real();
  }
  return frame_from(h, H);
}

GaussPoint GaussData::at(const std::vector<double>& x) const {
  GaussPoint g;
  g.x = x;
  const Point u = to_point(x);
  const int N = ambient_dim(), d = dims();
  g.h.resize(N);
  g.H.resize(N, d);
  g.HH.assign(d, Mat(N, d));
  for (int c = 0; c < N; ++c) {
    const Jet j = eval_jet(chart_.immersion()[c], u, 2);
    g.h(c) = j.value().real();
    for (int i = 0; i < d; ++i) {
      g.H(c, i) = j.d(i).real();
      for (int k = 0; k < d; ++k) g.HH[i](c, k) = j.d(i, k).real();
    }
  }
  const Jet gj = eval_jet(chart_.support(), u, 2);
  g.gamma = gj.value().real();
  g.dgamma.resize(d);
  g.ddgamma.resize(d, d);
  for (int i = 0; i < d; ++i) {
    g.dgamma(i) = gj.d(i).real();
    for (int k = 0; k < d; ++k) g.ddgamma(i, k) = gj.d(i, k).real();
  }
  g.metric.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) g.metric(i, k) = evaluate(chart_.metric(i, k), u).real();
  Eigen::FullPivLU<Mat> lu(g.metric);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14)
    throw SingularMetric("chart metric is singular at the sample point");
  g.metric_inv = lu.inverse();
  g.normals = frame_from(g.h, g.H);
  g.christoffel.assign(d, Mat::Zero(d, d));
  g.eta = eta_;
  const Mat lowered = g.H.transpose() * eta_.asDiagonal();  // rows: eta d_l h
  for (int i = 0; i < d; ++i) {
    const Mat prods = lowered * g.HH[i];  // (l, j) = <d_l h, d_i d_j h>
    const Mat raised = g.metric_inv * prods;
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) g.christoffel[k](i, j) = raised(k, j);
  }
  return g;
}

Vec gauss_parametrize(const GaussData& gd, const GaussPoint& gp, const Vec& t) {
  Vec psi = gp.gamma * gp.h + gp.H * (gp.metric_inv * gp.dgamma);
  if (t.size()) psi += gp.normals * t;
  (void)gd;
  return psi;
}

Vec gauss_parametrize(const GaussData& gd, const std::vector<double>& x, const Vec& t) {
  return gauss_parametrize(gd, gd.at(x), t);
}

Mat b_operator(const GaussPoint& gp, const Vec& xi) {
  const int d = static_cast<int>(gp.H.cols());
  Mat M = Mat::Zero(d, d);
  if (xi.size() == 0) return M;
  const Vec w = gp.normals * xi;
  const Vec lw = gp.eta.asDiagonal() * w;
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) M(l, i) = gp.HH[i].col(l).dot(lw);
  return gp.metric_inv * M;
}

Mat hessian(const GaussPoint& gp) {
  const int d = static_cast<int>(gp.dgamma.size());
  Mat hs = gp.ddgamma;
  for (int k = 0; k < d; ++k) hs -= gp.christoffel[k] * gp.dgamma(k);
  return hs;
}

Mat p_operator(const GaussPoint& gp, const Vec& t) {
  const int d = static_cast<int>(gp.dgamma.size());
  return gp.metric_inv * hessian(gp) + gp.gamma * Mat::Identity(d, d) - b_operator(gp, t);
}

Mat p_operator(const GaussData& gd, const std::vector<double>& x, const Vec& t) {
  return p_operator(gd.at(x), t);
}

Mat splitting_tensor(const GaussData& gd, const std::vector<double>& x, const Vec& t, const Vec& xi,
                     double cond_cap) {
  const GaussPoint gp = gd.at(x);
  const Mat P = p_operator(gp, t);
  Eigen::JacobiSVD<Mat> svd(P);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) == 0.0 || sv(0) / sv(sv.size() - 1) >= cond_cap)
    throw SingularP("P_w is numerically singular");
  return b_operator(gp, xi) * P.inverse();
}

Genericity genericity_test(const GaussData& gd, const std::vector<double>& x, const Vec& t,
                           const GenericityOptions& opts) {
  Genericity g;
  if (gd.fiber_dim() == 0 || gd.p() < 1) {
    g.applicable = false;
    return g;
  }
  const GaussPoint gp = gd.at(x);
  const Mat P = p_operator(gp, t);
  Eigen::JacobiSVD<Mat> svd(P);
  const auto& sv = svd.singularValues();
  g.p_condition = sv(sv.size() - 1) == 0.0 ? INFINITY : sv(0) / sv(sv.size() - 1);
  if (!(g.p_condition < opts.cond_cap)) return g;
  const Mat Pinv = P.inverse();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int m = gd.fiber_dim();
  for (int s = 0; s < opts.samples + m; ++s) {
    Vec xi(m);
    if (s < m) xi = Vec::Unit(m, s);
    else
      for (int k = 0; k < m; ++k) xi(k) = gauss(rng);
    const Mat C = b_operator(gp, xi) * Pinv;
    Eigen::EigenSolver<Mat> es(C, false);
    const auto ev = es.eigenvalues();
    const double radius = ev.cwiseAbs().maxCoeff();
    if (radius < 1e-14) continue;
    double gap = INFINITY;
    for (int a = 0; a < ev.size(); ++a)
      for (int b = a + 1; b < ev.size(); ++b) gap = std::min(gap, std::abs(ev(a) - ev(b)));
    gap /= radius;
    if (gap > g.best_gap) {
      g.best_gap = gap;
      g.witness = xi;
    }
  }
  g.generic = g.best_gap > opts.margin;
  return g;
}

Vec shape_values(const GaussPoint& gp, const Vec& t) {
  return -(gp.metric * p_operator(gp, t)).diagonal();
}

namespace {

struct Sampler {
  const GaussData& gd;
  int d, n;
  Vec psi(const Vec& z) const {
    std::vector<double> x(z.data(), z.data() + d);
    return gauss_parametrize(gd, x, z.tail(n - d));
  }
  Mat jacobian(const Vec& z, double h = 1e-3) const {
    Mat J(gd.ambient_dim(), n);
    for (int a = 0; a < n; ++a) {
      Vec e = Vec::Unit(n, a) * h;
      J.col(a) = (-psi(z + 2 * e) + 8 * psi(z + e) - 8 * psi(z - e) + psi(z - 2 * e)) / (12 * h);
    }
    return J;
  }
  Vec normal(const Vec& z, const Vec& h_ref) const {
    const Mat J = jacobian(z);
    const Mat lowered = (gd.eta().asDiagonal() * J).transpose();
    Eigen::JacobiSVD<Mat> svd(lowered, Eigen::ComputeFullV);
    Vec N = svd.matrixV().col(gd.ambient_dim() - 1);
    N /= std::sqrt(std::abs(gd.product(N, N)));
    if (gd.product(N, h_ref) * gd.chart().eps() < 0) N = -N;
    return N;
  }
};

}  // namespace

Mat psi_jacobian(const GaussData& gd, const std::vector<double>& x, const Vec& t, double h) {
  const int d = gd.dims(), n = gd.n();
  Sampler s{gd, d, n};
  Vec z(n);
  for (int i = 0; i < d; ++i) z(i) = x[i];
  z.tail(n - d) = t;
  return s.jacobian(z, h);
}

RankReport hypersurface_rank_check(const GaussData& gd, const Grid& grid, const Mat& fiber_points,
                                   double rank_tol) {
  RankReport rep;
  const int d = gd.dims(), n = gd.n();
  Sampler s{gd, d, n};
  rep.min_immersion_rank = n;
  rep.min_shape_rank = n;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto x = grid.node(f);
    const GaussPoint gp = gd.at(x);
    for (int row = 0; row < fiber_points.rows(); ++row) {
      Vec z(n);
      for (int i = 0; i < d; ++i) z(i) = x[i];
      const Vec t = fiber_points.row(row).transpose();
      z.tail(n - d) = t;
      const Mat J = s.jacobian(z);
      const Vec N = s.normal(z, gp.h);
      Mat dN(gd.ambient_dim(), n);
      const double hn = 1e-2;
      for (int a = 0; a < n; ++a) {
        Vec e = Vec::Unit(n, a) * hn;
        dN.col(a) = (-s.normal(z + 2 * e, gp.h) + 8 * s.normal(z + e, gp.h) -
                     8 * s.normal(z - e, gp.h) + s.normal(z - 2 * e, gp.h)) /
                    (12 * hn);
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
      const Mat A = -cod.solve(dN);
      ++rep.samples;
      rep.min_immersion_rank = std::min(rep.min_immersion_rank, numeric_rank(J, rank_tol));
      const int sr = numeric_rank(A, rank_tol);
      rep.min_shape_rank = std::min(rep.min_shape_rank, sr);
      rep.max_shape_rank = std::max(rep.max_shape_rank, sr);
      const Vec psi = gauss_parametrize(gd, gp, t);
      rep.support_residual =
          worst_of(rep.support_residual, std::abs(gd.product(psi, N) - gd.chart().eps() * gp.gamma));
      rep.normal_alignment =
          worst_of(rep.normal_alignment, std::abs(std::abs(gd.product(N, gp.h)) - 1.0));
      const double an = A.norm();
      if (an > 0)
        for (int a = d; a < n; ++a)
          rep.fiber_annihilation = worst_of(rep.fiber_annihilation, A.col(a).norm() / an);
      const Mat gP = gp.metric * p_operator(gp, t);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const double second = -gd.product(dN.col(a), J.col(b));
          rep.p_consistency = worst_of(rep.p_consistency, std::abs(second + gP(a, b)));
        }
    }
  }
  return rep;
}

}  // namespace gdef
