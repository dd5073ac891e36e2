#include "gdef/chart.hpp"

#include <algorithm>
#include <cmath>

#include "gdef/errors.hpp"
#include "gdef/residual.hpp"

namespace gdef {

ConjugateChart::ConjugateChart(int p, std::vector<std::pair<int, int>> pairs, int eps)
    : p_(p), pairs_(std::move(pairs)), eps_(eps) {
  if (p < 0) throw ChartFormatError("p must be non-negative");
  if (eps != 1 && eps != -1) throw ChartFormatError("ambient sign must be +1 or -1");
  conj_.resize(p + 1);
  for (int i = 0; i <= p; ++i) conj_[i] = i;
  for (auto& [a, b] : pairs_) {
    if (a > b) std::swap(a, b);
    if (a < 0 || b > p || a == b) throw ChartFormatError("conjugate pair out of range");
    if (conj_[a] != a || conj_[b] != b) throw ChartFormatError("index used in two conjugate pairs");
    conj_[a] = b;
    conj_[b] = a;
  }
  std::sort(pairs_.begin(), pairs_.end());
  const Expr zero = make_number(0.0);
  christoffel_.assign(p + 1, std::vector<Expr>(p + 1, zero));
  metric_.assign(p + 1, std::vector<Expr>(p + 1, zero));
}

void ConjugateChart::set_christoffel(int j, int i, Expr e) {
  if (i == j || i < 0 || j < 0 || i > p_ || j > p_)
    throw ChartFormatError("Christoffel entry needs two distinct indices in range");
  if (max_variable(e) > p_) throw ChartFormatError("expression uses a coordinate beyond u" + std::to_string(p_));
  christoffel_[j][i] = std::move(e);
}

void ConjugateChart::set_metric(int i, int j, Expr e) {
  if (i < 0 || j < 0 || i > p_ || j > p_) throw ChartFormatError("metric index out of range");
  if (max_variable(e) > p_) throw ChartFormatError("expression uses a coordinate beyond u" + std::to_string(p_));
  metric_[std::min(i, j)][std::max(i, j)] = std::move(e);
}

Eigen::VectorXd ConjugateChart::ambient_metric() const {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(ambient_dim());
  if (ambient_dim() > 0) m(0) = eps_;
  return m;
}

Point ConjugateChart::coords(const std::vector<double>& t) const {
  Point u(t.begin(), t.end());
  for (auto [a, b] : pairs_) {
    u[a] = cd(t[a], t[b]);
    u[b] = cd(t[a], -t[b]);
  }
  return u;
}

MatrixC ConjugateChart::direction_weights() const {
  MatrixC w = MatrixC::Identity(dims(), dims());
  for (auto [a, b] : pairs_) {
    w(a, a) = 1.0;
    w(a, b) = 1.0;
    w(b, a) = cd(0.0, 1.0);
    w(b, b) = cd(0.0, -1.0);
  }
  return w;
}

Point ConjugateChart::conjugate(const Point& u) const {
  Point v(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) v[k] = std::conj(u[conj_[k]]);
  return v;
}

ChartJets chart_jets(const ConjugateChart& chart, const Point& u, int order) {
  const int d = chart.dims();
  auto layout = JetLayout::get(d, order);
  ChartJets cj;
  cj.christoffel.assign(d, std::vector<Jet>(d, Jet(layout, 0.0)));
  cj.metric.assign(d, std::vector<Jet>(d, Jet(layout, 0.0)));
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      if (i != j) cj.christoffel[j][i] = eval_jet(chart.christoffel(j, i), u, layout);
      if (i <= j) {
        cj.metric[i][j] = eval_jet(chart.metric(i, j), u, layout);
        cj.metric[j][i] = cj.metric[i][j];
      }
    }
  return cj;
}

ChartValues chart_values(const ConjugateChart& chart, const Point& u) {
  const int d = chart.dims();
  ChartValues v{MatrixC::Zero(d, d), MatrixC::Zero(d, d)};
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      if (i != j) v.christoffel(j, i) = evaluate(chart.christoffel(j, i), u);
      if (i <= j) v.metric(i, j) = v.metric(j, i) = evaluate(chart.metric(i, j), u);
    }
  return v;
}

std::vector<Point> chart_points(const ConjugateChart& chart, const Grid& grid) {
  std::vector<Point> pts;
  pts.reserve(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) pts.push_back(chart.coords(grid.node(f)));
  return pts;
}

DmzResidualReport dmz_apply(const ConjugateChart& chart, const std::vector<Expr>& field,
                            const std::vector<Point>& points) {
  const int d = chart.dims();
  DmzResidualReport rep;
  rep.points = points;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) rep.pairs.push_back({i, j});
  auto layout = JetLayout::get(d, 2);
  for (const auto& u : points) {
    const ChartValues cv = chart_values(chart, u);
    std::vector<Jet> xi;
    for (const auto& e : field) xi.push_back(eval_jet(e, u, layout));
    std::vector<VectorC> per_pair;
    for (auto [i, j] : rep.pairs) {
      VectorC q(static_cast<int>(field.size()));
      for (std::size_t c = 0; c < field.size(); ++c) {
        q(c) = xi[c].d(i, j) - cv.christoffel(j, i) * xi[c].d(i) -
               cv.christoffel(i, j) * xi[c].d(j) +
               static_cast<double>(chart.eps()) * cv.metric(i, j) * xi[c].value();
      }
      rep.max_norm = worst_of(rep.max_norm, q.size() ? max_abs(q) : 0.0);
      per_pair.push_back(q);
    }
    rep.values.push_back(std::move(per_pair));
  }
  return rep;
}

IntegrabilityResult integrability_residual(const ConjugateChart& chart,
                                           const std::vector<Point>& points) {
  IntegrabilityResult res;
  const int d = chart.dims();
  if (d < 3) {
    res.vacuous = true;
    return res;
  }
  const double eps = chart.eps();
  for (const auto& u : points) {
    const ChartJets cj = chart_jets(chart, u, 1);
    auto G = [&](int a, int b) { return cj.christoffel[a][b].value(); };
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          if (i == j || j == k || i == k) continue;
          const cd r = cj.christoffel[k][j].d(i) + G(k, j) * G(i, j) - G(k, j) * G(i, k) -
                       G(i, j) * G(k, i) + eps * cj.metric[i][k].value();
          res.max_residual = worst_of(res.max_residual, std::abs(r));
        }
  }
  return res;
}

DmzSystem DmzSystem::from_chart(const ConjugateChart& chart) {
  DmzSystem sys;
  sys.dims = chart.dims();
  const Expr zero = make_number(0.0);
  sys.a.assign(sys.dims, std::vector<Expr>(sys.dims, zero));
  sys.b.assign(sys.dims, std::vector<Expr>(sys.dims, zero));
  for (int i = 0; i < sys.dims; ++i)
    for (int j = 0; j < sys.dims; ++j) {
      if (i != j) sys.a[i][j] = make_neg(chart.christoffel(i, j));
      Expr g = chart.metric(i, j);
      sys.b[i][j] = chart.eps() > 0 ? g : make_neg(g);
    }
  return sys;
}

LaplaceInvariants laplace_invariants(const DmzSystem& sys, const Point& u) {
  const int d = sys.dims;
  auto layout = JetLayout::get(d, 1);
  std::vector<std::vector<Jet>> a(d, std::vector<Jet>(d, Jet(layout, 0.0)));
  std::vector<std::vector<cd>> b(d, std::vector<cd>(d, 0.0));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i != j) a[i][j] = eval_jet(sys.a[i][j], u, layout);
      b[i][j] = evaluate(sys.b[i][j], u);
    }
  LaplaceInvariants inv;
  // a[x][y] is the coefficient of d_y in Q_xy; the pair order of the lower
  // indices is immaterial, so a_{kj}^k is a[j][k] and a_{ij}^i is a[j][i].
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      inv.m2[{i, j}] = a[j][i].d(i) + a[j][i].value() * a[i][j].value() - b[i][j];
      for (int k = 0; k < d; ++k) {
        if (k == i || k == j) continue;
        inv.m3[{i, j, k}] = a[j][k].value() - a[j][i].value();
      }
    }
  return inv;
}

double intersection_type_residual(const ConjugateChart& chart, const std::vector<Point>& points) {
  if (chart.p() != 1) throw WrongDimension("intersection type is defined for p = 1");
  if (chart.s() != 0) throw WrongDimension("intersection type needs real coordinates");
  double worst = 0.0;
  for (const auto& u : points) {
    const ChartJets cj = chart_jets(chart, u, 1);
    const cd r = cj.christoffel[0][1].d(1) - cj.christoffel[1][0].value() * cj.christoffel[0][1].value() +
                 static_cast<double>(chart.eps()) * cj.metric[0][1].value();
    worst = worst_of(worst, std::abs(r));
  }
  return worst;
}

GeometricConsistency geometric_consistency(const ConjugateChart& chart,
                                           const std::vector<Point>& points) {
  GeometricConsistency gc;
  if (!chart.has_immersion()) return gc;
  const int d = chart.dims();
  const int na = chart.ambient_dim();
  const Eigen::VectorXd eta = chart.ambient_metric();
  auto layout = JetLayout::get(d, 1);
  for (const auto& u : points) {
    std::vector<Jet> h;
    for (const auto& e : chart.immersion()) h.push_back(eval_jet(e, u, layout));
    cd norm = 0.0;
    for (int c = 0; c < na; ++c) norm += eta(c) * h[c].value() * h[c].value();
    gc.unit_norm = std::max(gc.unit_norm, std::abs(norm - static_cast<double>(chart.eps())));
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        cd gij = 0.0;
        for (int c = 0; c < na; ++c) gij += eta(c) * h[c].d(i) * h[c].d(j);
        gc.metric = worst_of(gc.metric, std::abs(gij - evaluate(chart.metric(i, j), u)));
      }
  }
  gc.dmz = dmz_apply(chart, chart.immersion(), points).max_norm;
  return gc;
}

ConjugationCheck conjugation_check(const ConjugateChart& chart, const std::vector<Point>& points) {
  ConjugationCheck cc;
  const int d = chart.dims();
  for (const auto& u : points) {
    const Point ub = chart.conjugate(u);
    const ChartValues at_u = chart_values(chart, u);
    const ChartValues at_ub = chart_values(chart, ub);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        const int jb = chart.conj(j), ib = chart.conj(i);
        if (i != j)
          cc.christoffel = worst_of(
              cc.christoffel, std::abs(at_ub.christoffel(j, i) - std::conj(at_u.christoffel(jb, ib))));
        cc.metric = worst_of(cc.metric, std::abs(at_ub.metric(i, j) - std::conj(at_u.metric(ib, jb))));
      }
  }
  return cc;
}

}  // namespace gdef
