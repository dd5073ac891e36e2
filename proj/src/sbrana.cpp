#include "gdef/sbrana.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gdef/errors.hpp"
#include "gdef/residual.hpp"
#include "gdef/ode.hpp"

namespace gdef {

namespace {

using JetMatrix = std::vector<std::vector<Jet>>;

JetMatrix zeros(int rows, int cols, const std::shared_ptr<const JetLayout>& layout) {
  return JetMatrix(rows, std::vector<Jet>(cols, Jet(layout, 0.0)));
}

MatrixC values_of(const JetMatrix& m, int cols) {
  MatrixC out(static_cast<int>(m.size()), cols);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (int c = 0; c < cols; ++c) out(static_cast<int>(r), c) = m[r][c].value();
  return out;
}

std::vector<JetMatrix> jet_b_stack(const ConjugateChart& chart, const Point& u, int depth, int order) {
  const int d = chart.dims();
  if (order < depth + 1)
    throw JetOrderTooLow("B_" + std::to_string(depth) + " needs jets of order " +
                         std::to_string(depth + 1) + ", configured " + std::to_string(order));
  auto layout = JetLayout::get(d, order);
  const ChartJets cj = chart_jets(chart, u, order);
  auto G = [&](int a, int b) -> const Jet& { return cj.christoffel[a][b]; };

  std::vector<JetMatrix> omega;
  for (int r = 0; r < d; ++r) {
    JetMatrix w = zeros(d, d, layout);
    for (int j = 0; j < d; ++j) {
      if (j == r) continue;
      w[j][j] = G(r, j) * cd(-2.0);
      w[r][j] = G(r, j) * cd(2.0);
    }
    omega.push_back(std::move(w));
  }

  JetMatrix b0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      std::vector<Jet> row;
      for (int k = 0; k < d; ++k) {
        if (k == i)
          row.push_back(G(j, i).derivative(i) - G(j, i) * G(i, j) * cd(2.0));
        else if (k == j)
          row.push_back(G(i, j).derivative(j) - G(j, i) * G(i, j) * cd(2.0));
        else
          row.push_back(G(j, k).derivative(i) + G(i, k) * G(j, k) * cd(2.0) -
                        G(i, k) * G(j, i) * cd(2.0) - G(j, k) * G(i, j) * cd(2.0));
      }
      b0.push_back(std::move(row));
    }

  std::vector<JetMatrix> stack{b0};
  for (int n = 0; n < depth; ++n) {
    const JetMatrix& prev = stack.back();
    JetMatrix next;
    for (int r = 0; r < d; ++r)
      for (const auto& row : prev) {
        std::vector<Jet> out;
        for (int c = 0; c < d; ++c) {
          Jet acc = row[c].derivative(r);
          for (int m = 0; m < d; ++m) acc -= row[m] * omega[r][m][c];
          out.push_back(std::move(acc));
        }
        next.push_back(std::move(out));
      }
    stack.push_back(std::move(next));
  }
  return stack;
}

MatrixC stack_rows(const std::vector<MatrixC>& blocks) {
  int rows = 0;
  const int cols = blocks.empty() ? 0 : static_cast<int>(blocks[0].cols());
  for (auto& b : blocks) rows += static_cast<int>(b.rows());
  MatrixC out(rows, cols);
  int r = 0;
  for (auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += static_cast<int>(b.rows());
  }
  return out;
}

VectorC conj_permute(const ConjugateChart& chart, const VectorC& v) {
  VectorC w(v.size());
  for (int i = 0; i < v.size(); ++i) w(chart.conj(i)) = std::conj(v(i));
  return w;
}

double score(const VectorC& v) {
  const double n = v.norm();
  if (n == 0.0) return 0.0;
  double s = std::abs(v.sum()) / n;
  for (int i = 0; i < v.size(); ++i) s = std::min(s, std::abs(v(i)) / n);
  return s;
}

}  // namespace

std::vector<MatrixC> omega_matrices(const ConjugateChart& chart, const Point& u) {
  const int d = chart.dims();
  const ChartValues cv = chart_values(chart, u);
  std::vector<MatrixC> out;
  for (int r = 0; r < d; ++r) {
    MatrixC w = MatrixC::Zero(d, d);
    for (int j = 0; j < d; ++j) {
      if (j == r) continue;
      w(j, j) = -2.0 * cv.christoffel(r, j);
      w(r, j) = 2.0 * cv.christoffel(r, j);
    }
    out.push_back(w);
  }
  return out;
}

MatrixC omega_along(const ConjugateChart& chart, const Point& u, const VectorC& c) {
  const int d = chart.dims();
  const ChartValues cv = chart_values(chart, u);
  MatrixC w = MatrixC::Zero(d, d);
  for (int r = 0; r < d; ++r) {
    if (c(r) == cd(0.0)) continue;
    for (int j = 0; j < d; ++j) {
      if (j == r) continue;
      w(j, j) -= 2.0 * c(r) * cv.christoffel(r, j);
      w(r, j) += 2.0 * c(r) * cv.christoffel(r, j);
    }
  }
  return w;
}

double omega_conjugation_residual(const ConjugateChart& chart, const std::vector<Point>& points) {
  const int d = chart.dims();
  double worst = 0.0;
  for (const auto& u : points) {
    const auto w = omega_matrices(chart, u);
    const auto wb = omega_matrices(chart, chart.conjugate(u));
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          worst = worst_of(worst, std::abs(wb[chart.conj(i)](chart.conj(a), chart.conj(b)) -
                                           std::conj(w[i](a, b))));
  }
  return worst;
}

std::vector<MatrixC> b_matrices(const ConjugateChart& chart, const Point& u, int depth, int jet_order) {
  const int order = jet_order < 0 ? chart.p() + 2 : jet_order;
  const auto jets = jet_b_stack(chart, u, depth, order);
  std::vector<MatrixC> out;
  for (const auto& m : jets) out.push_back(values_of(m, chart.dims()));
  return out;
}

MatrixC conjugation_real_form(const ConjugateChart& chart, const MatrixC& basis, double tol) {
  const int d = chart.dims();
  if (basis.cols() == 0) return MatrixC(d, 0);
  std::vector<VectorC> cand;
  for (int k = 0; k < basis.cols(); ++k) {
    const VectorC v = basis.col(k);
    const VectorC cv = conj_permute(chart, v);
    cand.push_back(v + cv);
    cand.push_back(cd(0.0, 1.0) * (v - cv));
  }
  // Real coordinates of a fixed vector: entries at real indices are real and
  // a pair (a, b) is determined by the complex entry at a.
  Eigen::MatrixXd real(2 * d, static_cast<int>(cand.size()));
  for (std::size_t k = 0; k < cand.size(); ++k)
    for (int i = 0; i < d; ++i) {
      real(2 * i, static_cast<int>(k)) = cand[k](i).real();
      real(2 * i + 1, static_cast<int>(k)) = cand[k](i).imag();
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(real, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > tol * std::max(1.0, sv(0))) ++rank;
  MatrixC out(d, rank);
  for (int k = 0; k < rank; ++k)
    for (int i = 0; i < d; ++i) out(i, k) = cd(svd.matrixU()(2 * i, k), svd.matrixU()(2 * i + 1, k));
  return out;
}

SbranaHolonomy trivial_holonomy(const ConjugateChart& chart, const std::vector<double>& basepoint,
                                const HolonomyOptions& opts) {
  const int d = chart.dims();
  const int p = chart.p();
  if (p < 1) throw WrongDimension("the holonomy needs p >= 1");
  SbranaHolonomy h;
  h.basepoint = basepoint;
  const Point u = chart.coords(basepoint);
  const int order = opts.jet_order < 0 ? p + 2 : opts.jet_order;
  const bool extra = order >= p + 2;
  const auto jets = jet_b_stack(chart, u, extra ? p + 1 : p, order);
  std::vector<MatrixC> all;
  for (const auto& m : jets) all.push_back(values_of(m, d));
  h.b_stack.assign(all.begin(), all.begin() + p + 1);

  const MatrixC stack = stack_rows(h.b_stack);
  if (!stack.allFinite()) throw DegenerateStack("curvature stack has non-finite entries");
  Eigen::JacobiSVD<MatrixC> svd(stack, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  for (int k = 0; k < sv.size(); ++k) h.singular_values.push_back(sv(k));
  const double smax = sv.size() ? sv(0) : 0.0;
  h.threshold = std::max(opts.tol_abs, opts.tol_rel * smax);
  int brank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > h.threshold) ++brank;
  h.rank = d - brank;
  h.kernel = svd.matrixV().rightCols(h.rank);
  h.species = p + 2 - h.rank;
  h.real_kernel = conjugation_real_form(chart, h.kernel);

  for (int k = 0; k < h.rank; ++k) {
    const VectorC v = h.kernel.col(k);
    for (const auto& b : h.b_stack) {
      const double nb = b.norm();
      if (nb > 0.0) h.annihilation = worst_of(h.annihilation, (b * v).norm() / (nb * v.norm()));
    }
  }
  if (extra) {
    const MatrixC longer = stack_rows(all);
    Eigen::JacobiSVD<MatrixC> svd2(longer);
    const auto& sv2 = svd2.singularValues();
    const double thr2 = std::max(opts.tol_abs, opts.tol_rel * (sv2.size() ? sv2(0) : 0.0));
    int brank2 = 0;
    for (int k = 0; k < sv2.size(); ++k)
      if (sv2(k) > thr2) ++brank2;
    h.stable_next_level = (d - brank2) == h.rank;
  }

  // genericity witness over the real form
  const int r = static_cast<int>(h.real_kernel.cols());
  if (r > 0) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd best = Eigen::VectorXd::Zero(r);
    double best_score = -1.0;
    auto eval = [&](const Eigen::VectorXd& c) { return score(h.real_kernel * c.cast<cd>()); };
    for (int s = 0; s < opts.witness_samples; ++s) {
      Eigen::VectorXd c(r);
      for (int k = 0; k < r; ++k) c(k) = gauss(rng);
      const double sc = eval(c);
      if (sc > best_score) best_score = sc, best = c;
    }
    for (double step = 0.5; step > 1e-6; step *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (int k = 0; k < r; ++k)
          for (double sgn : {1.0, -1.0}) {
            Eigen::VectorXd c = best;
            c(k) += sgn * step * best.norm();
            const double sc = eval(c);
            if (sc > best_score + 1e-15) best_score = sc, best = c, improved = true;
          }
      }
    }
    h.witness_score = best_score;
    h.generic = best_score >= opts.witness_threshold;
    VectorC w = h.real_kernel * best.cast<cd>();
    if (h.generic) w *= -1.0 / w.sum();
    h.witness = w;
  }

  // cross-check: transport the kernel to a nearby point and re-test there
  if (h.rank > 0) {
    std::vector<double> other = basepoint;
    for (double& x : other) x += opts.cross_check_offset;
    const auto b_other = b_matrices(chart, chart.coords(other), p, order);
    for (int k = 0; k < h.rank; ++k) {
      const TransportResult tr = parallel_transport(chart, h.kernel.col(k), {basepoint, other});
      for (const auto& b : b_other) {
        const double nb = b.norm();
        if (nb > 0.0)
          h.cross_check_residual =
              worst_of(h.cross_check_residual, (b * tr.phi).norm() / (nb * tr.phi.norm()));
      }
    }
  }
  return h;
}

TransportResult parallel_transport(const ConjugateChart& chart, const VectorC& phi,
                                   const std::vector<std::vector<double>>& path,
                                   const TransportOptions& opts) {
  TransportResult out;
  out.phi = phi;
  const MatrixC W = chart.direction_weights();
  const int d = chart.dims();
  for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
    const auto& a = path[seg];
    const auto& b = path[seg + 1];
    Eigen::VectorXd delta(d);
    for (int k = 0; k < d; ++k) delta(k) = b[k] - a[k];
    const double len = delta.norm();
    if (len == 0.0) continue;
    const VectorC c = W.transpose() * delta.cast<cd>();
    auto rhs = [&](double s, const VectorC& y) -> VectorC {
      std::vector<double> t(d);
      for (int k = 0; k < d; ++k) t[k] = a[k] + s * delta(k);
      return -(omega_along(chart, chart.coords(t), c) * y);
    };
    const HalvedStep st = rk4_refined(rhs, out.phi, 0.0, 1.0, steps_for(len, opts.max_step), opts.tol);
    out.error_estimate = worst_of(out.error_estimate, st.error);
    out.phi = st.y;
  }
  out.sum_drift = std::abs(out.phi.sum() - phi.sum());
  if (!(out.error_estimate <= opts.tol * std::max(1.0, out.phi.norm())))
    throw StepFailure("step-halving disagreement " + short_number(out.error_estimate));
  return out;
}

namespace {

// Fills values at all nodes by transporting along the axes in the given order.
void sweep(const ConjugateChart& chart, const Grid& grid, const std::vector<int>& order,
           std::size_t level, std::vector<double> t, const VectorC& phi, std::vector<int>& idx,
           std::vector<VectorC>& out, double& err, const TransportOptions& opts) {
  if (level == order.size()) {
    out[grid.flatten(idx)] = phi;
    return;
  }
  const int axis = order[level];
  const int n = grid.n[axis];
  // first node at or above the current coordinate
  int start = 0;
  while (start < n && grid.coordinate(axis, start) < t[axis] - 1e-14) ++start;
  auto walk = [&](int from, int to, int dir) {
    std::vector<double> cur = t;
    VectorC val = phi;
    for (int k = from; dir > 0 ? k < to : k > to; k += dir) {
      std::vector<double> next = cur;
      next[axis] = grid.coordinate(axis, k);
      const TransportResult tr = parallel_transport(chart, val, {cur, next}, opts);
      err = worst_of(err, tr.error_estimate);
      val = tr.phi;
      cur = next;
      idx[axis] = k;
      sweep(chart, grid, order, level + 1, cur, val, idx, out, err, opts);
    }
  };
  walk(start, n, 1);
  walk(start - 1, -1, -1);
}

}  // namespace

SectionField extend_section(const ConjugateChart& chart, const Grid& grid, const VectorC& phi_q,
                            const std::vector<double>& basepoint, const TransportOptions& opts,
                            double residual_tol) {
  SectionField sf;
  sf.grid = grid;
  const int d = chart.dims();
  std::vector<int> forward(d), backward(d);
  for (int k = 0; k < d; ++k) forward[k] = k, backward[k] = d - 1 - k;
  std::vector<VectorC> a(grid.size()), b(grid.size());
  std::vector<int> idx(d, 0);
  sweep(chart, grid, forward, 0, basepoint, phi_q, idx, a, sf.error_estimate, opts);
  sweep(chart, grid, backward, 0, basepoint, phi_q, idx, b, sf.error_estimate, opts);
  for (std::size_t f = 0; f < grid.size(); ++f)
    sf.sweep_residual = worst_of(sf.sweep_residual, max_abs(a[f] - b[f]));
  sf.values = std::move(a);
  sf.flagged = sf.sweep_residual > residual_tol;
  return sf;
}

}  // namespace gdef
