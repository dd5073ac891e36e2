#include "gdef/deform.hpp"

#include <algorithm>
#include <cmath>

#include "gdef/errors.hpp"
#include "gdef/residual.hpp"
#include "gdef/moduli.hpp"
#include "gdef/ode.hpp"

namespace gdef {

MatrixC section_derivative(const ConjugateChart& chart, const Point& u, const VectorC& phi) {
  const auto w = omega_matrices(chart, u);
  const int d = chart.dims();
  MatrixC out(d, d);
  for (int r = 0; r < d; ++r) out.row(r) = -(w[r] * phi).transpose();
  return out;
}

namespace {

void require_nonzero(const VectorC& phi) {
  for (int i = 0; i < phi.size(); ++i)
    if (std::abs(phi(i)) < 1e-300) throw ZeroPhi("phi_" + std::to_string(i) + " vanishes");
}

// phi_ij(d_r) from Gamma values G(j, i) = Gamma_{ji}^i.
cd form_value(int i, int j, int r, const MatrixC& G, const VectorC& phi, const MatrixC& dphi) {
  if (i == j) return -dphi(r, i) / (2.0 * phi(i) * phi(i));
  if (r == i) return -G(i, j) / phi(i);
  if (r == j) return G(j, i) / phi(j);
  return 0.0;
}

// d_a of phi_ij(d_b) for i != j; dG[a] holds d_a G.
cd form_derivative(int i, int j, int b, int a, const MatrixC& G, const std::vector<MatrixC>& dG,
                   const VectorC& phi, const MatrixC& dphi) {
  if (b == i) return -dG[a](i, j) / phi(i) + G(i, j) * dphi(a, i) / (phi(i) * phi(i));
  if (b == j) return dG[a](j, i) / phi(j) - G(j, i) * dphi(a, j) / (phi(j) * phi(j));
  return 0.0;
}

double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

}  // namespace

PhiForms phi_forms(const ConjugateChart& chart, const Point& u, const VectorC& phi, const MatrixC* dphi) {
  require_nonzero(phi);
  const int d = chart.dims();
  const MatrixC G = chart_values(chart, u).christoffel;
  const MatrixC dp = dphi ? *dphi : section_derivative(chart, u, phi);
  PhiForms f;
  f.c.assign(d, std::vector<VectorC>(d, VectorC::Zero(d)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int r = 0; r < d; ++r) f.c[i][j](r) = form_value(i, j, r, G, phi, dp);
  return f;
}

FormIdentities form_identities(const PhiForms& forms, const VectorC& phi) {
  FormIdentities id;
  const int d = static_cast<int>(phi.size());
  for (int i = 0; i < d; ++i) {
    for (int r = 0; r < d; ++r) {
      cd sum = 0.0;
      for (int k = 0; k < d; ++k) sum += phi(k) * forms.c[i][k](r);
      id.sum_identity = worst_of(id.sum_identity, std::abs(sum));
    }
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      id.antisymmetry = worst_of(id.antisymmetry, max_abs(forms.c[i][j] + forms.c[j][i]));
      for (int r = 0; r < d; ++r)
        if (r != i && r != j) id.support = worst_of(id.support, std::abs(forms.c[i][j](r)));
    }
  }
  return id;
}

MatrixC grid_derivative(const ConjugateChart& chart, const Grid& grid,
                        const std::vector<VectorC>& values, std::size_t flat) {
  const int d = chart.dims();
  const int comps = static_cast<int>(values[flat].size());
  MatrixC dt(d, comps);
  const std::vector<int> idx = grid.unflatten(flat);
  for (int a = 0; a < d; ++a) {
    const int n = grid.n[a];
    if (n < 5) throw WrongDimension("finite differences need five nodes on every axis");
    const double h = grid.step(a);
    auto at = [&](int k) {
      std::vector<int> j = idx;
      j[a] = k;
      return values[grid.flatten(j)];
    };
    const int k = idx[a];
    VectorC der;
    if (k >= 2 && k <= n - 3)
      der = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h);
    else if (k == 0)
      der = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12.0 * h);
    else if (k == 1)
      der = (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h);
    else if (k == n - 1)
      der = (25.0 * at(n - 1) - 48.0 * at(n - 2) + 36.0 * at(n - 3) - 16.0 * at(n - 4) + 3.0 * at(n - 5)) /
            (12.0 * h);
    else
      der = (3.0 * at(n - 1) + 10.0 * at(n - 2) - 18.0 * at(n - 3) + 6.0 * at(n - 4) - at(n - 5)) /
            (12.0 * h);
    dt.row(a) = der.transpose();
  }
  // d/dt_a = sum_i W(a, i) d_i
  return chart.direction_weights().partialPivLu().solve(dt);
}

SectionResidual section_residual(const ConjugateChart& chart, const Grid& grid,
                                 const std::vector<VectorC>& values, double tol) {
  SectionResidual res;
  const int d = chart.dims();
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point u = chart.coords(grid.node(f));
    const MatrixC G = chart_values(chart, u).christoffel;
    const MatrixC dphi = grid_derivative(chart, grid, values, f);
    const VectorC& phi = values[f];
    for (int i = 0; i < d; ++i) {
      cd diag = dphi(i, i);
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        res.off_diagonal = worst_of(res.off_diagonal, std::abs(dphi(i, j) - 2.0 * G(i, j) * phi(j)));
        diag += 2.0 * G(i, j) * phi(j);
      }
      res.diagonal = worst_of(res.diagonal, std::abs(diag));
    }
  }
  res.flagged = res.max() > tol;
  return res;
}

namespace {

void check_admissible(DeformationPackage& pkg) {
  pkg.admissible = true;
  const auto& conj = pkg.chart.conj_map();
  for (const auto& phi : pkg.phi) {
    const Admissibility a = is_admissible(phi, conj, 1e-8);
    if (!a.admissible) {
      pkg.admissible = false;
      pkg.admissibility_failure = a.failure;
      pkg.index = -1;
      return;
    }
    const int mu = index_of(phi, conj, 1e-8).index;
    if (pkg.index < 0) pkg.index = mu;
    else if (mu != pkg.index) pkg.index_constant = false;
  }
}

}  // namespace

DeformationPackage build_package(const ConjugateChart& chart, const Grid& grid, const VectorC& phi_q,
                                 const std::vector<double>& basepoint, const TransportOptions& opts) {
  DeformationPackage pkg(chart, grid);
  pkg.basepoint = basepoint;
  pkg.phi_base = phi_q;
  const SectionField sf = extend_section(chart, grid, phi_q, basepoint, opts);
  pkg.phi = sf.values;
  pkg.sweep_residual = sf.sweep_residual;
  check_admissible(pkg);
  return pkg;
}

DeformationPackage package_from_field(const ConjugateChart& chart, const Grid& grid,
                                      std::vector<VectorC> field) {
  DeformationPackage pkg(chart, grid);
  pkg.phi = std::move(field);
  if (!pkg.phi.empty()) pkg.phi_base = pkg.phi[0];
  check_admissible(pkg);
  return pkg;
}

double ConditionReport::max_without_ricci() const {
  return worst_of({q_gamma, hessian_commutation, alpha_offdiagonal, codazzi, sum_identity,
                   antisymmetry, section, 0.0});
}

double ConditionReport::max() const { return worst_of(max_without_ricci(), ricci); }

ConditionReport verify_conditions(const DeformationPackage& pkg) {
  ConditionReport rep;
  const ConjugateChart& chart = pkg.chart;
  const Grid& grid = pkg.grid;
  const int d = chart.dims();
  const int eps = chart.eps();
  const auto points = chart_points(chart, grid);

  if (chart.has_support()) {
    rep.q_gamma = dmz_apply(chart, {chart.support()}, points).max_norm;
    rep.hessian_commutation = 0.0;
  } else {
    rep.skipped.push_back("q_gamma");
    rep.skipped.push_back("hessian_commutation");
  }
  if (chart.has_immersion()) rep.alpha_offdiagonal = 0.0;
  else rep.skipped.push_back("alpha_offdiagonal");
  const DmzResidualReport alpha =
      chart.has_immersion() ? dmz_apply(chart, chart.immersion(), points) : DmzResidualReport{};

  rep.section = section_residual(chart, grid, pkg.phi).max();

  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point& u = points[f];
    const VectorC& phi = pkg.phi[f];
    require_nonzero(phi);
    const MatrixC dphi = grid_derivative(chart, grid, pkg.phi, f);
    const ChartJets cj = chart_jets(chart, u, 1);
    MatrixC G(d, d), g(d, d);
    std::vector<MatrixC> dG(d, MatrixC::Zero(d, d));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        G(a, b) = cj.christoffel[a][b].value();
        g(a, b) = cj.metric[a][b].value();
        for (int r = 0; r < d; ++r) dG[r](a, b) = cj.christoffel[a][b].d(r);
      }
    MatrixC D = MatrixC::Ones(d, d);
    for (int i = 0; i < d; ++i) D(i, i) += 1.0 / phi(i);
    // d_r d_ij
    auto dD = [&](int r, int i, int j) -> cd {
      return i == j ? -dphi(r, i) / (phi(i) * phi(i)) : cd(0.0);
    };
    auto form = [&](int i, int j, int r) { return form_value(i, j, r, G, phi, dphi); };

    PhiForms forms;
    forms.c.assign(d, std::vector<VectorC>(d, VectorC::Zero(d)));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int r = 0; r < d; ++r) forms.c[i][j](r) = form(i, j, r);
    const FormIdentities id = form_identities(forms, phi);
    rep.sum_identity = worst_of(rep.sum_identity, id.sum_identity);
    rep.antisymmetry = worst_of(rep.antisymmetry, worst_of(id.antisymmetry, id.support));

    if (chart.has_support()) {
      const Jet gam = eval_jet(chart.support(), u, 2);
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          if (j == k) continue;
          const cd hess = gam.d(j, k) - G(k, j) * gam.d(j) - G(j, k) * gam.d(k);
          for (int i = 0; i < d; ++i)
            rep.hessian_commutation = worst_of(
                rep.hessian_commutation, std::abs((D(i, j) - D(i, k)) * (hess + gam.value() * g(j, k))));
        }
    }
    if (chart.has_immersion()) {
      for (std::size_t q = 0; q < alpha.pairs.size(); ++q) {
        const auto [j, k] = alpha.pairs[q];
        const double a = alpha.values[f][q].norm();
        for (int i = 0; i < d; ++i)
          rep.alpha_offdiagonal = worst_of(rep.alpha_offdiagonal, std::abs(D(i, j) - D(i, k)) * a);
      }
    }

    for (int i = 0; i < d; ++i)
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) {
          if (r == s) continue;
          cd c1 = dD(r, i, s) - G(r, s) * (D(i, r) - D(i, s));
          cd c2 = G(s, r) * (D(i, s) - D(i, r)) - dD(s, i, r);
          for (int j = 0; j < d; ++j) {
            c1 -= phi(j) * form(i, j, r) * D(j, s);
            c2 += phi(j) * form(i, j, s) * D(j, r);
          }
          rep.codazzi = worst_of({rep.codazzi, std::abs(c1), std::abs(c2)});
        }

    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int a = 0; a < d; ++a)
          for (int b = a + 1; b < d; ++b) {
            cd lhs = g(a, b) * (D(j, a) * D(i, b) - D(i, a) * D(j, b));
            const cd dform = form_derivative(i, j, b, a, G, dG, phi, dphi) -
                             form_derivative(i, j, a, b, G, dG, phi, dphi);
            cd omega = 0.0;
            for (int k = 0; k < d; ++k)
              omega += phi(k) * (form(i, k, a) * form(j, k, b) - form(i, k, b) * form(j, k, a));
            rep.ricci = worst_of(rep.ricci, std::abs(lhs - dform - omega));
          }
  }
  (void)eps;
  return rep;
}

NormalData build_normal_data(const ConjugateChart& chart, const Point& u, const VectorC& phi,
                             const VectorC& shape, const MatrixC* dphi) {
  require_nonzero(phi);
  const int d = chart.dims();
  for (int i = 0; i < shape.size(); ++i)
    if (std::abs(shape(i)) < 1e-12)
      throw ZeroShapeValue("<A d_" + std::to_string(i) + ", d_" + std::to_string(i) + "> vanishes");
  NormalData nd;
  phi.cwiseAbs().maxCoeff(&nd.dropped);
  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    if (i != nd.dropped) keep.push_back(i);
  const int m = d - 1;
  nd.metric.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) nd.metric(a, b) = 1.0 + (a == b ? 1.0 / phi(keep[a]) : 0.0);
  // coordinates of [e_j] in the kept basis
  auto coords_of = [&](int j) {
    VectorC c = VectorC::Zero(m);
    if (j == nd.dropped) {
      for (int a = 0; a < m; ++a) c(a) = -phi(keep[a]) / phi(nd.dropped);
    } else {
      c(std::find(keep.begin(), keep.end(), j) - keep.begin()) = 1.0;
    }
    return c;
  };
  const PhiForms forms = phi_forms(chart, u, phi, dphi);
  for (int r = 0; r < d; ++r) {
    MatrixC conn = MatrixC::Zero(m, m);
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < d; ++j) conn.col(a) += phi(j) * forms.c[keep[a]][j](r) * coords_of(j);
    nd.connection.push_back(conn);
  }
  nd.second_form = shape;
  const Signature sig = quotient_signature(phi, chart.conj_map(), 1e-8);
  nd.plus = sig.plus;
  nd.minus = sig.minus;
  return nd;
}

namespace {

// Layout of the moving-frame state: vectors of the target space stacked,
// followed by phi.
struct FrameSystem {
  const GaussData& gd;
  bool rigid;
  int d, m, D;  // base dims, fiber dims, target dims
  double fd_step;

  int normals() const { return rigid ? 1 : d; }
  int vectors() const { return d + normals() + m + 1; }
  int tangent(int j) const { return j * D; }
  int normal(int k) const { return (d + k) * D; }
  int fiber(int a) const { return (d + normals() + a) * D; }
  int position() const { return (d + normals() + m) * D; }
  int phi_at() const { return vectors() * D; }
  int size() const { return phi_at() + (rigid ? 0 : d); }

  Eigen::VectorXcd vec(const Eigen::VectorXcd& y, int off) const { return y.segment(off, D); }

  // <d_a nu_alpha, nu_beta> by central differences of the normal frame.
  Mat fiber_connection(const std::vector<double>& x, int a, const Mat& nu) const {
    auto frame = [&](double s) {
      std::vector<double> z = x;
      z[a] += s;
      return gd.normal_frame(z);
    };
    const double h = fd_step;
    const Mat dnu = (-frame(2 * h) + 8 * frame(h) - 8 * frame(-h) + frame(-2 * h)) / (12 * h);
    return dnu.transpose() * gd.eta().asDiagonal() * nu;  // (alpha, beta)
  }

  struct Coefficients {
    GaussPoint gp;
    Mat P0;
    Mat grad_terms;  // (a, alpha) = <alpha^h(d_a, grad gamma), nu_alpha>
    std::vector<Mat> fiber_conn;  // per direction
    std::vector<Mat> B;           // per fiber direction
  };

  Coefficients coefficients(const std::vector<double>& x) const {
    Coefficients c;
    c.gp = gd.at(x);
    c.P0 = p_operator(c.gp, Vec::Zero(m));
    const Vec grad = c.gp.metric_inv * c.gp.dgamma;
    const Mat lnu = gd.eta().asDiagonal() * c.gp.normals;
    c.grad_terms = Mat::Zero(d, m);
    for (int a = 0; a < d; ++a) c.grad_terms.row(a) = (c.gp.HH[a] * grad).transpose() * lnu;
    for (int al = 0; al < m; ++al) c.B.push_back(b_operator(c.gp, Vec::Unit(m, al)));
    return c;
  }

  // Derivative of the state along the coordinate direction a.
  Eigen::VectorXcd rhs(int a, const std::vector<double>& x, const Eigen::VectorXcd& y,
                       const Coefficients& c, const Mat& fconn) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size());
    const GaussPoint& gp = c.gp;
    const Mat lnu = gd.eta().asDiagonal() * gp.normals;
    const Mat second = gp.HH[a].transpose() * lnu;  // (j, alpha) = <d_a d_j h, nu_alpha>
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(D);
      v -= gp.metric(a, j) * vec(y, normal(rigid ? 0 : a));
      for (int k = 0; k < d; ++k) v += gp.christoffel[k](a, j) * vec(y, tangent(k));
      for (int al = 0; al < m; ++al) v += second(j, al) * vec(y, fiber(al));
      out.segment(tangent(j), D) = v;
    }
    if (rigid) {
      out.segment(normal(0), D) = vec(y, tangent(a));
    } else {
      const VectorC phi = y.segment(phi_at(), d);
      const Point u(x.begin(), x.end());
      const MatrixC dphi = section_derivative(gd.chart(), u, phi);
      const MatrixC G = chart_values(gd.chart(), u).christoffel;
      for (int k = 0; k < d; ++k) {
        Eigen::VectorXcd v = (delta(k, a) / phi(k) + 1.0) * vec(y, tangent(a));
        for (int j = 0; j < d; ++j) v += phi(j) * form_value(k, j, a, G, phi, dphi) * vec(y, normal(j));
        out.segment(normal(k), D) = v;
      }
      out.segment(phi_at(), d) = dphi.row(a).transpose();
    }
    for (int al = 0; al < m; ++al) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(D);
      for (int k = 0; k < d; ++k) v -= c.B[al](k, a) * vec(y, tangent(k));
      for (int be = 0; be < m; ++be) v += fconn(al, be) * vec(y, fiber(be));
      out.segment(fiber(al), D) = v;
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(D);
    for (int k = 0; k < d; ++k) v += c.P0(k, a) * vec(y, tangent(k));
    for (int al = 0; al < m; ++al) v += c.grad_terms(a, al) * vec(y, fiber(al));
    out.segment(position(), D) = v;
    return out;
  }

  Eigen::VectorXcd rhs_at(int a, const std::vector<double>& x, const Eigen::VectorXcd& y) const {
    const Coefficients c = coefficients(x);
    return rhs(a, x, y, c, m ? fiber_connection(x, a, c.gp.normals) : Mat());
  }
};

struct SweepState {
  std::vector<Eigen::VectorXcd> values;
  double error = 0.0;
};

void sweep(const FrameSystem& sys, const Grid& grid, const std::vector<int>& order, std::size_t level,
           const std::vector<double>& t, const Eigen::VectorXcd& y, std::vector<int>& idx,
           SweepState& st, const TransportOptions& opts) {
  if (level == order.size()) {
    st.values[grid.flatten(idx)] = y;
    return;
  }
  const int axis = order[level];
  const int n = grid.n[axis];
  int start = 0;
  while (start < n && grid.coordinate(axis, start) < t[axis] - 1e-14) ++start;
  auto walk = [&](int from, int to, int dir) {
    std::vector<double> cur = t;
    Eigen::VectorXcd val = y;
    for (int k = from; dir > 0 ? k < to : k > to; k += dir) {
      const double target = grid.coordinate(axis, k);
      const double len = target - cur[axis];
      if (len != 0.0) {
        const double s0 = cur[axis];
        auto f = [&](double s, const Eigen::VectorXcd& z) {
          std::vector<double> x = cur;
          x[axis] = s0 + s * len;
          return Eigen::VectorXcd(len * sys.rhs_at(axis, x, z));
        };
        const HalvedStep hs = rk4_refined(f, val, 0.0, 1.0, steps_for(len, opts.max_step), opts.tol);
        st.error = worst_of(st.error, hs.error);
        if (!(hs.error <= opts.tol * std::max(1.0, hs.y.cwiseAbs().maxCoeff())))
          throw StepFailure("frame integration: step-halving disagreement " + short_number(hs.error));
        val = hs.y;
      }
      cur[axis] = target;
      idx[axis] = k;
      sweep(sys, grid, order, level + 1, cur, val, idx, st, opts);
    }
  };
  walk(start, n, 1);
  walk(start - 1, -1, -1);
}

SweepState run_sweep(const FrameSystem& sys, const Grid& grid, const std::vector<double>& basepoint,
                     const Eigen::VectorXcd& y0, bool reversed, const TransportOptions& opts) {
  std::vector<int> order(sys.d);
  for (int k = 0; k < sys.d; ++k) order[k] = reversed ? sys.d - 1 - k : k;
  SweepState st;
  st.values.resize(grid.size());
  std::vector<int> idx(sys.d, 0);
  sweep(sys, grid, order, 0, basepoint, y0, idx, st, opts);
  return st;
}

// Real vectors realising a symmetric Gram matrix; columns follow the Gram
// rows, the target product has positive entries first.
void realise(const Mat& gram, Mat& vectors, Vec& signature) {
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const int n = static_cast<int>(gram.rows());
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
  vectors.resize(n, n);
  signature.resize(n);
  for (int r = 0; r < n; ++r) {
    const double ev = es.eigenvalues()(order[r]);
    signature(r) = ev > 0 ? 1.0 : -1.0;
    vectors.row(r) = std::sqrt(std::abs(ev)) * es.eigenvectors().col(order[r]).transpose();
  }
}

ImmersionResult finish(const FrameSystem& sys, const Grid& grid, const std::vector<double>& basepoint,
                       const Eigen::VectorXcd& y0, const Vec& signature,
                       const ImmersionOptions& opts) {
  const GaussData& gd = sys.gd;
  ImmersionResult res;
  res.grid = grid;
  res.ambient_dim = sys.D;
  res.signature = signature;
  res.index = static_cast<int>((signature.array() < 0).count());
  const SweepState a = run_sweep(sys, grid, basepoint, y0, false, opts.transport);
  const SweepState b = run_sweep(sys, grid, basepoint, y0, true, opts.transport);
  res.error_estimate = worst_of(a.error, b.error);
  const int d = sys.d, m = sys.m, D = sys.D;
  const auto eta = signature.asDiagonal();
  std::vector<double> offsets = opts.fiber_offsets;
  if (m == 0) offsets = {0.0};
  res.samples.resize(static_cast<Eigen::Index>(grid.size() * offsets.size()), d + m + D);
  int row = 0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Eigen::VectorXcd& y = a.values[f];
    res.sweep_residual = worst_of(res.sweep_residual, max_abs(y - b.values[f]));
    const auto x = grid.node(f);
    const auto coef = sys.coefficients(x);
    const GaussPoint& gp = coef.gp;
    auto real_vec = [&](int off) -> Vec { return y.segment(off, D).real(); };
    res.positions.push_back(real_vec(sys.position()));

    // frame Gram drift
    const int nv = d + sys.normals() + m;
    Mat frame(D, nv);
    for (int k = 0; k < nv; ++k) frame.col(k) = real_vec(k * D);
    const Mat gram = frame.transpose() * eta * frame;
    Mat expected = Mat::Zero(nv, nv);
    expected.topLeftCorner(d, d) = gp.metric;
    if (sys.rigid) {
      expected(d, d) = 1.0;
    } else {
      const Vec phi = y.segment(sys.phi_at(), d).real();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) expected(d + i, d + j) = 1.0 + (i == j ? 1.0 / phi(i) : 0.0);
    }
    expected.bottomRightCorner(m, m) = Mat::Identity(m, m);
    res.frame_drift = worst_of(res.frame_drift, max_abs(gram - expected));

    // flatness of beta from the integrated normal Gram
    if (!sys.rigid) {
      const Mat S = gp.metric * coef.P0;
      const Mat Ng = gram.block(d, d, d, d);
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
          for (int j = 0; j < d; ++j)
            for (int l = 0; l < d; ++l)
              res.flatness_residual =
                  worst_of(res.flatness_residual,
                           std::abs((S(i, j) * S(k, l) - S(i, l) * S(k, j)) * (Ng(i, k) - 1.0)));
          if (i != k)
            res.gauss_identity_residual = worst_of(
                res.gauss_identity_residual, std::abs(S(i, i) * S(k, k) * Ng(i, k) - S(i, i) * S(k, k)));
        }
    }

    // pullback of the target product against the hypersurface metric
    std::vector<Eigen::VectorXcd> drift(d);
    for (int ax = 0; ax < d; ++ax)
      drift[ax] = sys.rhs(ax, x, y, coef, m ? sys.fiber_connection(x, ax, gp.normals) : Mat());
    for (double s : offsets) {
      const Vec t = Vec::Constant(m, s);
      Mat Jg(D, d + m);
      for (int ax = 0; ax < d; ++ax) {
        Vec col = drift[ax].segment(sys.position(), D).real();
        for (int al = 0; al < m; ++al) col += t(al) * drift[ax].segment(sys.fiber(al), D).real();
        Jg.col(ax) = col;
      }
      for (int al = 0; al < m; ++al) Jg.col(d + al) = real_vec(sys.fiber(al));
      const Mat Jpsi = psi_jacobian(gd, x, t);
      const Mat diff = Jg.transpose() * eta * Jg - Jpsi.transpose() * gd.eta().asDiagonal() * Jpsi;
      res.pullback_residual = worst_of(res.pullback_residual, max_abs(diff));
      Vec point = res.positions.back();
      for (int al = 0; al < m; ++al) point += t(al) * real_vec(sys.fiber(al));
      for (int i = 0; i < d; ++i) res.samples(row, i) = x[i];
      for (int al = 0; al < m; ++al) res.samples(row, d + al) = t(al);
      res.samples.row(row).tail(D) = point.transpose();
      ++row;
    }
  }
  return res;
}

}  // namespace

ImmersionResult integrate_immersion(const GaussData& gd, const DeformationPackage& pkg,
                                    const ImmersionOptions& opts) {
  if (gd.chart().eps() < 0)
    throw NotSupported("integration of deformations is implemented for the sphere only");
  if (!pkg.admissible) throw NotAdmissible("phi is not admissible on the grid: " + pkg.admissibility_failure);
  ConditionReport cond = verify_conditions(pkg);
  if (!(cond.max() <= opts.integrability_gate))
    throw IntegrabilityTooPoor("structural residual " + short_number(cond.max()) + " exceeds gate " +
                               short_number(opts.integrability_gate));
  const int d = gd.dims(), m = gd.fiber_dim();
  FrameSystem sys{gd, false, d, m, gd.n() + gd.p(), opts.fd_step};

  // phi at the basepoint by transport, then the seed frame
  const std::vector<double>& base = pkg.basepoint.empty() ? pkg.grid.node(0) : pkg.basepoint;
  const Vec phi = pkg.phi_base.real();
  const GaussPoint gp = gd.at(base);
  int drop = 0;
  phi.cwiseAbs().maxCoeff(&drop);
  // basis: tangents, normals except the dropped one, fiber vectors
  const int nb = d + (d - 1) + m;
  Mat gram = Mat::Zero(nb, nb);
  gram.topLeftCorner(d, d) = gp.metric;
  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    if (i != drop) keep.push_back(i);
  for (int a = 0; a < d - 1; ++a)
    for (int b = 0; b < d - 1; ++b) gram(d + a, d + b) = 1.0 + (a == b ? 1.0 / phi(keep[a]) : 0.0);
  gram.bottomRightCorner(m, m) = Mat::Identity(m, m);
  Mat vecs;
  Vec sig;
  realise(gram, vecs, sig);

  Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(sys.size());
  for (int j = 0; j < d; ++j) y0.segment(sys.tangent(j), sys.D) = vecs.col(j).cast<cd>();
  Vec dropped = Vec::Zero(sys.D);
  for (int a = 0; a < d - 1; ++a) {
    y0.segment(sys.normal(keep[a]), sys.D) = vecs.col(d + a).cast<cd>();
    dropped -= phi(keep[a]) / phi(drop) * vecs.col(d + a);
  }
  y0.segment(sys.normal(drop), sys.D) = dropped.cast<cd>();
  for (int al = 0; al < m; ++al) y0.segment(sys.fiber(al), sys.D) = vecs.col(2 * d - 1 + al).cast<cd>();
  y0.segment(sys.phi_at(), d) = phi.cast<cd>();

  ImmersionResult res = finish(sys, pkg.grid, base, y0, sig, opts);
  res.conditions = cond;
  return res;
}

ImmersionResult integrate_rigid(const GaussData& gd, const Grid& grid, const std::vector<double>& basepoint,
                                const ImmersionOptions& opts) {
  if (gd.chart().eps() < 0)
    throw NotSupported("integration of deformations is implemented for the sphere only");
  const int d = gd.dims(), m = gd.fiber_dim();
  FrameSystem sys{gd, true, d, m, gd.n() + 1, opts.fd_step};
  const GaussPoint gp = gd.at(basepoint);
  const int nb = d + 1 + m;
  Mat gram = Mat::Zero(nb, nb);
  gram.topLeftCorner(d, d) = gp.metric;
  gram(d, d) = 1.0;
  gram.bottomRightCorner(m, m) = Mat::Identity(m, m);
  Mat vecs;
  Vec sig;
  realise(gram, vecs, sig);
  Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(sys.size());
  for (int k = 0; k < nb; ++k) y0.segment(k * sys.D, sys.D) = vecs.col(k).cast<cd>();
  return finish(sys, grid, basepoint, y0, sig, opts);
}

double procrustes_residual(const Mat& a, const Mat& b) {
  const Vec ma = a.colwise().mean().transpose();
  const Vec mb = b.colwise().mean().transpose();
  const Mat ac = a.rowwise() - ma.transpose();
  const Mat bc = b.rowwise() - mb.transpose();
  Eigen::JacobiSVD<Mat> svd(ac.transpose() * bc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat R = svd.matrixV() * svd.matrixU().transpose();
  double worst = 0.0;
  for (int r = 0; r < a.rows(); ++r)
    worst = worst_of(worst, (R * ac.row(r).transpose() - bc.row(r).transpose()).norm());
  return worst;
}

}  // namespace gdef
