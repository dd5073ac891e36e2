#include "gdef/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gdef/errors.hpp"
#include "gdef/residual.hpp"

namespace gdef {

Admissibility is_admissible(const VectorC& phi, const std::vector<int>& conj, double tol) {
  Admissibility a;
  a.min_abs = phi.size() ? phi.cwiseAbs().minCoeff() : 0.0;
  for (int i = 0; i < phi.size(); ++i)
    a.conjugation_defect = worst_of(a.conjugation_defect, std::abs(phi(conj[i]) - std::conj(phi(i))));
  a.sum_defect = std::abs(1.0 + phi.sum());
  if (a.conjugation_defect > tol)
    a.failure = "entries are not conjugation symmetric";
  else if (a.min_abs <= tol)
    a.failure = "an entry vanishes";
  else if (a.sum_defect > tol)
    a.failure = "1 + sum of entries is not zero";
  a.admissible = a.failure.empty();
  return a;
}

IndexCounts index_of(const VectorC& phi, const std::vector<int>& conj, double tol) {
  const Admissibility a = is_admissible(phi, conj, tol);
  if (!a.admissible) throw NotAdmissible(a.failure);
  IndexCounts c;
  const int p = static_cast<int>(phi.size()) - 1;
  for (int i = 0; i < phi.size(); ++i) {
    if (conj[i] > i) ++c.s;
    if (conj[i] == i && phi(i).real() > 0.0) ++c.P;
  }
  c.index = p - (c.s + c.P);
  return c;
}

int ambient_index(int index, int p, int eps) { return eps > 0 ? index : p - index; }

DMatrix d_matrix(const VectorC& phi, double singular_tol) {
  const int d = static_cast<int>(phi.size());
  for (int i = 0; i < d; ++i)
    if (phi(i) == cd(0.0)) throw ZeroEntry("phi_" + std::to_string(i) + " is zero");
  DMatrix out;
  out.d = MatrixC::Ones(d, d);
  for (int i = 0; i < d; ++i) out.d(i, i) += 1.0 / phi(i);
  out.det_closed = (1.0 + phi.sum()) / phi.prod();
  out.det_numeric = out.d.partialPivLu().determinant();
  Eigen::JacobiSVD<MatrixC> svd(out.d, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > singular_tol * std::max(1.0, sv(0))) ++rank;
  out.kernel = svd.matrixV().rightCols(d - rank);
  return out;
}

MatrixC d_inverse_closed(const VectorC& phi, InverseForm form) {
  const int d = static_cast<int>(phi.size());
  for (int i = 0; i < d; ++i)
    if (phi(i) == cd(0.0)) throw ZeroEntry("phi_" + std::to_string(i) + " is zero");
  const cd denom = 1.0 + phi.sum();
  if (std::abs(denom) < 1e-14) throw Singular("1 + sum phi vanishes");
  MatrixC inv(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const cd num = form == InverseForm::ProductNumerator ? phi(i) * phi(j) : phi(i) * phi(i);
      inv(i, j) = (i == j ? phi(i) : cd(0.0)) - num / denom;
    }
  return inv;
}

DInverseCheck d_inverse(const VectorC& phi, double tol) {
  const int d = static_cast<int>(phi.size());
  const MatrixC D = d_matrix(phi).d;
  const MatrixC I = MatrixC::Identity(d, d);
  DInverseCheck c;
  const MatrixC prod = d_inverse_closed(phi, InverseForm::ProductNumerator);
  const MatrixC sq = d_inverse_closed(phi, InverseForm::SquareNumerator);
  c.product_residual = (D * prod - I).cwiseAbs().maxCoeff();
  c.square_residual = (D * sq - I).cwiseAbs().maxCoeff();
  if (c.product_residual <= tol) {
    c.inverse = prod, c.verified = InverseForm::ProductNumerator, c.ok = true;
  } else if (c.square_residual <= tol) {
    c.inverse = sq, c.verified = InverseForm::SquareNumerator, c.ok = true;
  } else {
    c.inverse = prod;
  }
  return c;
}

MatrixC adapted_real_basis(const VectorC& phi, const std::vector<int>& conj) {
  const int d = static_cast<int>(phi.size());
  MatrixC xi = MatrixC::Zero(d, d);
  const double r2 = std::sqrt(2.0);
  for (int a = 0; a < d; ++a) {
    const int b = conj[a];
    if (b == a) {
      xi(a, a) = std::sqrt(std::abs(phi(a)));
    } else if (b > a) {
      const cd w = std::sqrt(phi(a));
      xi(a, a) = w / r2;
      xi(b, a) = std::conj(w) / r2;
      xi(a, b) = cd(0.0, 1.0) * w / r2;
      xi(b, b) = std::conj(cd(0.0, 1.0) * w) / r2;
    }
  }
  return xi;
}

Signature quotient_signature(const VectorC& phi, const std::vector<int>& conj, double tol) {
  const Admissibility a = is_admissible(phi, conj, tol);
  if (!a.admissible) throw NotAdmissible(a.failure);
  const int d = static_cast<int>(phi.size());
  const MatrixC xi = adapted_real_basis(phi, conj);
  const MatrixC D = d_matrix(phi).d;
  // The product is real on the real form; drop the rounding residue.
  const Eigen::MatrixXd gram = (xi.transpose() * D * xi).real();
  // Kernel direction phi in the adapted basis.
  const Eigen::VectorXd ker = xi.fullPivLu().solve(phi).real().normalized();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  int drop = 0;
  double best = -1.0;
  for (int k = 0; k < d; ++k) {
    const double align = std::abs(es.eigenvectors().col(k).dot(ker));
    if (align > best) best = align, drop = k;
  }
  Signature s;
  for (int k = 0; k < d; ++k) {
    if (k == drop) continue;
    const double ev = es.eigenvalues()(k);
    s.eigenvalues.push_back(ev);
    if (ev > 0) ++s.plus;
    else ++s.minus;
  }
  return s;
}

ModuliDescription moduli_space(const ConjugateChart& chart, const SbranaHolonomy& holonomy,
                               const ModuliOptions& opts) {
  ModuliDescription md;
  const int d = chart.dims();
  const MatrixC& K = holonomy.real_kernel;
  const int r = static_cast<int>(K.cols());
  if (r == 0) return md;
  // Points of the real form are K c with c real; the sum constraint is s . c = -1.
  Eigen::VectorXd sums(r);
  for (int k = 0; k < r; ++k) sums(k) = K.col(k).sum().real();
  if (sums.norm() < 1e-12) return md;
  const Eigen::VectorXd c0 = -sums / sums.squaredNorm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sums.transpose(), Eigen::ComputeFullV);
  const Eigen::MatrixXd null = svd.matrixV().rightCols(r - 1);
  md.dimension = r - 1;
  md.slice_origin = K * c0.cast<cd>();
  md.slice_directions = K * null.cast<cd>();

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> box(-opts.box, opts.box);
  const auto& conj = chart.conj_map();
  for (int n = 0; n < opts.samples; ++n) {
    ++md.attempts;
    Eigen::VectorXd z(r - 1);
    for (int k = 0; k < r - 1; ++k) z(k) = box(rng);
    const VectorC phi = md.slice_origin.col(0) + md.slice_directions * z.cast<cd>();
    if (phi.cwiseAbs().minCoeff() <= opts.zero_reject) continue;
    const Admissibility a = is_admissible(phi, conj, 1e-8);
    if (!a.admissible) continue;
    const int mu = index_of(phi, conj, 1e-8).index;
    md.samples.push_back({phi, mu});
    ++md.index_histogram[mu];
    if (mu == 0) {
      std::string key;
      for (int i = 0; i < d; ++i)
        if (conj[i] == i) key += phi(i).real() > 0 ? '+' : '-';
        else key += '*';
      ++md.index_zero_buckets[key];
    }
  }
  md.empty = md.samples.empty();
  return md;
}

}  // namespace gdef
