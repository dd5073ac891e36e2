#pragma once

// Deformation data attached to a parallel section phi: the 1-forms phi_ij,
// the structural residuals they must satisfy, the normal bundle data and the
// integration of the deformed immersion by a moving frame.

#include <string>
#include <vector>

#include "gdef/chart.hpp"
#include "gdef/gauss.hpp"
#include "gdef/sbrana.hpp"

namespace gdef {

// c[i][j](r) = phi_ij(d_r).
struct PhiForms {
  std::vector<std::vector<VectorC>> c;
};

// Derivatives d_r phi_i prescribed by the parallel-section equations; row r.
MatrixC section_derivative(const ConjugateChart& chart, const Point& u, const VectorC& phi);

// dphi(r, i) = d_r phi_i; when null the section equations supply it.
// Throws ZeroPhi.
PhiForms phi_forms(const ConjugateChart& chart, const Point& u, const VectorC& phi,
                   const MatrixC* dphi = nullptr);

struct FormIdentities {
  double antisymmetry = 0.0;  // max |phi_ij + phi_ji|, i != j
  double sum_identity = 0.0;  // max |sum_k phi_k phi_ik|
  double support = 0.0;       // max |phi_ij(d_r)|, r not in {i, j}
};
FormIdentities form_identities(const PhiForms& forms, const VectorC& phi);

// Fourth-order finite differences of a field on the grid, converted to the
// coordinate derivatives d_i. Row r of the result holds d_r of every component.
// Needs at least five nodes on every axis.
MatrixC grid_derivative(const ConjugateChart& chart, const Grid& grid,
                        const std::vector<VectorC>& values, std::size_t flat);

struct SectionResidual {
  double off_diagonal = 0.0;  // d_i phi_j - 2 Gamma_ij^j phi_j, i != j
  double diagonal = 0.0;      // d_i phi_i + 2 sum_j Gamma_ij^j phi_j
  bool flagged = false;
  double max() const { return std::max(off_diagonal, diagonal); }
};
SectionResidual section_residual(const ConjugateChart& chart, const Grid& grid,
                                 const std::vector<VectorC>& values, double tol = 1e-6);

struct DeformationPackage {
  DeformationPackage(ConjugateChart c, Grid g) : chart(std::move(c)), grid(std::move(g)) {}
  ConjugateChart chart;
  Grid grid;
  std::vector<double> basepoint;  // empty: the first grid node
  VectorC phi_base;              // value at the basepoint
  std::vector<VectorC> phi;      // per grid node
  bool admissible = false;   // at every node
  std::string admissibility_failure;
  int index = -1;            // constant over the grid when admissible
  bool index_constant = true;
  double sweep_residual = 0.0;
};
// Extends phi_q over the grid by parallel transport and checks admissibility.
DeformationPackage build_package(const ConjugateChart& chart, const Grid& grid, const VectorC& phi_q,
                                 const std::vector<double>& basepoint,
                                 const TransportOptions& opts = {});
// Wraps an externally supplied field.
DeformationPackage package_from_field(const ConjugateChart& chart, const Grid& grid,
                                      std::vector<VectorC> field);

struct ConditionReport {
  double q_gamma = -1.0;               // support equation Q(gamma)
  double hessian_commutation = -1.0;   // (d_ij - d_ik)(Hess_jk + gamma g_jk)
  double alpha_offdiagonal = -1.0;     // |d_ij - d_ik| |alpha^h(d_j, d_k)|
  double codazzi = 0.0;
  double ricci = 0.0;
  double sum_identity = 0.0;
  double antisymmetry = 0.0;
  double section = 0.0;
  std::vector<std::string> skipped;  // items needing h or gamma when absent
  // Largest residual other than Ricci (skipped items count as 0).
  double max_without_ricci() const;
  double max() const;
};
ConditionReport verify_conditions(const DeformationPackage& pkg);

struct NormalData {
  int dropped = 0;        // index k0 whose class is expressed through the others
  MatrixC metric;         // p x p, basis [e_i], i != k0
  std::vector<MatrixC> connection;  // per direction r: column i = nabla_r [e_i] in the basis
  VectorC second_form;    // <A d_i, d_i>, the coefficient of [e_i]
  int plus = 0, minus = 0;
};
// Throws ZeroPhi, ZeroShapeValue.
NormalData build_normal_data(const ConjugateChart& chart, const Point& u, const VectorC& phi,
                             const VectorC& shape, const MatrixC* dphi = nullptr);

struct ImmersionOptions {
  TransportOptions transport{0.05, 1e-8};
  double integrability_gate = 1e-7;
  std::vector<double> fiber_offsets{0.0, 0.1, -0.1};
  double fd_step = 1e-3;  // normal-frame derivatives
};

struct ImmersionResult {
  Grid grid;
  int ambient_dim = 0;
  Eigen::VectorXd signature;  // diagonal of the target product, positives first
  int index = 0;              // number of negative entries
  // One row per (node, fiber offset): base parameters, fiber coordinates, point.
  Mat samples;
  std::vector<Vec> positions;  // g(x, 0) per node
  double pullback_residual = 0.0;
  double sweep_residual = 0.0;
  double flatness_residual = 0.0;
  double gauss_identity_residual = 0.0;
  double frame_drift = 0.0;
  double error_estimate = 0.0;
  ConditionReport conditions;
};

// Throws IntegrabilityTooPoor, NotSupported (hyperbolic ambient), StepFailure.
ImmersionResult integrate_immersion(const GaussData& gd, const DeformationPackage& pkg,
                                    const ImmersionOptions& opts = {});

// The frame system with a single normal, which rebuilds the undeformed
// hypersurface up to a rigid motion.
ImmersionResult integrate_rigid(const GaussData& gd, const Grid& grid,
                                const std::vector<double>& basepoint,
                                const ImmersionOptions& opts = {});

// Max distance after the best rigid motion mapping the rows of a onto b.
double procrustes_residual(const Mat& a, const Mat& b);

}  // namespace gdef
