#pragma once

// Connection d + omega on the trivial bundle C^{p+1}, its curvature stack,
// the maximal flat parallel subbundle and parallel transport.

#include <cstdint>
#include <vector>

#include "gdef/chart.hpp"

namespace gdef {

// omega[i]: column j is the image of e_j under omega(d_i).
std::vector<MatrixC> omega_matrices(const ConjugateChart& chart, const Point& u);
// Combination sum_i c_i omega_i for a tangent vector with coordinate weights c.
MatrixC omega_along(const ConjugateChart& chart, const Point& u, const VectorC& c);
// Equivariance residual max |omega_{conj i}(conj u) - C conj(omega_i(u)) C|.
double omega_conjugation_residual(const ConjugateChart& chart, const std::vector<Point>& points);

// B_0..B_depth at a point; B_0 has one row per pair i < j.
// jet_order < 0 selects p + 2.
std::vector<MatrixC> b_matrices(const ConjugateChart& chart, const Point& u, int depth,
                                int jet_order = -1);

struct HolonomyOptions {
  double tol_rel = 1e-8;
  double tol_abs = 1e-12;
  int jet_order = -1;
  double witness_threshold = 1e-3;
  int witness_samples = 256;
  std::uint64_t seed = 1;
  // Offset of the cross-check point in real parameters.
  double cross_check_offset = 0.05;
};

struct SbranaHolonomy {
  std::vector<double> basepoint;  // real parameters
  std::vector<MatrixC> b_stack;   // B_0..B_p
  std::vector<double> singular_values;
  double threshold = 0.0;
  MatrixC kernel;       // orthonormal complex basis, one column per vector
  MatrixC real_kernel;  // basis of the conjugation-fixed real form
  int rank = 0;
  int species = 0;
  bool generic = false;
  VectorC witness;  // normalised so that its coordinates sum to -1 when generic
  double witness_score = 0.0;
  // max over kernel vectors and levels of |B_n v| / (|B_n| |v|), |B_n| = 0 counted as 0
  double annihilation = 0.0;
  bool stable_next_level = true;  // B_{p+1} does not shrink the kernel
  double cross_check_residual = 0.0;
};

SbranaHolonomy trivial_holonomy(const ConjugateChart& chart, const std::vector<double>& basepoint,
                                const HolonomyOptions& opts = {});

// Real form of a conjugation-closed complex subspace (columns).
MatrixC conjugation_real_form(const ConjugateChart& chart, const MatrixC& basis, double tol = 1e-9);

struct TransportOptions {
  double max_step = 0.02;
  double tol = 1e-8;  // step-halving gate, relative to max(1, |phi|)
};

struct TransportResult {
  VectorC phi;
  double error_estimate = 0.0;
  double sum_drift = 0.0;
};

// Transport along a polyline of real-parameter points.
TransportResult parallel_transport(const ConjugateChart& chart, const VectorC& phi,
                                   const std::vector<std::vector<double>>& path,
                                   const TransportOptions& opts = {});

struct SectionField {
  Grid grid;
  std::vector<VectorC> values;  // per grid node
  double sweep_residual = 0.0;
  double error_estimate = 0.0;
  bool flagged = false;
};

SectionField extend_section(const ConjugateChart& chart, const Grid& grid, const VectorC& phi_q,
                            const std::vector<double>& basepoint, const TransportOptions& opts = {},
                            double residual_tol = 1e-6);

}  // namespace gdef
