#pragma once

// Admissible tuples, the matrix d_ij = 1 + delta_ij / phi_i, its closed forms,
// the index of a tuple and the moduli sets over the trivial holonomy.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gdef/chart.hpp"
#include "gdef/sbrana.hpp"

namespace gdef {

struct Admissibility {
  bool admissible = false;
  double conjugation_defect = 0.0;  // max |phi_conj(i) - conj(phi_i)|
  double min_abs = 0.0;             // min |phi_i|
  double sum_defect = 0.0;          // |1 + sum phi_i|
  std::string failure;              // empty when admissible
};
// conj is the index involution of the chart (identity for real charts).
Admissibility is_admissible(const VectorC& phi, const std::vector<int>& conj, double tol = 1e-9);

struct IndexCounts {
  int s = 0;  // conjugate pairs
  int P = 0;  // real indices with phi_i > 0
  int index = 0;
};
// Throws NotAdmissible.
IndexCounts index_of(const VectorC& phi, const std::vector<int>& conj, double tol = 1e-9);

// Index of the ambient of the deformation: the index itself for the sphere,
// p minus it for hyperbolic space.
int ambient_index(int index, int p, int eps);

struct DMatrix {
  MatrixC d;
  cd det_closed;
  cd det_numeric;
  MatrixC kernel;  // columns; empty unless numerically singular
};
// Throws ZeroEntry.
DMatrix d_matrix(const VectorC& phi, double singular_tol = 1e-9);

enum class InverseForm { ProductNumerator, SquareNumerator };
// delta_ij phi_i - phi_i phi_j / (1 + sum phi)  or  delta_ij phi_i - phi_i^2 / (1 + sum phi).
// Throws ZeroEntry, Singular.
MatrixC d_inverse_closed(const VectorC& phi, InverseForm form = InverseForm::ProductNumerator);

struct DInverseCheck {
  MatrixC inverse;          // the form that passed, or the product form
  InverseForm verified = InverseForm::ProductNumerator;
  double product_residual = 0.0;  // |D D^-1 - I| for the product form
  double square_residual = 0.0;   // same for the square form
  bool ok = false;
};
DInverseCheck d_inverse(const VectorC& phi, double tol = 1e-10);

struct Signature {
  int plus = 0;
  int minus = 0;
  std::vector<double> eigenvalues;  // remaining after the kernel direction is removed
};
// Signature of the induced product on C^{p+1} / span(phi), computed on its
// conjugation-fixed real form. Throws NotAdmissible.
Signature quotient_signature(const VectorC& phi, const std::vector<int>& conj, double tol = 1e-9);

// Real basis of the conjugation-fixed real form adapted to phi: for a real
// index sqrt|phi_j| e_j, for a pair (a, b) the two combinations built from a
// square root of phi_a. Columns in index order; pairs occupy columns a, b.
MatrixC adapted_real_basis(const VectorC& phi, const std::vector<int>& conj);

struct ModuliSample {
  VectorC phi;
  int index = 0;
};

struct ModuliOptions {
  double box = 3.0;  // half-width of the sampling box in slice coordinates
  int samples = 4000;
  double zero_reject = 1e-6;
  std::uint64_t seed = 7;
};

struct ModuliDescription {
  bool empty = true;
  int dimension = -1;  // affine dimension of the slice {sum = -1} of the real kernel
  MatrixC slice_origin;  // one column
  MatrixC slice_directions;
  std::vector<ModuliSample> samples;
  std::map<int, int> index_histogram;
  // U_0 buckets: sign vector of the real coordinates -> sample count
  std::map<std::string, int> index_zero_buckets;
  int attempts = 0;
};
ModuliDescription moduli_space(const ConjugateChart& chart, const SbranaHolonomy& holonomy,
                               const ModuliOptions& opts = {});

}  // namespace gdef
