#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <random>
#include <set>

#include "gdef/errors.hpp"
#include "gdef/gallery.hpp"
#include "gdef/moduli.hpp"
#include "oracles.hpp"

using namespace gdef;

namespace {

VectorC tuple(std::initializer_list<cd> xs) {
  VectorC v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (cd x : xs) v(k++) = x;
  return v;
}

std::vector<int> real_pattern(int n) {
  std::vector<int> c(n);
  for (int i = 0; i < n; ++i) c[i] = i;
  return c;
}

// Pairs (0,1), (2,3), ... for the first 2*pairs indices, the rest real.
std::vector<int> paired_pattern(int n, int pairs) {
  std::vector<int> c = real_pattern(n);
  for (int k = 0; k < pairs; ++k) c[2 * k] = 2 * k + 1, c[2 * k + 1] = 2 * k;
  return c;
}

MatrixC d_oracle(const VectorC& phi) {
  const int n = static_cast<int>(phi.size());
  MatrixC d = MatrixC::Ones(n, n);
  for (int i = 0; i < n; ++i) d(i, i) += 1.0 / phi(i);
  return d;
}

// Admissible tuple with the given signs on real indices; pairs get random
// imaginary parts. Real parts are rescaled or shifted onto the slice.
VectorC admissible_tuple(std::mt19937_64& rng, const std::vector<int>& conj, const std::vector<int>& signs) {
  std::uniform_real_distribution<double> mag(0.3, 2.0);
  const int n = static_cast<int>(conj.size());
  VectorC phi(n);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (conj[i] == i) {
      phi(i) = signs[r++] * mag(rng);
    } else if (conj[i] > i) {
      phi(i) = cd(mag(rng) - 1.0, mag(rng));
      phi(conj[i]) = std::conj(phi(i));
    }
  }
  const double sum = phi.sum().real();
  if (sum < 0) return phi * (-1.0 / sum);
  for (int i = 0; i < n; ++i)
    if (conj[i] == i && phi(i).real() < 0) {
      phi(i) -= sum + 1.0;
      return phi;
    }
  for (int i = 0; i < n; ++i)
    if (conj[i] > i) {
      phi(i) -= (sum + 1.0) / 2.0;
      phi(conj[i]) = std::conj(phi(i));
      return phi;
    }
  return phi;  // all real and positive: cannot reach the slice
}

// Negative count of the d-product on the conjugation-fixed real subspace,
// using the plain basis e_j, e_a + e_b, i(e_a - e_b), with the kernel dropped.
int oracle_negatives(const VectorC& phi, const std::vector<int>& conj) {
  const int n = static_cast<int>(phi.size());
  MatrixC basis = MatrixC::Zero(n, n);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (conj[i] == i) {
      basis(i, col++) = 1.0;
    } else if (conj[i] > i) {
      basis(i, col) = 1.0, basis(conj[i], col++) = 1.0;
      basis(i, col) = cd(0, 1), basis(conj[i], col++) = cd(0, -1);
    }
  }
  const Eigen::MatrixXd gram = (basis.transpose() * d_oracle(phi) * basis).real();
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues();
  int negatives = 0, zeros = 0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(ev(k)) < 1e-9 * ev.cwiseAbs().maxCoeff()) ++zeros;
    else if (ev(k) < 0) ++negatives;
  }
  EXPECT_EQ(zeros, 1);
  return negatives;
}

}  // namespace

TEST(Admissible, Examples) {
  EXPECT_TRUE(is_admissible(tuple({-0.5, -0.5}), real_pattern(2)).admissible);
  EXPECT_TRUE(is_admissible(tuple({1.0, -2.0}), real_pattern(2)).admissible);
  const Admissibility off = is_admissible(tuple({1.0, 1.0}), real_pattern(2));
  EXPECT_FALSE(off.admissible);
  EXPECT_NEAR(off.sum_defect, 3.0, 1e-15);
  EXPECT_FALSE(off.failure.empty());
  EXPECT_TRUE(is_admissible(tuple({cd(-0.25, 1), cd(-0.25, -1), -0.5}), paired_pattern(3, 1)).admissible);
}

TEST(Admissible, DiagnosticsNameTheFailingCondition) {
  const Admissibility zero = is_admissible(tuple({0.0, -1.0}), real_pattern(2));
  EXPECT_FALSE(zero.admissible);
  EXPECT_EQ(zero.min_abs, 0.0);
  const Admissibility unpaired = is_admissible(tuple({cd(-0.25, 1), cd(-0.25, 1), -0.5}), paired_pattern(3, 1));
  EXPECT_FALSE(unpaired.admissible);
  EXPECT_NEAR(unpaired.conjugation_defect, 2.0, 1e-15);
  // A real index must carry a real value.
  EXPECT_FALSE(is_admissible(tuple({cd(-0.5, 0.1), cd(-0.5, -0.1)}), real_pattern(2)).admissible);
}

TEST(Index, Examples) {
  const IndexCounts a = index_of(tuple({-0.5, -0.5}), real_pattern(2));
  EXPECT_EQ(a.s, 0);
  EXPECT_EQ(a.P, 0);
  EXPECT_EQ(a.index, 1);
  EXPECT_EQ(index_of(tuple({1.0, -2.0}), real_pattern(2)).index, 0);
  const IndexCounts c = index_of(tuple({cd(-0.25, 1), cd(-0.25, -1), -0.5}), paired_pattern(3, 1));
  EXPECT_EQ(c.s, 1);
  EXPECT_EQ(c.P, 0);
  EXPECT_EQ(c.index, 1);
}

TEST(Index, ExamplesAgreeWithTheEigenOracle) {
  EXPECT_EQ(oracle_negatives(tuple({-0.5, -0.5}), real_pattern(2)), 1);
  EXPECT_EQ(oracle_negatives(tuple({1.0, -2.0}), real_pattern(2)), 0);
  EXPECT_EQ(oracle_negatives(tuple({cd(-0.25, 1), cd(-0.25, -1), -0.5}), paired_pattern(3, 1)), 1);
}

TEST(Index, RejectsInadmissibleTuples) {
  EXPECT_THROW(index_of(tuple({1.0, 1.0}), real_pattern(2)), NotAdmissible);
  EXPECT_THROW(quotient_signature(tuple({1.0, 1.0}), real_pattern(2)), NotAdmissible);
}

TEST(Index, AmbientIndexFlipsForHyperbolicSpace) {
  EXPECT_EQ(ambient_index(1, 3, 1), 1);
  EXPECT_EQ(ambient_index(1, 3, -1), 2);
}

TEST(DMatrix, TwoByTwo) {
  const DMatrix m = d_matrix(tuple({1.0, 1.0}));
  EXPECT_EQ(m.d(0, 0), cd(2.0));
  EXPECT_EQ(m.d(0, 1), cd(1.0));
  EXPECT_NEAR(std::abs(m.det_closed - 3.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m.det_numeric - 3.0), 0.0, 1e-14);
  EXPECT_EQ(m.kernel.cols(), 0);
}

TEST(DMatrix, AdmissibleTupleIsSingularAlongItself) {
  const VectorC phi = tuple({-0.5, -0.5});
  const DMatrix m = d_matrix(phi);
  EXPECT_NEAR(std::abs(m.det_closed), 0.0, 1e-15);
  EXPECT_LT(std::abs(m.det_numeric), 1e-12);
  ASSERT_EQ(m.kernel.cols(), 1);
  const VectorC k = m.kernel.col(0);
  // Parallel to phi.
  EXPECT_NEAR(std::abs(std::abs(k.dot(phi)) - k.norm() * phi.norm()), 0.0, 1e-12);
  EXPECT_LT((m.d * phi).norm(), 1e-15);
}

TEST(DMatrix, ZeroEntryThrows) { EXPECT_THROW(d_matrix(tuple({0.0, 1.0})), ZeroEntry); }

TEST(DMatrix, ClosedDeterminantMatchesLuAndCofactors) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  std::uniform_int_distribution<int> size(1, 7);
  std::bernoulli_distribution flip(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    VectorC phi(n);
    for (int i = 0; i < n; ++i) phi(i) = std::polar(mag(rng), flip(rng) ? 0.0 : mag(rng) * 3.0);
    const DMatrix m = d_matrix(phi);
    const cd lu = d_oracle(phi).partialPivLu().determinant();
    EXPECT_LE(std::abs(m.det_closed - lu), 1e-9 * std::abs(lu)) << "n=" << n;
    EXPECT_LE(std::abs(m.det_numeric - lu), 1e-9 * std::abs(lu)) << "n=" << n;
    if (n <= 5) {
      std::vector<std::vector<cd>> rows(n, std::vector<cd>(n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows[i][j] = m.d(i, j);
      EXPECT_LE(std::abs(oracle::cofactor_det(rows) - m.det_closed), 1e-9 * std::abs(lu));
    }
  }
}

TEST(DMatrix, AdmissibleTuplesCarryAKernelCertificate) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    const int pairs = (trial / 6) % (n / 2 + 1);
    const auto conj = paired_pattern(n, pairs);
    std::vector<int> signs(n, -1);
    const VectorC phi = admissible_tuple(rng, conj, signs);
    ASSERT_TRUE(is_admissible(phi, conj).admissible);
    const DMatrix m = d_matrix(phi);
    EXPECT_LT(std::abs(m.det_closed), 1e-9);
    EXPECT_LT((m.d * phi).norm(), 1e-9);
    EXPECT_EQ(m.kernel.cols(), 1);
  }
}

TEST(DInverse, TwoByTwoAndOneByOne) {
  const MatrixC inv = d_inverse_closed(tuple({1.0, 1.0}));
  MatrixC expect(2, 2);
  expect << 2.0 / 3, -1.0 / 3, -1.0 / 3, 2.0 / 3;
  EXPECT_LT((inv - expect).norm(), 1e-15);
  EXPECT_NEAR(std::abs(d_inverse_closed(tuple({1.0}))(0, 0) - 0.5), 0.0, 1e-15);
}

TEST(DInverse, ProductNumeratorVerifiesAndSquareNumeratorDoesNot) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  int square_failures = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 6;
    VectorC phi(n);
    for (int i = 0; i < n; ++i) phi(i) = cd(mag(rng) * (trial % 2 ? 1 : -1), mag(rng) - 1.0);
    if (std::abs(1.0 + phi.sum()) < 1e-3) continue;
    const MatrixC d = d_oracle(phi);
    const MatrixC product = d_inverse_closed(phi, InverseForm::ProductNumerator);
    EXPECT_LT((d * product - MatrixC::Identity(n, n)).norm(), 1e-10);
    EXPECT_LT((product - d.partialPivLu().inverse()).norm(), 1e-10 * std::max(1.0, product.norm()));
    const DInverseCheck check = d_inverse(phi);
    EXPECT_TRUE(check.ok);
    EXPECT_EQ(check.verified, InverseForm::ProductNumerator);
    if (check.square_residual > 1e-6) ++square_failures;
  }
  EXPECT_GT(square_failures, 250);
}

TEST(DInverse, SingularThrows) { EXPECT_THROW(d_inverse_closed(tuple({-0.5, -0.5})), Singular); }

TEST(Signature, Examples) {
  const Signature a = quotient_signature(tuple({-0.5, -0.5}), real_pattern(2));
  EXPECT_EQ(a.plus, 0);
  EXPECT_EQ(a.minus, 1);
  const Signature b = quotient_signature(tuple({1.0, -2.0}), real_pattern(2));
  EXPECT_EQ(b.plus, 1);
  EXPECT_EQ(b.minus, 0);
}

TEST(Signature, ExhaustiveRealSignPatterns) {
  std::mt19937_64 rng(23);
  for (int p = 1; p <= 4; ++p) {
    const int n = p + 1;
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<int> signs(n);
      for (int i = 0; i < n; ++i) signs[i] = (mask >> i & 1) ? 1 : -1;
      if (mask == (1 << n) - 1) continue;  // all positive never sums to -1
      const auto conj = real_pattern(n);
      for (int rep = 0; rep < 5; ++rep) {
        const VectorC phi = admissible_tuple(rng, conj, signs);
        ASSERT_TRUE(is_admissible(phi, conj).admissible);
        const IndexCounts ic = index_of(phi, conj);
        const Signature s = quotient_signature(phi, conj);
        EXPECT_EQ(s.minus, ic.index) << "p=" << p << " mask=" << mask;
        EXPECT_EQ(s.plus + s.minus, p);
        EXPECT_EQ(oracle_negatives(phi, conj), ic.index);
        EXPECT_GE(ic.index, 0);
        EXPECT_LE(ic.index, p);
      }
    }
  }
}

TEST(Signature, RandomTuplesWithConjugatePairs) {
  std::mt19937_64 rng(29);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 2 + trial % 6;
    const int pairs = 1 + (trial / 6) % (n / 2);
    const auto conj = paired_pattern(n, pairs);
    std::vector<int> signs(n - 2 * pairs);
    for (int& s : signs) s = coin(rng) ? 1 : -1;
    const VectorC phi = admissible_tuple(rng, conj, signs);
    if (!is_admissible(phi, conj).admissible) continue;
    const IndexCounts ic = index_of(phi, conj);
    EXPECT_EQ(ic.s, pairs);
    const Signature s = quotient_signature(phi, conj);
    EXPECT_EQ(s.minus, ic.index);
    EXPECT_EQ(oracle_negatives(phi, conj), ic.index);
  }
}

TEST(Signature, AdaptedBasisSpansTheRealForm) {
  const VectorC phi = tuple({cd(-0.25, 1), cd(-0.25, -1), -0.5});
  const auto conj = paired_pattern(3, 1);
  const MatrixC xi = adapted_real_basis(phi, conj);
  ASSERT_EQ(xi.cols(), 3);
  EXPECT_EQ(xi.fullPivLu().rank(), 3);
  for (int k = 0; k < 3; ++k) {
    const VectorC v = xi.col(k);
    EXPECT_NEAR(std::abs(v(1) - std::conj(v(0))), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(v(2).imag()), 0.0, 1e-14);
  }
}

namespace {

struct Described {
  ChartFile file;
  SbranaHolonomy holonomy;
  ModuliDescription moduli;
};

Described describe(const std::string& name, const ModuliOptions& opts = {}) {
  Described d{gallery_chart(name), {}, {}};
  d.holonomy = trivial_holonomy(*d.file.chart, d.file.basepoint);
  d.moduli = moduli_space(*d.file.chart, d.holonomy, opts);
  return d;
}

}  // namespace

TEST(ModuliSpace, FlatTorusLine) {
  const Described d = describe("flat_torus_p1");
  EXPECT_FALSE(d.moduli.empty);
  EXPECT_EQ(d.moduli.dimension, 1);
  // On the line (t, -1-t): t < -1 gives -+, t > 0 gives +-, the middle has index 1.
  std::set<std::string> keys;
  for (const auto& [k, n] : d.moduli.index_zero_buckets) keys.insert(k);
  EXPECT_EQ(keys, (std::set<std::string>{"+-", "-+"}));
  EXPECT_EQ(d.moduli.index_zero_buckets.at("+-"), 1537);
  EXPECT_EQ(d.moduli.index_zero_buckets.at("-+"), 1522);
  for (const auto& s : d.moduli.samples) {
    const double t = s.phi(0).real();
    EXPECT_NEAR(std::abs(s.phi(1) - cd(-1.0 - t)), 0.0, 1e-12);
    EXPECT_EQ(s.index, (t > -1 && t < 0) ? 1 : 0);
  }
}

TEST(ModuliSpace, GalleryFixtures) {
  for (const auto& entry : gallery()) {
    const ChartFile cf = gallery_chart(entry.name);
    if (!cf.chart || !cf.expected.count("moduli_dimension")) continue;
    const Described d = describe(entry.name);
    EXPECT_EQ(d.moduli.dimension, std::stoi(cf.expected.at("moduli_dimension"))) << entry.name;
    if (cf.expected.count("u0_buckets")) {
      const int buckets = static_cast<int>(d.moduli.index_zero_buckets.size());
      EXPECT_EQ(buckets, std::stoi(cf.expected.at("u0_buckets"))) << entry.name;
      EXPECT_LE(buckets, cf.chart->p() + 1) << entry.name;
    }
  }
}

TEST(ModuliSpace, SamplesAreAdmissibleAndTagged) {
  for (const std::string name : {"flat_torus_p2", "flat_bundle_p2"}) {
    const Described d = describe(name);
    const auto& conj = d.file.chart->conj_map();
    int total = 0;
    for (const auto& s : d.moduli.samples) {
      EXPECT_TRUE(is_admissible(s.phi, conj, 1e-8).admissible);
      EXPECT_EQ(s.index, index_of(s.phi, conj, 1e-8).index);
      EXPECT_GE(s.index, 0);
      EXPECT_LE(s.index, d.file.chart->p());
    }
    for (const auto& [mu, n] : d.moduli.index_histogram) total += n;
    EXPECT_EQ(total, static_cast<int>(d.moduli.samples.size()));
  }
}

TEST(ModuliSpace, EmptyWhenTheHolonomyHasNoRealKernel) {
  for (const std::string name : {"full_rank_p1", "complex_pair_p1"}) {
    const Described d = describe(name);
    EXPECT_EQ(d.holonomy.species, d.file.chart->p() + 2) << name;
    EXPECT_TRUE(d.moduli.empty) << name;
    EXPECT_TRUE(d.moduli.samples.empty()) << name;
  }
}

TEST(ModuliSpace, SameSeedSameSamples) {
  const Described a = describe("flat_torus_p2");
  const Described b = describe("flat_torus_p2");
  ASSERT_EQ(a.moduli.samples.size(), b.moduli.samples.size());
  for (std::size_t k = 0; k < a.moduli.samples.size(); ++k) EXPECT_EQ(a.moduli.samples[k].phi, b.moduli.samples[k].phi);
  ModuliOptions other;
  other.seed = 8;
  const Described c = describe("flat_torus_p2", other);
  EXPECT_NE(a.moduli.samples.front().phi, c.moduli.samples.front().phi);
}
