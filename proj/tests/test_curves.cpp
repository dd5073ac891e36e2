#include <gtest/gtest.h>

#include <random>

#include "gdef/curves.hpp"
#include "gdef/errors.hpp"
#include "gdef/gallery.hpp"

using namespace gdef;

namespace {

CurvePair pair_of(const std::string& name) { return *gallery_chart(name).curves; }

int expected_int(const std::string& name, const std::string& key) {
  return std::stoi(gallery_chart(name).expected.at(key));
}

// Both curves reparametrized by u -> scale * u + shift, windows moved to match.
CurvePair reparametrized(CurvePair p, double scale, double shift) {
  const Expr arg = parse(std::to_string(scale) + "*u0+" + std::to_string(shift));
  for (auto* curve : {&p.alpha1, &p.alpha2})
    for (auto& e : *curve)
      if (e) e = substitute(e, {arg});
  p.u_lo = (p.u_lo - shift) / scale, p.u_hi = (p.u_hi - shift) / scale;
  p.v_lo = (p.v_lo - shift) / scale, p.v_hi = (p.v_hi - shift) / scale;
  p.u_base = (p.u_base - shift) / scale, p.v_base = (p.v_base - shift) / scale;
  return p;
}

Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = N(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

// Boost in the (0, 1) plane composed with a rotation of the remaining axes.
Eigen::MatrixXd lorentz_isometry(std::mt19937_64& rng, int n, double rapidity) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  m(0, 0) = m(1, 1) = std::cosh(rapidity);
  m(0, 1) = m(1, 0) = std::sinh(rapidity);
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  r.bottomRightCorner(n - 1, n - 1) = random_rotation(rng, n - 1);
  return r * m;
}

}  // namespace

TEST(SharedDimension, GalleryPairs) {
  for (const std::string name : {"circles_pair", "exp_pair", "cos_pair", "lorentz_pair", "varying_pair"}) {
    const SharedDimension sd = shared_dimension(pair_of(name));
    EXPECT_EQ(sd.rank, expected_int(name, "shared_dimension")) << name;
    EXPECT_EQ(sd.samples, 64) << name;
  }
}

TEST(SharedDimension, SingularValuesShowTheGap) {
  const SharedDimension sd = shared_dimension(pair_of("exp_pair"));
  ASSERT_GE(sd.singular_values.size(), 2u);
  EXPECT_LT(sd.singular_values[1], 1e-8 * sd.singular_values[0]);
}

TEST(SharedDimension, InvariantUnderReparametrization) {
  for (const std::string name : {"exp_pair", "cos_pair", "lorentz_pair"}) {
    const int base = shared_dimension(pair_of(name)).rank;
    EXPECT_EQ(shared_dimension(reparametrized(pair_of(name), 0.5, 0.25)).rank, base) << name;
    EXPECT_EQ(shared_dimension(reparametrized(pair_of(name), -2.0, 0.0)).rank, base) << name;
  }
}

TEST(SharedDimension, InvariantUnderAmbientIsometries) {
  std::mt19937_64 rng(71);
  for (const std::string name : {"circles_pair", "exp_pair", "cos_pair"}) {
    CurvePair p = pair_of(name);
    const int base = shared_dimension(p).rank;
    for (int trial = 0; trial < 3; ++trial) {
      p.transform = random_rotation(rng, p.ambient_dim());
      EXPECT_EQ(shared_dimension(p).rank, base) << name;
    }
  }
  CurvePair p = pair_of("lorentz_pair");
  p.transform = lorentz_isometry(rng, p.ambient_dim(), 0.8);
  EXPECT_EQ(shared_dimension(p).rank, 2);
}

TEST(Split, DisjointCirclesUseCoordinatePlanes) {
  const OrthogonalSplit s = orthogonal_split(pair_of("circles_pair"));
  EXPECT_EQ(s.l, 0);
  EXPECT_EQ(s.V1.cols(), 2);
  EXPECT_EQ(s.V2.cols(), 2);
  // V1 lives in the first two axes, V2 in the last two.
  EXPECT_LT(s.V1.bottomRows(2).norm(), 1e-10);
  EXPECT_LT(s.V2.topRows(2).norm(), 1e-10);
  EXPECT_LT(s.orthogonality_residual, 1e-8);
  EXPECT_LT(s.containment_residual, 1e-8);
}

TEST(Split, SharedPlaneNeverExceedsSharedDimension) {
  for (const std::string name : {"circles_pair", "exp_pair", "cos_pair", "lorentz_pair", "varying_pair"}) {
    const CurvePair p = pair_of(name);
    const OrthogonalSplit s = orthogonal_split(p);
    EXPECT_LE(s.l, shared_dimension(p).rank) << name;
    EXPECT_LT(s.orthogonality_residual, 1e-8) << name;
    EXPECT_LT(s.containment_residual, 1e-8) << name;
    const auto& expected = gallery_chart(name).expected;
    if (expected.count("shared_plane")) {
      EXPECT_EQ(s.l, std::stoi(expected.at("shared_plane"))) << name;
    }
  }
}

TEST(Split, SameCurveTwiceIsDegenerate) {
  EXPECT_THROW(orthogonal_split(pair_of("degenerate_pair")), DegenerateSpan);
}

TEST(Interval, LorentzPairEndpoints) {
  const HonestInterval iv = honest_interval(pair_of("lorentz_pair"));
  EXPECT_NEAR(iv.projected1, -2.0, 1e-9);
  EXPECT_NEAR(iv.projected2, -4.0, 1e-9);
  EXPECT_NEAR(iv.lo, -2.0, 1e-9);
  EXPECT_NEAR(iv.hi, -0.25, 1e-9);
  EXPECT_LT(iv.lo, iv.hi);
  EXPECT_GT(iv.projected1 * iv.projected2, 1.0);
  // Nonempty: the upper end is 1 / <bar alpha_2', bar alpha_2'>. Both norms are
  // negative here, so the product form of this check flips to lo * projected2 > 1.
  EXPECT_LT(iv.lo, 1.0 / iv.projected2);
  EXPECT_GT(iv.lo * iv.projected2, 1.0);
}

TEST(Interval, VaryingPairAtTheBasepoint) {
  const HonestInterval iv = honest_interval(pair_of("varying_pair"));
  EXPECT_NEAR(iv.lo, -std::pow(std::cosh(0.5), 2), 1e-9);
  EXPECT_NEAR(iv.hi, -0.25, 1e-9);
}

TEST(Interval, ProductAtMostOneIsRejected) {
  EXPECT_THROW(honest_interval(pair_of("guard_pair")), EmptyInterval);
}

TEST(Interval, NeedsPolarNormalization) {
  EXPECT_THROW(honest_interval(pair_of("cos_pair")), NotPolarNormalized);
}

TEST(Interval, NeedsSharedDimensionTwo) {
  // alpha2' = (cosh, 0, 0, sinh) is polar but meets alpha1' only through the time axis.
  CurvePair p = pair_of("lorentz_pair");
  p.alpha2 = {parse("sinh(u0)"), make_number(0), make_number(0), parse("cosh(u0)")};
  EXPECT_EQ(shared_dimension(p).rank, 1);
  EXPECT_THROW(honest_interval(p), SharedDimensionNotTwo);
}

TEST(Interval, ShrinkingWindowsGrowTheInterval) {
  const CurvePair p = pair_of("varying_pair");
  double prev_lo = -1e300, prev_hi = 1e300;
  bool first = true;
  for (double w : {0.3, 0.2, 0.1, 0.05, 0.01}) {
    const HonestInterval iv = honest_interval_window(p, 0.5 - w, 0.5 + w, -w, w);
    EXPECT_LT(iv.lo, iv.hi);
    if (!first) {
      EXPECT_LE(iv.lo, prev_lo + 1e-12) << w;
      EXPECT_GE(iv.hi, prev_hi - 1e-12) << w;
    }
    // The lower end is -cosh^2 at the window point nearest 0.
    EXPECT_NEAR(iv.lo, -std::pow(std::cosh(0.5 - w), 2), 1e-6) << w;
    prev_lo = iv.lo, prev_hi = iv.hi, first = false;
  }
  const HonestInterval at = honest_interval(p);
  EXPECT_LE(at.lo, prev_lo + 1e-12);
  EXPECT_NEAR(prev_lo, at.lo, 0.05);
}
