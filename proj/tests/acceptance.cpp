// Acceptance run: one PASS/FAIL line per criterion with the measured worst
// value, its limit and the wall time. Exit status is the number of failures.

#include <Eigen/LU>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gdef/curves.hpp"
#include "gdef/deform.hpp"
#include "gdef/errors.hpp"
#include "gdef/gallery.hpp"
#include "gdef/moduli.hpp"
#include "gdef/residual.hpp"
#include "gdef/sbrana.hpp"
#include "oracles.hpp"

using namespace gdef;

namespace {

// Tolerances and time budgets (seconds).
constexpr double kDetRel = 1e-9;
constexpr double kSingularDet = 1e-9;
constexpr double kKernel = 1e-9;
constexpr double kInverse = 1e-10;
constexpr double kSumDrift = 1e-9;
constexpr double kAnnihilation = 1e-8;
constexpr double kLoop = 1e-6;
constexpr double kJetRel = 1e-6;
constexpr double kPolynomial = 1e-12;
constexpr double kConditions = 1e-8;
constexpr double kPullback = 1e-4;
constexpr double kSweep = 1e-5;
constexpr double kIntersection = 1e-10;
constexpr double kIntervalRel = 1e-6;
constexpr double kSectionPde = 1e-9;
constexpr double kRicciFactor = 10.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget;
  std::function<Outcome()> run;
};

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<int> identity_pattern(int n) {
  std::vector<int> c(n);
  for (int i = 0; i < n; ++i) c[i] = i;
  return c;
}

MatrixC d_of(const VectorC& phi) {
  const int n = static_cast<int>(phi.size());
  MatrixC d = MatrixC::Ones(n, n);
  for (int i = 0; i < n; ++i) d(i, i) += 1.0 / phi(i);
  return d;
}

// Admissible tuple with the given pattern, real signs and |phi_i| in [lo, hi]; empty on rejection.
VectorC admissible(std::mt19937_64& rng, const std::vector<int>& conj, const std::vector<int>& signs, double lo,
                   double hi) {
  std::uniform_real_distribution<double> mag(lo, hi), angle(0.2, 2.9);
  const int n = static_cast<int>(conj.size());
  VectorC phi(n);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (conj[i] == i) phi(i) = signs[r++] * mag(rng);
    else if (conj[i] > i) phi(i) = std::polar(mag(rng), angle(rng)), phi(conj[i]) = std::conj(phi(i));
  }
  const double sum = phi.sum().real();
  if (sum < 0) {
    phi *= -1.0 / sum;
  } else {
    int neg = -1;
    for (int i = 0; i < n && neg < 0; ++i)
      if (conj[i] == i && phi(i).real() < 0) neg = i;
    if (neg < 0) return {};
    phi(neg) -= sum + 1.0;
  }
  const double m = phi.cwiseAbs().minCoeff(), M = phi.cwiseAbs().maxCoeff();
  if (m < lo || M > hi) return {};
  return phi;
}

Outcome d_algebra() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mag(0.1, 10.0), angle(0.0, 6.283185307179586);
  std::uniform_int_distribution<int> size(2, 7);
  std::bernoulli_distribution real(0.5);
  double det_rel = 0, inv = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    VectorC phi(n);
    for (int i = 0; i < n; ++i) phi(i) = std::polar(mag(rng), real(rng) ? (real(rng) ? 0.0 : 3.141592653589793) : angle(rng));
    const DMatrix m = d_matrix(phi);
    const cd lu = d_of(phi).partialPivLu().determinant();
    det_rel = worst_of(det_rel, std::abs(m.det_closed - lu) / std::abs(lu));
    const MatrixC product = d_inverse_closed(phi, InverseForm::ProductNumerator);
    inv = worst_of(inv, max_abs(d_of(phi) * product - MatrixC::Identity(n, n)));
  }
  const DInverseCheck verified = d_inverse([] {
    VectorC v(3);
    v << 1.0, 2.0, -0.5;
    return v;
  }());
  double det_adm = 0, ker = 0;
  int admissible_count = 0;
  std::uniform_int_distribution<int> pairs_of(0, 3);
  std::bernoulli_distribution coin(0.5);
  while (admissible_count < 1000) {
    const int n = size(rng);
    const int pairs = std::min(pairs_of(rng), n / 2);
    std::vector<int> conj = identity_pattern(n);
    for (int k = 0; k < pairs; ++k) conj[2 * k] = 2 * k + 1, conj[2 * k + 1] = 2 * k;
    std::vector<int> signs(n - 2 * pairs);
    for (int& s : signs) s = coin(rng) ? 1 : -1;
    const VectorC phi = admissible(rng, conj, signs, 0.1, 10.0);
    if (phi.size() == 0) continue;
    ++admissible_count;
    const DMatrix m = d_matrix(phi);
    det_adm = worst_of(det_adm, std::abs(m.det_closed));
    ker = worst_of(ker, (m.d * phi).norm());
  }
  require(o, det_rel < kDetRel, fmt("det rel %.2e", det_rel));
  require(o, det_adm < kSingularDet, fmt("admissible |det| %.2e", det_adm));
  require(o, ker < kKernel, fmt("kernel %.2e", ker));
  require(o, inv < kInverse, fmt("inverse %.2e", inv));
  require(o, verified.ok && verified.verified == InverseForm::ProductNumerator, "product form not verified");
  if (o.pass)
    o.detail = fmt("det rel %.1e, admissible |det| %.1e", det_rel, det_adm) +
               fmt(", kernel %.1e, inverse %.1e (product numerator)", ker, inv);
  return o;
}

Outcome index_signature() {
  Outcome o;
  std::mt19937_64 rng(103);
  int cases = 0, mismatches = 0;
  for (int p = 1; p <= 4; ++p) {
    const int n = p + 1;
    for (int mask = 0; mask + 1 < (1 << n); ++mask) {
      std::vector<int> signs(n);
      for (int i = 0; i < n; ++i) signs[i] = (mask >> i & 1) ? 1 : -1;
      VectorC phi;
      while (phi.size() == 0) phi = admissible(rng, identity_pattern(n), signs, 0.1, 10.0);
      ++cases;
      if (index_of(phi, identity_pattern(n)).index != quotient_signature(phi, identity_pattern(n)).minus) ++mismatches;
    }
  }
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < 200;) {
    const int n = 2 + k % 6;
    const int pairs = 1 + (k / 6) % (n / 2);
    std::vector<int> conj = identity_pattern(n);
    for (int j = 0; j < pairs; ++j) conj[2 * j] = 2 * j + 1, conj[2 * j + 1] = 2 * j;
    std::vector<int> signs(n - 2 * pairs);
    for (int& s : signs) s = coin(rng) ? 1 : -1;
    const VectorC phi = admissible(rng, conj, signs, 0.1, 10.0);
    if (phi.size() == 0) continue;
    ++k, ++cases;
    if (index_of(phi, conj).index != quotient_signature(phi, conj).minus) ++mismatches;
  }
  require(o, mismatches == 0, std::to_string(mismatches) + " mismatches");
  o.detail = std::to_string(cases) + " tuples, " + std::to_string(mismatches) + " mismatches";
  return o;
}

Outcome holonomy() {
  Outcome o;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double drift = 0, annihilation = 0, loop = 0;
  int charts = 0;
  for (const auto& entry : gallery()) {
    const ChartFile cf = gallery_chart(entry.name);
    if (!cf.chart || cf.chart->p() < 1) continue;
    ++charts;
    const ConjugateChart& c = *cf.chart;
    const SbranaHolonomy h = trivial_holonomy(c, cf.basepoint);
    annihilation = worst_of(annihilation, h.annihilation);
    require(o, h.stable_next_level, entry.name + " kernel shrinks at the next level");
    if (cf.expected.count("species"))
      require(o, h.species == std::stoi(cf.expected.at("species")), entry.name + " species");
    const auto& q = cf.basepoint;
    std::vector<std::vector<double>> square{q};
    for (auto [a, b] : {std::pair{0.1, 0.0}, {0.0, 0.1}, {-0.1, 0.0}, {0.0, -0.1}}) {
      auto next = square.back();
      next[0] += a, next[1] += b;
      square.push_back(next);
    }
    // Sum conservation for arbitrary complex values along the loop.
    for (int trial = 0; trial < 3; ++trial) {
      VectorC phi(c.dims());
      for (int k = 0; k < c.dims(); ++k) phi(k) = cd(U(rng), U(rng));
      drift = worst_of(drift, parallel_transport(c, phi, square).sum_drift);
    }
    for (int k = 0; k < h.kernel.cols(); ++k) {
      const VectorC phi = h.kernel.col(k);
      loop = worst_of(loop, (parallel_transport(c, phi, square).phi - phi).norm() / phi.norm());
    }
  }
  const auto species = [](const char* name) {
    const ChartFile cf = gallery_chart(name);
    return trivial_holonomy(*cf.chart, cf.basepoint).species;
  };
  require(o, species("flat_torus_p1") == 1 && species("flat_torus_p2") == 1 && species("flat_torus_p3") == 1,
          "flat tori not first species");
  require(o, species("full_rank_p1") == 3, "full rank chart not species p+2");
  require(o, species("intersection_p1") == 1 && species("second_species_p1") == 2, "p=1 dichotomy");
  require(o, drift < kSumDrift, fmt("sum drift %.2e", drift));
  require(o, annihilation < kAnnihilation, fmt("annihilation %.2e", annihilation));
  require(o, loop < kLoop, fmt("loop %.2e", loop));
  if (o.pass)
    o.detail = std::to_string(charts) + " charts, sum drift " + fmt("%.1e, annihilation %.1e", drift, annihilation) +
               fmt(", loop %.1e", loop);
  return o;
}

Outcome jets() {
  Outcome o;
  const std::vector<double> x{0.7, 0.4};
  double rel = 0;
  for (const auto& entry : oracle::corpus()) {
    const Jet j = eval_jet(parse(entry.text), {cd(x[0]), cd(x[1])}, 1);
    for (int r = 0; r < 2; ++r) {
      const double fd = oracle::richardson_partial(entry.f, x, r);
      rel = worst_of(rel, std::abs(j.d(r).real() - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  std::mt19937_64 rng(109);
  const std::vector<double> y{0.5, -1.25, 2.0};
  double poly = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const oracle::Polynomial P = oracle::random_polynomial(rng, 3, 4, 6);
    const Jet j = eval_jet(parse(P.text()), {cd(y[0]), cd(y[1]), cd(y[2])}, 3);
    for (int k = 0; k < j.layout()->size(); ++k) {
      const auto& a = j.layout()->multi(k);
      const double expect = P.partial(a, y);
      poly = worst_of(poly, std::abs(j.partial(a) - expect) / std::max(1.0, std::abs(expect)));
    }
  }
  require(o, oracle::corpus().size() == 50, "corpus size");
  require(o, rel < kJetRel, fmt("jet vs Richardson %.2e", rel));
  require(o, poly < kPolynomial, fmt("polynomial %.2e", poly));
  if (o.pass) o.detail = fmt("50 expressions, rel %.1e; polynomial jets %.1e", rel, poly);
  return o;
}

Outcome reconstruction() {
  Outcome o;
  const ChartFile cf = gallery_chart("flat_torus_p1");
  const GaussData gd(*cf.chart, cf.basepoint);
  std::string detail;
  for (auto [a, b, mu] : {std::tuple{1.0, -2.0, 0}, {-0.5, -0.5, 1}}) {
    VectorC phi(2);
    phi << a, b;
    const DeformationPackage pkg = build_package(*cf.chart, cf.grid, phi, cf.basepoint);
    const ImmersionResult r = integrate_immersion(gd, pkg);
    const std::string tag = fmt("(%g,%g)", a, b);
    require(o, r.conditions.max() < kConditions, tag + fmt(" conditions %.2e", r.conditions.max()));
    require(o, r.pullback_residual < kPullback, tag + fmt(" pullback %.2e", r.pullback_residual));
    require(o, r.sweep_residual < kSweep, tag + fmt(" sweep %.2e", r.sweep_residual));
    require(o, r.index == mu, tag + " index " + std::to_string(r.index));
    detail += (detail.empty() ? "" : "; ") + tag + " mu=" + std::to_string(r.index) +
              fmt(" pullback %.1e sweep %.1e", r.pullback_residual, r.sweep_residual);
  }
  if (o.pass) o.detail = detail + " on 16x16";
  return o;
}

Outcome moduli_structure() {
  Outcome o;
  std::string detail;
  for (auto [name, dim, cap] : {std::tuple{"flat_torus_p1", 1, 2}, {"flat_torus_p2", 2, 3}}) {
    const ChartFile cf = gallery_chart(name);
    const ModuliDescription md = moduli_space(*cf.chart, trivial_holonomy(*cf.chart, cf.basepoint));
    const int buckets = static_cast<int>(md.index_zero_buckets.size());
    require(o, md.dimension == dim, std::string(name) + " dimension " + std::to_string(md.dimension));
    require(o, buckets <= cap, std::string(name) + " buckets above p+1");
    require(o, buckets == std::stoi(cf.expected.at("u0_buckets")), std::string(name) + " bucket fixture");
    detail += (detail.empty() ? "" : "; ") + std::string(name) + " dim " + std::to_string(md.dimension) +
              ", buckets " + std::to_string(buckets);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome intersection_curves() {
  Outcome o;
  const ChartFile cf = gallery_chart("intersection_p1");
  const double res = intersection_type_residual(*cf.chart, chart_points(*cf.chart, cf.grid));
  require(o, res < kIntersection, fmt("intersection residual %.2e", res));
  const int i0 = shared_dimension(*gallery_chart("circles_pair").curves).rank;
  const int i1 = shared_dimension(*gallery_chart("exp_pair").curves).rank;
  const int i2 = shared_dimension(*gallery_chart("cos_pair").curves).rank;
  require(o, i0 == 0 && i1 == 1 && i2 == 2, "shared dimensions " + std::to_string(i0) + std::to_string(i1) + std::to_string(i2));
  const ChartFile lorentz = gallery_chart("lorentz_pair");
  const HonestInterval iv = honest_interval(*lorentz.curves);
  const double lo = std::stod(lorentz.expected.at("interval_lo")), hi = std::stod(lorentz.expected.at("interval_hi"));
  const double rel = std::max(std::abs(iv.lo - lo) / std::abs(lo), std::abs(iv.hi - hi) / std::abs(hi));
  require(o, rel < kIntervalRel, fmt("interval (%g, %g)", iv.lo, iv.hi));
  bool guarded = false;
  try {
    honest_interval(*gallery_chart("guard_pair").curves);
  } catch (const EmptyInterval&) {
    guarded = true;
  }
  require(o, guarded, "guard did not raise");
  if (o.pass) o.detail = fmt("intersection %.1e, I = 0/1/2, interval (%.6g,", res, iv.lo) + fmt(" %.6g), guard raises", iv.hi);
  return o;
}

Outcome ricci_redundancy() {
  Outcome o;
  std::mt19937_64 rng(113);
  std::normal_distribution<double> N;
  const std::vector<std::string> charts{"flat_bundle_p2", "second_species_p1", "intersection_p1"};
  double worst_ratio = 0, worst_section = 0;
  int fields = 0;
  while (fields < 20) {
    const ChartFile cf = gallery_chart(charts[fields % charts.size()]);
    const SbranaHolonomy hol = trivial_holonomy(*cf.chart, cf.basepoint);
    VectorC v = VectorC::Zero(cf.chart->dims());
    for (int k = 0; k < hol.real_kernel.cols(); ++k) v += N(rng) * hol.real_kernel.col(k);
    v *= -1.0 / v.sum();
    if (v.cwiseAbs().minCoeff() < 0.2 || v.cwiseAbs().maxCoeff() > 5) continue;
    Grid box;
    for (double c : cf.basepoint) {
      box.lo.push_back(c - 0.004);
      box.hi.push_back(c + 0.004);
      box.n.push_back(5);
    }
    const DeformationPackage pkg = build_package(*cf.chart, box, v, cf.basepoint, TransportOptions{0.002, 1e-13});
    const ConditionReport r = verify_conditions(pkg);
    ++fields;
    worst_section = worst_of(worst_section, r.section);
    const double others = r.max_without_ricci();
    worst_ratio = worst_of(worst_ratio, others > 0 ? r.ricci / others : (r.ricci > 0 ? 1e300 : 0.0));
    require(o, pkg.admissible, cf.name + " field not admissible");
  }
  require(o, worst_section < kSectionPde, fmt("section residual %.2e", worst_section));
  require(o, worst_ratio < kRicciFactor, fmt("Ricci / others %.2f", worst_ratio));
  if (o.pass) o.detail = fmt("20 fields, section %.1e, Ricci / others at most %.2f", worst_section, worst_ratio);
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "D-matrix algebra", 5, d_algebra},
      {2, "index and quotient signature", 5, index_signature},
      {3, "holonomy", 30, holonomy},
      {4, "jets", 5, jets},
      {5, "reconstruction", 60, reconstruction},
      {6, "moduli structure", 10, moduli_structure},
      {7, "intersection type and curves", 10, intersection_curves},
      {8, "Ricci redundancy", 30, ricci_redundancy},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("raised: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget) {
      o.pass = false;
      o.detail += fmt("; took %.1f s over the %.0f s budget", secs, c.budget);
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %-30s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
