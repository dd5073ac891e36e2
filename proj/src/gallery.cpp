#include "gdef/gallery.hpp"

#include <stdexcept>

namespace gdef {

namespace {

const char* const kFlatTorusP1 = R"(# Clifford-type flat torus in S^3 with radii 0.6, 0.8.
[meta]
name = flat_torus_p1
p = 1
ambient = sphere
[metric]
g_0_0 = 1
g_1_1 = 1
[immersion]
h_0 = 0.6*cos(u0/0.6)
h_1 = 0.6*sin(u0/0.6)
h_2 = 0.8*cos(u1/0.8)
h_3 = 0.8*sin(u1/0.8)
[support]
gamma = 1
[grid]
lo = 0, 0
hi = 1, 1
n = 16, 16
basepoint = 0.5, 0.5
[expected]
species = 1
moduli_dimension = 1
u0_buckets = 2
)";

const char* const kFlatTorusP2 = R"(# Flat 3-torus in S^5 with radii 0.48, 0.6, 0.64.
[meta]
name = flat_torus_p2
p = 2
ambient = sphere
[metric]
g_0_0 = 1
g_1_1 = 1
g_2_2 = 1
[immersion]
h_0 = 0.48*cos(u0/0.48)
h_1 = 0.48*sin(u0/0.48)
h_2 = 0.6*cos(u1/0.6)
h_3 = 0.6*sin(u1/0.6)
h_4 = 0.64*cos(u2/0.64)
h_5 = 0.64*sin(u2/0.64)
[support]
gamma = 1
[grid]
lo = 0, 0, 0
hi = 1, 1, 1
n = 8, 8, 8
basepoint = 0.5, 0.5, 0.5
[expected]
species = 1
moduli_dimension = 2
u0_buckets = 3
)";

const char* const kFlatTorusP3 = R"(# Flat 4-torus in S^7 with radii 0.3, 0.4, 0.5, sqrt(0.5).
[meta]
name = flat_torus_p3
p = 3
ambient = sphere
[metric]
g_0_0 = 1
g_1_1 = 1
g_2_2 = 1
g_3_3 = 1
[immersion]
h_0 = 0.3*cos(u0/0.3)
h_1 = 0.3*sin(u0/0.3)
h_2 = 0.4*cos(u1/0.4)
h_3 = 0.4*sin(u1/0.4)
h_4 = 0.5*cos(u2/0.5)
h_5 = 0.5*sin(u2/0.5)
h_6 = sqrt(0.5)*cos(u3/sqrt(0.5))
h_7 = sqrt(0.5)*sin(u3/sqrt(0.5))
[support]
gamma = 1
[grid]
lo = 0, 0, 0, 0
hi = 1, 1, 1, 1
n = 5, 5, 5, 5
basepoint = 0.5, 0.5, 0.5, 0.5
[expected]
species = 1
moduli_dimension = 3
u0_buckets = 4
)";

const char* const kIntersectionP1 = R"(# One Laplace invariant vanishes identically.
[meta]
name = intersection_p1
p = 1
ambient = sphere
[christoffel]
G_0_1 = u0
G_1_0 = 0
[metric]
g_0_0 = 1
g_1_1 = 1
[grid]
lo = 0.2, 0.2
hi = 0.8, 0.8
n = 9, 9
basepoint = 0.5, 0.5
[expected]
species = 1
intersection_type = yes
)";

const char* const kSecondSpeciesP1 = R"(# Kernel of the curvature stack has rank one.
[meta]
name = second_species_p1
p = 1
ambient = sphere
[christoffel]
G_0_1 = (0.2*u1+0.1)/(1+0.4*u0*u1+0.2*u0)
G_1_0 = 0.2*u0/(-1+0.4*u0*u1+0.2*u0)
[metric]
g_0_0 = 1
g_1_1 = 1
[grid]
lo = 0.2, 0.2
hi = 0.8, 0.8
n = 9, 9
basepoint = 0.5, 0.5
[expected]
species = 2
moduli_dimension = 0
)";

const char* const kFullRankP1 = R"(# Curvature stack of full rank: no parallel flat subbundle.
[meta]
name = full_rank_p1
p = 1
ambient = sphere
[christoffel]
G_0_1 = u1
G_1_0 = 2*u0
[metric]
g_0_0 = 1
g_1_1 = 1
[grid]
lo = 0.2, 0.2
hi = 0.8, 0.8
n = 9, 9
basepoint = 0.5, 0.5
[expected]
species = 3
moduli = empty
)";

const char* const kFlatBundleP2 = R"(# Curved chart whose connection is still flat.
[meta]
name = flat_bundle_p2
p = 2
ambient = sphere
[christoffel]
G_0_1 = 0.5*u0
[metric]
g_0_0 = 1
g_1_1 = 1
g_2_2 = 1
[grid]
lo = 0.2, 0.2, 0.2
hi = 0.8, 0.8, 0.8
n = 7, 7, 7
basepoint = 0.5, 0.5, 0.5
[expected]
species = 1
moduli_dimension = 2
u0_buckets = 3
)";

const char* const kComplexPairP1 = R"(# One conjugate pair; coefficients respect the involution.
[meta]
name = complex_pair_p1
p = 1
pairs = 0-1
ambient = sphere
[christoffel]
G_0_1 = (0.3+0.2*i)*u1
G_1_0 = (0.3-0.2*i)*u0
[metric]
g_0_1 = 1
[grid]
lo = -0.3, -0.3
hi = 0.3, 0.3
n = 7, 7
basepoint = 0.1, 0.05
[expected]
species = 3
moduli = empty
)";

const char* const kCylinder = R"(# Unit circle with constant support: the round cylinder over it.
[meta]
name = cylinder
p = 0
ambient = sphere
[metric]
g_0_0 = 1
[immersion]
h_0 = cos(u0)
h_1 = sin(u0)
h_2 = 0
[support]
gamma = 1
[grid]
lo = 0
hi = 1
n = 9
basepoint = 0.5
)";

const char* const kCirclesPair = R"(# Circles in orthogonal planes of R^4.
[meta]
name = circles_pair
[curves]
signature = 1, 1, 1, 1
alpha1_0 = cos(u0)
alpha1_1 = sin(u0)
alpha2_2 = cos(u0)
alpha2_3 = sin(u0)
u = -1, 1
v = -1, 1
[expected]
shared_dimension = 0
)";

const char* const kExpPair = R"(# Cross products factor as exp(u) exp(v).
[meta]
name = exp_pair
[curves]
signature = 1, 1, 1
alpha1_0 = exp(u0)
alpha1_1 = u0
alpha2_0 = exp(u0)
alpha2_2 = u0
u = -1, 1
v = -1, 1
[expected]
shared_dimension = 1
shared_plane = 1
)";

const char* const kCosPair = R"(# The same circle twice; cross products are cos(u - v).
[meta]
name = cos_pair
[curves]
signature = 1, 1
alpha1_0 = cos(u0)
alpha1_1 = sin(u0)
alpha2_0 = cos(u0)
alpha2_1 = sin(u0)
u = -1, 1
v = -1, 1
[expected]
shared_dimension = 2
shared_plane = 2
)";

const char* const kLorentzPair = R"(# Unit timelike curves sharing a Lorentz plane.
[meta]
name = lorentz_pair
[curves]
signature = -1, 1, 1, 1
alpha1_0 = sqrt(2)*sinh(u0)
alpha1_1 = sqrt(2)*cosh(u0)
alpha1_2 = u0
alpha2_0 = 2*sinh(u0)
alpha2_1 = 2*cosh(u0)
alpha2_3 = sqrt(3)*u0
u = -1, 1
v = -1, 1
basepoint = 0, 0
[expected]
shared_dimension = 2
interval_lo = -2
interval_hi = -0.25
)";

const char* const kGuardPair = R"(# Both curves lie in the shared plane: the product of norms is 1.
[meta]
name = guard_pair
[curves]
signature = -1, 1
alpha1_0 = sinh(u0)
alpha1_1 = cosh(u0)
alpha2_0 = sinh(u0)
alpha2_1 = cosh(u0)
u = -1, 1
v = -1, 1
[expected]
interval = empty
)";

const char* const kDegeneratePair = R"(# Spans contain a null direction.
[meta]
name = degenerate_pair
[curves]
signature = -1, 1, 1
alpha1_0 = u0
alpha1_1 = u0
alpha1_2 = u0^2
alpha2_0 = u0
alpha2_1 = u0
alpha2_2 = u0^2
u = -1, 1
v = -1, 1
[expected]
split = degenerate
)";

const char* const kVaryingPair = R"(# Projected norm of the first curve is -cosh(u)^2.
[meta]
name = varying_pair
[curves]
signature = -1, 1, 1, 1
alpha1_0 = u0/2+sinh(2*u0)/4
alpha1_1 = cosh(2*u0)/4
alpha1_2 = cosh(u0)
alpha2_0 = 2*sinh(u0)
alpha2_1 = 2*cosh(u0)
alpha2_3 = sqrt(3)*u0
u = 0.2, 1
v = -1, 1
basepoint = 0.5, 0
[expected]
shared_dimension = 2
)";

}  // namespace

const std::vector<GalleryEntry>& gallery() {
  static const std::vector<GalleryEntry> entries{
      {"flat_torus_p1", kFlatTorusP1},       {"flat_torus_p2", kFlatTorusP2},
      {"flat_torus_p3", kFlatTorusP3},       {"intersection_p1", kIntersectionP1},
      {"second_species_p1", kSecondSpeciesP1}, {"full_rank_p1", kFullRankP1},
      {"flat_bundle_p2", kFlatBundleP2},     {"complex_pair_p1", kComplexPairP1},
      {"cylinder", kCylinder},               {"circles_pair", kCirclesPair},
      {"exp_pair", kExpPair},                {"cos_pair", kCosPair},
      {"lorentz_pair", kLorentzPair},        {"guard_pair", kGuardPair},
      {"degenerate_pair", kDegeneratePair},  {"varying_pair", kVaryingPair},
  };
  return entries;
}

const GalleryEntry& gallery_entry(const std::string& name) {
  for (const auto& e : gallery())
    if (e.name == name) return e;
  throw std::out_of_range("no gallery entry named '" + name + "'");
}

ChartFile gallery_chart(const std::string& name) { return parse_chart_file(gallery_entry(name).text); }

}  // namespace gdef
