#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbll/kernels.hpp"
#include "rbll/stability.hpp"

using namespace rbll;

namespace {

const std::vector<double> epi{geom::kPi, geom::kPi, geom::kPi};

std::vector<double> srange(double lo, double hi, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(lo + (hi - lo) * k / (n - 1));
  return out;
}

}  // namespace

TEST_CASE("symmetry direction tuples match their closed forms") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  {
    // translation v = e1 of the first block: G_j = r_j (L_j v)_1 cos(theta)
    std::vector<double> v(4, 0.0);
    v[0] = 1.0;
    HarmonicTuple G = symmetry_direction_tuple(SymmetryKind::translation, v, fam, spec);
    CHECK(G.nu == 1);
    for (int j = 0; j < 3; ++j) {
      const double expect = std::sqrt(geom::kPi) * spec.r[j] * fam.coef(j, 0);
      CHECK(G.comp[j][0] == doctest::Approx(expect).epsilon(1e-3));
      CHECK(G.comp[j][1] == doctest::Approx(0.0).epsilon(1e-6));
    }
  }
  {
    // diag(1,-1) shear generator: a pure nu=2 tuple, cos(2 theta) phase
    const double A[3] = {1.0, 0.0, 0.0};
    HarmonicTuple G = symmetry_direction_tuple(SymmetryKind::shear, {A, 3}, fam, spec);
    CHECK(G.nu == 2);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(G.comp[j][0]) > 0.1);  // nonzero cos component
      CHECK(G.comp[j][1] == doctest::Approx(0.0).epsilon(1e-6));
    }
    // exact first-order profile of exp(tA)(B): F = t r^2 cos(2 theta) + O(t^2)
    const double expect = std::sqrt(geom::kPi) * spec.r[0] * spec.r[0];
    CHECK(G.comp[0][0] == doctest::Approx(expect).epsilon(1e-2));
  }
  {
    std::vector<double> v(4, 0.0);
    HarmonicTuple G = symmetry_direction_tuple(SymmetryKind::translation, v, fam, spec);
    CHECK(G.norm2() == doctest::Approx(0.0));
  }
}

TEST_CASE("balanced nu=3 deficit curve fits the optimal exponent 2") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  HarmonicTuple G;
  G.nu = 3;
  G.comp.assign(3, {std::sqrt(geom::kPi), 0.0});
  StabilityOptions opts;
  opts.deficit.fiber_nodes = 128;
  DeficitCurve curve =
      deficit_curve(fam, spec, G, srange(0.02, 0.1, 5), Engine::fiber, opts);
  REQUIRE(curve.fit.ok);
  CHECK(curve.fit.exponent == doctest::Approx(2.0).epsilon(0.125));
  CHECK(curve.fit.c > 0);
  for (const DeficitPoint& p : curve.points) CHECK(p.deficit > -3 * p.error);

  // second-order prediction: deficit ~ s^2/2 sum gamma_j r_j^{1-d} ||G_j||^2
  // (Q vanishes at nu=3 for this instance)
  const double coef = 0.5 * std::sqrt(3.0) * G.norm2();
  for (const DeficitPoint& p : curve.points)
    CHECK(p.deficit == doctest::Approx(coef * p.s * p.s).epsilon(0.1));
}

TEST_CASE("translation direction: deficit is flat at order s^2") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  std::vector<double> v(4, 0.0);
  v[0] = 0.7;
  v[3] = -0.4;
  HarmonicTuple G = symmetry_direction_tuple(SymmetryKind::translation, v, fam, spec);
  StabilityOptions opts;
  opts.deficit.n = 1u << 19;
  DeficitCurve curve =
      deficit_curve(fam, spec, G, srange(0.02, 0.08, 4), Engine::mc, opts);
  for (const DeficitPoint& p : curve.points) {
    CHECK(std::abs(p.deficit) <= 3 * p.error);
  }
}

TEST_CASE("shear direction via the expansion: predicted s^2 coefficient vanishes") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  const double A[3] = {1.0, 0.0, 0.0};
  HarmonicTuple G = symmetry_direction_tuple(SymmetryKind::shear, {A, 3}, fam, spec);
  StabilityOptions opts;
  const double Q = eval_Q(G, fam, spec.e, 2, opts.spectral);
  double gterm = 0;
  for (int j = 0; j < 3; ++j) {
    GammaEstimate g = gamma(fam, spec.e, 2, j);
    gterm += g.gamma * std::pow(spec.r[j], -1) * G.norm2(j);
  }
  // symmetry saturation: Q(G) = 1/2 sum w_j ||G_j||^2 for orbit directions
  CHECK(Q == doctest::Approx(0.5 * gterm).epsilon(0.01));

  // measured deficits stay o(s^2): exponent >= 2.7 or below the noise floor
  DeficitCurve curve =
      deficit_curve(fam, spec, G, srange(0.03, 0.09, 4), Engine::fiber, opts);
  if (curve.fit.ok) CHECK(curve.fit.exponent >= 2.7);
}

TEST_CASE("expansion check: residual beyond s^2 decays for a balanced tuple") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  HarmonicTuple G;
  G.nu = 3;
  G.comp.assign(3, {std::sqrt(geom::kPi) * 0.8, 0.3});
  StabilityOptions opts;
  ExpansionReport rep = expansion_check(fam, spec, G, srange(0.04, 0.12, 5), opts);
  CHECK(rep.Q == doctest::Approx(0.0).epsilon(1e-9));  // nu=3 couplings vanish
  CHECK(rep.slope_ok);
  if (!rep.below_noise) CHECK(rep.residual_slope > 2.5);
}

TEST_CASE("expansion check: zero tuple has exactly zero residual") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  HarmonicTuple G;
  G.nu = 2;
  G.comp.assign(3, {0.0, 0.0});
  StabilityOptions opts;
  ExpansionReport rep = expansion_check(fam, spec, G, srange(0.02, 0.06, 3), opts);
  CHECK(rep.gamma_term == doctest::Approx(0.0));
  CHECK(rep.Q == doctest::Approx(0.0));
  for (const ExpansionPoint& p : rep.points)
    CHECK(p.residual == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit window drops noise-dominated points") {
  std::vector<DeficitPoint> pts;
  for (double s : {0.01, 0.02, 0.04, 0.08, 0.16}) {
    const double d = 3.0 * s * s;
    pts.push_back({s, d, s < 0.02 ? d : 0.01 * d});  // first point drowned
  }
  PowerFit fit = fit_power_law(pts);
  REQUIRE(fit.ok);
  CHECK(fit.used == 4);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fit.c == doctest::Approx(3.0).epsilon(1e-6));

  std::vector<DeficitPoint> noise;
  for (double s : {0.01, 0.02, 0.04}) noise.push_back({s, 1e-9, 1e-3});
  CHECK(!fit_power_law(noise).ok);
}

TEST_CASE("no direction fits an exponent below 2 (consistency with stability)") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  StabilityOptions opts;
  for (int nu : {2, 3, 4}) {
    HarmonicTuple G;
    G.nu = nu;
    G.comp.assign(3, {0.6, nu % 2 ? 0.5 : -0.4});
    if (nu == 2) G.comp[0] = {0.0, 0.0};  // keep the tuple balanced
    DeficitCurve curve =
        deficit_curve(fam, spec, G, srange(0.02, 0.08, 4), Engine::fiber, opts);
    if (curve.fit.ok)
      CHECK(curve.fit.exponent > 1.8 - 3 * curve.fit.exponent_stderr);
  }
}
