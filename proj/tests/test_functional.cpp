#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbll/functional.hpp"
#include "rbll/rng.hpp"

using namespace rbll;

namespace {

double lens_area(double t, double r1 = 1.0, double r2 = 1.0) {
  if (t >= r1 + r2) return 0.0;
  if (t <= std::abs(r1 - r2)) {
    const double r = std::min(r1, r2);
    return geom::kPi * r * r;
  }
  const double d1 = (t * t + r1 * r1 - r2 * r2) / (2 * t);
  const double d2 = t - d1;
  return r1 * r1 * std::acos(d1 / r1) - d1 * std::sqrt(r1 * r1 - d1 * d1) +
         r2 * r2 * std::acos(d2 / r2) - d2 * std::sqrt(r2 * r2 - d2 * d2);
}

// radial quadrature oracle for Phi(E*) of the d=2 Riesz-Sobolev instance:
// int_0^1 lens(t) 2 pi t dt
double phi_star_rs2d_oracle() {
  return geom::adaptive_simpson(
      [](double t) { return lens_area(t) * 2 * geom::kPi * t; }, 0.0, 1.0, 1e-12);
}

const std::vector<double> epi{geom::kPi, geom::kPi, geom::kPi};

geom::Interval centered(double len) { return {-0.5 * len, 0.5 * len}; }

}  // namespace

TEST_CASE("exact interval functional: hexagon, shifted, and redundant cases") {
  auto fam = LinearFamily::riesz_sobolev();
  {
    const geom::Interval I[3] = {centered(1), centered(1), centered(1)};
    CHECK(eval_phi_intervals_exact(fam, {I, 3}) == doctest::Approx(0.75).epsilon(1e-12));
  }
  {
    double prev = 0.76;
    for (double c : {0.0, 0.2, 0.5, 0.9}) {
      const geom::Interval I[3] = {centered(1), centered(1), {c - 0.5, c + 0.5}};
      const double v = eval_phi_intervals_exact(fam, {I, 3});
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  {
    const geom::Interval I[3] = {centered(1), centered(1), centered(3)};
    CHECK(eval_phi_intervals_exact(fam, {I, 3}) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    const geom::Interval I[3] = {centered(1), centered(1), {5, 6}};
    CHECK(eval_phi_intervals_exact(fam, {I, 3}) == doctest::Approx(0.0));
  }
}

TEST_CASE("Monte Carlo matches the exact hexagon value within 3 stderr and 1%") {
  auto fam = LinearFamily::riesz_sobolev();
  MeasureSpec spec = make_measure_spec(std::vector<double>{1, 1, 1}, 1);
  SetTuple star = make_ball_tuple(spec);
  MCEstimate est = eval_phi_mc(fam, star, 1u << 20, 42);
  CHECK(std::abs(est.value - 0.75) < 3 * est.std_error);
  CHECK(std::abs(est.value - 0.75) / 0.75 < 0.01);
  CHECK(eval_phi_d1_exact(fam, star) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("empty component forces Phi = 0") {
  auto fam = LinearFamily::riesz_sobolev();
  MeasureSpec spec = make_measure_spec(std::vector<double>{1, 1, 1}, 1);
  SetTuple t = make_ball_tuple(spec);
  GridSet g;
  g.d = 1;
  g.lo = {-1, 0, 0};
  g.h = 0.125;
  g.n = {16, 1, 1};
  g.cell.assign(16, 0);
  t.sets[2] = g;
  CHECK(eval_phi_mc(fam, t, 1u << 12, 3).value == doctest::Approx(0.0));
}

TEST_CASE("d=2 ball tuple: MC agrees with the radial lens quadrature oracle") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  SetTuple star = make_ball_tuple(spec);
  const double oracle = phi_star_rs2d_oracle();
  MCEstimate est = eval_phi_mc(fam, star, 1u << 20, 7);
  CHECK(std::abs(est.value - oracle) < 3 * est.std_error);
}

TEST_CASE("fiber engine agrees with the oracle and with MC, at far smaller error") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  SetTuple star = make_ball_tuple(spec);
  FiberEstimate fe = eval_phi_fiber(fam, star, 128);
  const double oracle = phi_star_rs2d_oracle();
  CHECK(std::abs(fe.value - oracle) < 1e-3);
  MCEstimate mc = eval_phi_mc(fam, star, 1u << 20, 8);
  CHECK(std::abs(fe.value - mc.value) < 3 * mc.std_error + fe.error);
  CHECK(fe.error < mc.std_error);
}

TEST_CASE("fiber engine on a perturbed tuple cross-validates against MC") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  HarmonicTuple G;
  G.nu = 3;
  G.comp.assign(3, {std::sqrt(geom::kPi), 0.0});
  SetTuple E = radial_from_harmonic(G, 0.05, spec);
  FiberEstimate fe = eval_phi_fiber(fam, E, 128);
  MCEstimate mc = eval_phi_mc(fam, E, 1u << 20, 9);
  CHECK(std::abs(fe.value - mc.value) < 3 * mc.std_error + fe.error);
}

TEST_CASE("deficit of the ball tuple is zero; orbit members are flat") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  {
    SetTuple star = make_ball_tuple(spec);
    DeficitEstimate de = deficit(fam, star, spec, Engine::fiber);
    CHECK(std::abs(de.value) < 1e-9);
  }
  {
    // translated balls: E_j = B_j + L_j(v)
    SetTuple t = make_ball_tuple(spec);
    const double v[4] = {0.25, -0.1, 0.05, 0.2};
    for (int j = 0; j < 3; ++j) {
      auto& el = std::get<Ellipsoid>(t.sets[j]);
      for (int k = 0; k < 2; ++k)
        el.c[k] = fam.coef(j, 0) * v[k] + fam.coef(j, 1) * v[2 + k];
    }
    DeficitOptions opts;
    opts.n = 1u << 20;
    DeficitEstimate de = deficit(fam, t, spec, Engine::mc, opts);
    CHECK(std::abs(de.value) <= 3 * de.error);
  }
  {
    // diagonal SL(2) shear of every ball
    SetTuple t = make_ball_tuple(spec);
    const std::array<double, 9> psi{1.2, 0.3, 0, 0.0, 1.0 / 1.2, 0, 0, 0, 1};
    for (int j = 0; j < 3; ++j) std::get<Ellipsoid>(t.sets[j]).psi = psi;
    DeficitOptions opts;
    opts.n = 1u << 20;
    DeficitEstimate de = deficit(fam, t, spec, Engine::mc, opts);
    CHECK(std::abs(de.value) <= 3 * de.error);
  }
}

TEST_CASE("deficit rejects measure mismatches") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  SetTuple t = make_ball_tuple(spec);
  std::get<Ellipsoid>(t.sets[0]).r = 1.3;
  CHECK_THROWS_AS(deficit(fam, t, spec, Engine::mc), std::invalid_argument);
}

TEST_CASE("BLL inequality on random d=1 tuples (exact engine)") {
  auto fam = LinearFamily::riesz_sobolev();
  RngStream rng(31, 0);
  for (int trial = 0; trial < 50; ++trial) {
    SetTuple E;
    E.d = 1;
    std::vector<double> e;
    for (int j = 0; j < 3; ++j) {
      Ellipsoid el;
      el.r = rng.uniform(0.3, 1.2);
      el.c = {rng.uniform(-0.5, 0.5), 0, 0};
      E.sets.emplace_back(el);
      e.push_back(2 * el.r);
    }
    MeasureSpec spec = make_measure_spec(e, 1);
    DeficitEstimate de = deficit(fam, E, spec, Engine::exact);
    CHECK(de.value >= -1e-12);
  }
}

TEST_CASE("translation invariance of Phi within statistical and raster error") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  HarmonicTuple G;
  G.nu = 2;
  G.comp.assign(3, {0.4, 0.7});
  SetTuple E = radial_from_harmonic(G, 0.04, spec);
  MCEstimate base = eval_phi_mc(fam, E, 1u << 19, 5);

  const double v[4] = {0.2, 0.1, -0.15, 0.05};
  SetTuple T;
  T.d = 2;
  const double h = grid_default_h(spec);
  for (int j = 0; j < 3; ++j) {
    Box box = bounding_box(2, E.sets[j]);
    double cj[2];
    for (int k = 0; k < 2; ++k) {
      cj[k] = fam.coef(j, 0) * v[k] + fam.coef(j, 1) * v[2 + k];
      box.lo[k] += cj[k] - 2 * h;
      box.hi[k] += cj[k] + 2 * h;
    }
    GridSet g;
    g.d = 2;
    g.h = h;
    for (int k = 0; k < 2; ++k) {
      g.lo[k] = box.lo[k];
      g.n[k] = static_cast<int>(std::ceil((box.hi[k] - box.lo[k]) / h));
    }
    g.n[2] = 1;
    g.cell.assign(static_cast<std::size_t>(g.n[0]) * g.n[1], 0);
    double x[3];
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int ix = 0; ix < g.n[0]; ++ix) {
        g.center(ix, iy, 0, x);
        const double y[2] = {x[0] - cj[0], x[1] - cj[1]};
        if (contains(2, E.sets[j], {y, 2})) g.cell[g.index(ix, iy, 0)] = 1;
      }
    T.sets.emplace_back(std::move(g));
  }
  MCEstimate shifted = eval_phi_mc(fam, T, 1u << 19, 6);
  CHECK(std::abs(shifted.value - base.value) <
        3 * std::hypot(base.std_error, shifted.std_error) + 0.05);
}

TEST_CASE("dilation covariance: Phi_{r(L)}(E) = Phi_L(r(E))") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  SetTuple E = make_ball_tuple(spec);
  std::get<Ellipsoid>(E.sets[2]).r = 1.1;
  const double rr[3] = {1.0, 1.0, 2.0};
  auto famR = apply_dilation_action(fam, {rr, 3});
  MCEstimate lhs = eval_phi_mc(famR, E, 1u << 20, 12);
  SetTuple rE = E;
  for (int j = 0; j < 3; ++j) {
    auto& el = std::get<Ellipsoid>(rE.sets[j]);
    el.r /= rr[j];
    for (int k = 0; k < 2; ++k) el.c[k] /= rr[j];
  }
  MCEstimate rhs = eval_phi_mc(fam, rE, 1u << 20, 12);
  CHECK(std::abs(lhs.value - rhs.value) <
        3 * std::hypot(lhs.std_error, rhs.std_error));
}

TEST_CASE("glm action scales Phi by |det A|^{-d}") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  SetTuple E = make_ball_tuple(spec);
  const std::vector<std::vector<double>> A{{2, 1}, {0, 1}};  // det 2
  auto famA = apply_glm_action(fam, A);
  MCEstimate lhs = eval_phi_mc(famA, E, 1u << 20, 13);
  MCEstimate rhs = eval_phi_mc(fam, E, 1u << 20, 13);
  const double scale = std::pow(2.0, -2);
  CHECK(std::abs(lhs.value - scale * rhs.value) <
        3 * std::hypot(lhs.std_error, scale * rhs.std_error));
}

TEST_CASE("MC estimates are deterministic given the seed") {
  auto fam = LinearFamily::riesz_sobolev(2);
  MeasureSpec spec = make_measure_spec(epi, 2);
  SetTuple star = make_ball_tuple(spec);
  MCEstimate a = eval_phi_mc(fam, star, 1u << 16, 77);
  MCEstimate b = eval_phi_mc(fam, star, 1u << 16, 77);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}
