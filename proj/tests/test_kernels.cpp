#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbll/admissibility.hpp"
#include "rbll/kernels.hpp"
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

const std::vector<double> e11x{1, 1, 1};
const std::vector<double> epi{geom::kPi, geom::kPi, geom::kPi};

}  // namespace

TEST_CASE("K_3 for d=1 is the interval convolution 1-|t|") {
  auto fam = LinearFamily::riesz_sobolev();
  CHECK(eval_K(fam, e11x, 1, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-10));
  for (double t : {0.0, 0.25, 0.9}) {
    CHECK(eval_K(fam, e11x, 1, 2, t) ==
          doctest::Approx(std::max(0.0, 1.0 - t)).epsilon(1e-10));
  }
  CHECK(eval_K(fam, e11x, 1, 2, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("K_3 for d=2 matches the lens-area formula") {
  auto fam = LinearFamily::riesz_sobolev(2);
  for (double t : {0.1, 0.5, 1.0, 1.9}) {
    CHECK(eval_K(fam, epi, 2, 2, t) ==
          doctest::Approx(lens_area(t)).epsilon(1e-7));
  }
  CHECK(eval_K(fam, epi, 2, 2, 2.5) == doctest::Approx(0.0));
}

TEST_CASE("K_1 for d=1, m=3 is an exact polygon slice area") {
  auto fam = LinearFamily::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}});
  const std::vector<double> e{1, 1, 1, 2};
  // j = 3 (the sum map): K(t) = |{w in [-1/2,1/2]^2 : |t - w1 - w2| <= 1/2}|
  CHECK(eval_K(fam, e, 1, 3, 0.0) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(eval_K(fam, e, 1, 3, 1.0) == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(eval_K(fam, e, 1, 3, 1.5) == doctest::Approx(0.0));
}

TEST_CASE("left derivative at the boundary: d=1 and d=2 closed forms") {
  auto fam1 = LinearFamily::riesz_sobolev();
  LeftDerivativeEstimate d1 = left_derivative(fam1, e11x, 1, 2);
  CHECK(d1.applicable);
  CHECK(d1.t0 == doctest::Approx(0.5));
  CHECK(d1.value == doctest::Approx(-1.0).epsilon(0.05));

  auto fam2 = LinearFamily::riesz_sobolev(2);
  LeftDerivativeEstimate d2 = left_derivative(fam2, epi, 2, 2);
  CHECK(d2.applicable);
  CHECK(d2.t0 == doctest::Approx(1.0));
  CHECK(d2.value == doctest::Approx(-std::sqrt(3.0)).epsilon(0.01));
}

TEST_CASE("flat kernel near zero has vanishing derivative at the origin") {
  // fat third set: K_1(t) is constant near t = 0
  auto fam = LinearFamily::riesz_sobolev();
  const std::vector<double> e{1, 3, 1};
  const double k0 = eval_K(fam, e, 1, 2, 0.0);
  const double kh = eval_K(fam, e, 1, 2, 0.05);
  CHECK(k0 == doctest::Approx(1.0).epsilon(1e-10));  // plateau of the convolution
  CHECK((kh - k0) / 0.05 == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("left derivative outside the support is not applicable") {
  auto fam = LinearFamily::riesz_sobolev();
  const std::vector<double> e{1, 1, 5};  // boundary point e_3/2 = 2.5 > support 1
  LeftDerivativeEstimate est = left_derivative(fam, e, 1, 2);
  CHECK(!est.applicable);
}

TEST_CASE("gamma: sqrt(3) for the symmetric disk instance, equal across j") {
  auto fam = LinearFamily::riesz_sobolev(2);
  GammaEstimate g3 = gamma(fam, epi, 2, 2);
  CHECK(g3.two_sided_ok);
  CHECK(g3.gamma == doctest::Approx(std::sqrt(3.0)).epsilon(0.01));
  GammaEstimate g1 = gamma(fam, epi, 2, 0);
  GammaEstimate g2 = gamma(fam, epi, 2, 1);
  CHECK(g1.gamma == doctest::Approx(g3.gamma).epsilon(0.01));
  CHECK(g2.gamma == doctest::Approx(g3.gamma).epsilon(0.01));
}

TEST_CASE("gamma: scaled instance agrees with an independent finite difference") {
  auto fam = LinearFamily::riesz_sobolev(2);
  const double r3 = 1.2;
  const std::vector<double> e{geom::kPi, geom::kPi, geom::kPi * r3 * r3};
  GammaEstimate g = gamma(fam, e, 2, 2);
  const double h = 1e-4;
  const double fd =
      (eval_K(fam, e, 2, 2, r3 + h) - eval_K(fam, e, 2, 2, r3 - h)) / (2 * h);
  CHECK(g.gamma == doctest::Approx(-fd).epsilon(0.01));
}

TEST_CASE("kernel profiles are nonincreasing and log-concave on the support") {
  struct Case {
    LinearFamily fam;
    std::vector<double> e;
    int d, j;
  };
  std::vector<Case> cases;
  cases.push_back({LinearFamily::riesz_sobolev(), {1, 1, 1}, 1, 2});
  cases.push_back({LinearFamily::riesz_sobolev(2), epi, 2, 2});
  for (const Case& c : cases) {
    KernelProfile p = kernel_profile(c.fam, c.e, c.d, c.j, 128);
    double prev = p.value[0];
    for (std::size_t q = 1; q < p.value.size(); ++q) {
      CHECK(p.value[q] <= prev + 1e-9);
      prev = p.value[q];
    }
    for (std::size_t q = 1; q + 1 < p.value.size(); ++q) {
      if (p.value[q - 1] <= 0 || p.value[q] <= 0 || p.value[q + 1] <= 0) continue;
      const double second = std::log(p.value[q - 1]) - 2 * std::log(p.value[q]) +
                            std::log(p.value[q + 1]);
      CHECK(second <= 1e-6);
    }
  }
}

TEST_CASE("pair kernel for m=2 is a pure indicator with unit Jacobian") {
  auto fam = LinearFamily::riesz_sobolev(2);
  PairKernel pk = make_pair_kernel(fam, epi, 2, 0, 1);
  CHECK(pk.c == doctest::Approx(1.0));
  CHECK(pk.fiber_rest.empty());
  CHECK(pk.span_pair == std::vector<int>{2});
  const double x[2] = {0.3, 0.1}, y[2] = {0.2, -0.3};  // |x+y| < 1
  CHECK(pk.eval({x, 2}, {y, 2}) == doctest::Approx(1.0));
  const double far[2] = {50, 0};
  CHECK(pk.eval({far, 2}, {y, 2}) == doctest::Approx(0.0));
}

TEST_CASE("pair kernel invariance under simultaneous rotation") {
  auto fam = LinearFamily::riesz_sobolev(2);
  const std::vector<double> e{geom::kPi, geom::kPi, geom::kPi * 1.44};
  PairKernel pk = make_pair_kernel(fam, e, 2, 0, 2);
  RngStream rng(3, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = rng.uniform(0, 2 * geom::kPi);
    const double R[2][2] = {{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}};
    double x[2], y[2], Rx[2], Ry[2];
    for (int k = 0; k < 2; ++k) {
      x[k] = rng.uniform(-1.5, 1.5);
      y[k] = rng.uniform(-1.5, 1.5);
    }
    for (int k = 0; k < 2; ++k) {
      Rx[k] = R[k][0] * x[0] + R[k][1] * x[1];
      Ry[k] = R[k][0] * y[0] + R[k][1] * y[1];
    }
    CHECK(pk.eval({x, 2}, {y, 2}) == doctest::Approx(pk.eval({Rx, 2}, {Ry, 2})));
  }
}

TEST_CASE("m=3 pair kernel is a disk-indicator convolution of x+y") {
  auto fam = LinearFamily::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}, 2);
  const std::vector<double> e{geom::kPi, geom::kPi, geom::kPi, geom::kPi};
  PairKernel pk = make_pair_kernel(fam, e, 2, 0, 1);
  CHECK(pk.span_pair.empty());
  CHECK(pk.fiber_rest.size() == 2);
  for (double t : {0.0, 0.5, 1.3, 1.9}) {
    const double x[2] = {t / 2, 0}, y[2] = {t / 2, 0};  // x + y = (t, 0)
    CHECK(pk.eval({x, 2}, {y, 2}) == doctest::Approx(lens_area(t)).epsilon(1e-6));
  }
  const double xf[2] = {10, 0}, y0[2] = {0, 0};
  CHECK(pk.eval({xf, 2}, {y0, 2}) == doctest::Approx(0.0));
}

TEST_CASE("small-measure lemma: angular measure of near-degenerate pairs is O(delta)") {
  // |u(t1) + u(t2)| <= delta on the unit circle pair: the measure scales
  // linearly in delta (Monte Carlo slope fit in log delta)
  RngStream rng(11, 0);
  const int n = 200000;
  std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  std::vector<double> fractions;
  for (double delta : deltas) {
    int hits = 0;
    RngStream local(11, 0);
    for (int s = 0; s < n; ++s) {
      const double t1 = local.uniform(0, 2 * geom::kPi);
      const double t2 = local.uniform(0, 2 * geom::kPi);
      const double vx = std::cos(t1) + std::cos(t2);
      const double vy = std::sin(t1) + std::sin(t2);
      if (std::hypot(vx, vy) <= delta) ++hits;
    }
    fractions.push_back(static_cast<double>(hits) / n);
  }
  // slope of log fraction vs log delta close to 1, and fraction/delta bounded
  const double slope = (std::log(fractions[0]) - std::log(fractions[3])) /
                       (std::log(deltas[0]) - std::log(deltas[3]));
  CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
  for (std::size_t k = 0; k < deltas.size(); ++k)
    CHECK(fractions[k] / deltas[k] < 1.0);
}
