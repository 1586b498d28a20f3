#include "rbll/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace rbll::geom {

double unit_ball_volume(int d) {
  switch (d) {
    case 1:
      return 2.0;
    case 2:
      return kPi;
    case 3:
      return 4.0 * kPi / 3.0;
    default:
      throw std::invalid_argument("unit_ball_volume: d must be 1, 2 or 3");
  }
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.empty() || b.empty()) return {};
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  return r.empty() ? Interval{} : r;
}

double union_length(std::vector<Interval> v) {
  std::erase_if(v, [](const Interval& i) { return i.empty(); });
  std::sort(v.begin(), v.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double total = 0, cur_lo = 0, cur_hi = -1;
  bool open = false;
  for (const Interval& i : v) {
    if (!open) {
      cur_lo = i.lo;
      cur_hi = i.hi;
      open = true;
    } else if (i.lo <= cur_hi) {
      cur_hi = std::max(cur_hi, i.hi);
    } else {
      total += cur_hi - cur_lo;
      cur_lo = i.lo;
      cur_hi = i.hi;
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

double polygon_area(const Polygon& p) {
  if (p.size() < 3) return 0.0;
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Pt2& a = p[i];
    const Pt2& b = p[(i + 1) % p.size()];
    s += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(s);
}

Polygon clip_halfplane(const Polygon& p, double a, double b, double c) {
  Polygon out;
  const std::size_t n = p.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Pt2& cur = p[i];
    const Pt2& nxt = p[(i + 1) % n];
    const double fc = a * cur[0] + b * cur[1] - c;
    const double fn = a * nxt[0] + b * nxt[1] - c;
    if (fc <= 0) out.push_back(cur);
    if ((fc < 0 && fn > 0) || (fc > 0 && fn < 0)) {
      const double t = fc / (fc - fn);
      out.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
    }
  }
  return out;
}

Polygon box_polygon(double xlo, double xhi, double ylo, double yhi) {
  return {{xlo, ylo}, {xhi, ylo}, {xhi, yhi}, {xlo, yhi}};
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  if (!(a < b)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

void gauss_legendre(int n, double lo, double hi, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  // Newton on P_n with the Chebyshev initial guess; standard symmetric rule.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1 - x * x) * pp * pp);
    nodes[i] = x;
    nodes[n - 1 - i] = -x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    nodes[i] = mid - half * nodes[i];
    weights[i] *= half;
  }
}

double ball_intersection_volume(int d, std::span<const Ball> balls, double tol) {
  if (balls.empty()) throw std::invalid_argument("ball_intersection_volume: no balls");
  double lo = -1e300, hi = 1e300;
  for (const Ball& b : balls) {
    if (b.r <= 0) return 0.0;
    lo = std::max(lo, b.c[0] - b.r);
    hi = std::min(hi, b.c[0] + b.r);
  }
  if (!(lo < hi)) return 0.0;
  if (d == 1) return hi - lo;

  // Slice at x_1 = t: each ball becomes a (d-1)-ball of radius
  // sqrt(r^2 - (t-c_1)^2) about the projected center.
  auto slice = [&](double t) -> double {
    std::vector<Ball> sub(balls.size());
    for (std::size_t k = 0; k < balls.size(); ++k) {
      const Ball& b = balls[k];
      const double dt = t - b.c[0];
      const double rr = b.r * b.r - dt * dt;
      if (rr <= 0) return 0.0;
      sub[k].c = {b.c[1], b.c[2], 0.0};
      sub[k].r = std::sqrt(rr);
    }
    return ball_intersection_volume(d - 1, sub, tol);
  };
  return adaptive_simpson(slice, lo, hi, tol);
}

}  // namespace rbll::geom
