#include "rbll/functional.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rbll/rng.hpp"

namespace rbll {

Engine engine_from_string(const std::string& s) {
  if (s == "mc") return Engine::mc;
  if (s == "fiber") return Engine::fiber;
  if (s == "exact") return Engine::exact;
  throw std::invalid_argument("unknown engine: " + s);
}

std::string to_string(Engine e) {
  switch (e) {
    case Engine::mc: return "mc";
    case Engine::fiber: return "fiber";
    default: return "exact";
  }
}

namespace {

struct SampleFrame {
  std::vector<int> Jp;          // independent subset, size m
  std::vector<int> rest;        // remaining indices
  double jac = 1;               // |det S|^{-d}
  Eigen::MatrixXd C;            // rest x m coefficients: L_i = sum_k C(i,k) y_k
};

SampleFrame make_frame(const LinearFamily& fam, int d) {
  SampleFrame f;
  f.Jp = select_independent_subset(fam).first;
  const int m = fam.m;
  Eigen::MatrixXd S(m, m);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) S(k, i) = fam.coef(f.Jp[k], i);
  f.jac = std::pow(std::abs(S.determinant()), -d);
  Eigen::MatrixXd Sinv = S.inverse();
  for (int i = 0; i < fam.J(); ++i)
    if (std::find(f.Jp.begin(), f.Jp.end(), i) == f.Jp.end()) f.rest.push_back(i);
  f.C.resize(static_cast<int>(f.rest.size()), m);
  for (std::size_t q = 0; q < f.rest.size(); ++q) {
    Eigen::RowVectorXd a(m);
    for (int i = 0; i < m; ++i) a(i) = fam.coef(f.rest[q], i);
    f.C.row(static_cast<int>(q)) = a * Sinv;
  }
  return f;
}

}  // namespace

MCEstimate eval_phi_mc(const LinearFamily& fam, const SetTuple& E,
                       std::uint64_t n, std::uint64_t seed) {
  const int d = E.d, m = fam.m;
  if (E.J() != fam.J()) throw std::invalid_argument("eval_phi_mc: tuple size mismatch");
  SampleFrame f = make_frame(fam, d);

  MCEstimate est;
  est.n = n;
  est.seed = seed;

  std::vector<Box> boxes(m);
  double boxvol = 1;
  for (int k = 0; k < m; ++k) {
    boxes[k] = bounding_box(d, E.sets[f.Jp[k]]);
    for (int q = 0; q < d; ++q) {
      const double w = boxes[k].hi[q] - boxes[k].lo[q];
      if (!(w > 0)) return est;  // empty set: Phi = 0
      boxvol *= w;
    }
  }
  est.boxvol = boxvol;

  RngStream rng(seed, 0);
  std::uint64_t hits = 0;
  std::vector<double> y(static_cast<std::size_t>(m) * d);
  double li[3];
  for (std::uint64_t s = 0; s < n; ++s) {
    for (int k = 0; k < m; ++k)
      for (int q = 0; q < d; ++q)
        y[static_cast<std::size_t>(k) * d + q] = rng.uniform(boxes[k].lo[q], boxes[k].hi[q]);
    bool in = true;
    for (int k = 0; k < m && in; ++k)
      in = contains(d, E.sets[f.Jp[k]],
                    {y.data() + static_cast<std::size_t>(k) * d, static_cast<std::size_t>(d)});
    for (std::size_t q = 0; q < f.rest.size() && in; ++q) {
      for (int c = 0; c < d; ++c) {
        double v = 0;
        for (int k = 0; k < m; ++k)
          v += f.C(static_cast<int>(q), k) * y[static_cast<std::size_t>(k) * d + c];
        li[c] = v;
      }
      in = contains(d, E.sets[f.rest[q]], {li, static_cast<std::size_t>(d)});
    }
    if (in) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double scale = f.jac * boxvol;
  est.value = scale * p;
  est.std_error = scale * std::sqrt(std::max(0.0, p * (1 - p)) / static_cast<double>(n));
  return est;
}

double eval_phi_intervals_exact(const LinearFamily& fam,
                                std::span<const geom::Interval> intervals) {
  if (fam.m != 2)
    throw std::invalid_argument("eval_phi_intervals_exact: m = 2 only");
  if (static_cast<int>(intervals.size()) != fam.J())
    throw std::invalid_argument("eval_phi_intervals_exact: interval count mismatch");
  for (const auto& I : intervals)
    if (I.empty()) return 0.0;

  const std::vector<int> Jp = select_independent_subset(fam).first;
  const int j1 = Jp[0], j2 = Jp[1];
  const double a1 = fam.coef(j1, 0), b1 = fam.coef(j1, 1);
  const double a2 = fam.coef(j2, 0), b2 = fam.coef(j2, 1);
  const double det = a1 * b2 - a2 * b1;

  auto corner = [&](double v1, double v2) -> geom::Pt2 {
    return {(v1 * b2 - v2 * b1) / det, (a1 * v2 - a2 * v1) / det};
  };
  geom::Polygon poly{corner(intervals[j1].lo, intervals[j2].lo),
                     corner(intervals[j1].hi, intervals[j2].lo),
                     corner(intervals[j1].hi, intervals[j2].hi),
                     corner(intervals[j1].lo, intervals[j2].hi)};
  for (int j = 0; j < fam.J(); ++j) {
    if (j == j1 || j == j2) continue;
    poly = geom::clip_halfplane(poly, fam.coef(j, 0), fam.coef(j, 1), intervals[j].hi);
    poly = geom::clip_halfplane(poly, -fam.coef(j, 0), -fam.coef(j, 1), -intervals[j].lo);
    if (poly.empty()) return 0.0;
  }
  return geom::polygon_area(poly);
}

std::vector<geom::Interval> fiber_intervals(const SetRep& rep, double w) {
  std::vector<geom::Interval> out;
  if (const auto* el = std::get_if<Ellipsoid>(&rep)) {
    // |M((w, t) - c)| = r, quadratic in t
    const double det = el->psi[0] * el->psi[4] - el->psi[1] * el->psi[3];
    const double m00 = el->psi[4] / det, m01 = -el->psi[1] / det;
    const double m10 = -el->psi[3] / det, m11 = el->psi[0] / det;
    const double p0 = m00 * (w - el->c[0]) + m01 * (0 - el->c[1]);
    const double p1 = m10 * (w - el->c[0]) + m11 * (0 - el->c[1]);
    const double q0 = m01, q1 = m11;
    const double A = q0 * q0 + q1 * q1;
    const double B = 2 * (p0 * q0 + p1 * q1);
    const double C = p0 * p0 + p1 * p1 - el->r * el->r;
    const double disc = B * B - 4 * A * C;
    if (disc <= 0) return out;
    const double s = std::sqrt(disc);
    out.push_back({(-B - s) / (2 * A), (-B + s) / (2 * A)});
    return out;
  }
  if (const auto* rg = std::get_if<RadialGraph>(&rep)) {
    // crossings of the sampled boundary curve with the vertical line x = w
    const int n = rg->ntheta;
    const double dtheta = 2 * geom::kPi / n;
    auto xo = [&](double th) { return radial_interp(*rg, th) * std::cos(th) - w; };
    std::vector<double> ts;
    for (int k = 0; k < n; ++k) {
      const double t0 = k * dtheta, t1 = (k + 1) * dtheta;
      double f0 = rg->rho[k] * std::cos(t0) - w;
      double f1 = rg->rho[(k + 1) % n] * std::cos(t1) - w;
      if (f0 == 0) f0 = -1e-300;
      if ((f0 < 0) == (f1 < 0)) continue;
      double lo = t0, hi = t1, flo = f0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = xo(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double th = 0.5 * (lo + hi);
      ts.push_back(radial_interp(*rg, th) * std::sin(th));
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t q = 0; q + 1 < ts.size(); q += 2)
      out.push_back({ts[q], ts[q + 1]});
    return out;
  }
  const auto& g = std::get<GridSet>(rep);
  const double f = (w - g.lo[0]) / g.h;
  if (f < 0 || f >= g.n[0]) return out;
  const int ix = static_cast<int>(f);
  int run_start = -1;
  for (int iy = 0; iy <= g.n[1]; ++iy) {
    const bool on = iy < g.n[1] && g.cell[g.index(ix, iy, 0)] != 0;
    if (on && run_start < 0) run_start = iy;
    if (!on && run_start >= 0) {
      out.push_back({g.lo[1] + run_start * g.h, g.lo[1] + iy * g.h});
      run_start = -1;
    }
  }
  return out;
}

namespace {

// Exact Phi_{L^1} for fibers that may have several components: components are
// disjoint, so the value is additive over component combinations.
double phi_fiber_unions(const LinearFamily& fam,
                        const std::vector<std::vector<geom::Interval>>& comps,
                        int* multi_counter) {
  const int J = fam.J();
  bool multi = false;
  std::size_t total = 1;
  for (const auto& c : comps) {
    if (c.empty()) return 0.0;
    if (c.size() > 1) multi = true;
    total *= c.size();
    if (total > 4096) throw ComputationError("fiber: too many interval components");
  }
  if (multi && multi_counter) ++*multi_counter;
  std::vector<geom::Interval> pick(J);
  double sum = 0;
  std::vector<std::size_t> idx(J, 0);
  while (true) {
    for (int j = 0; j < J; ++j) pick[j] = comps[j][idx[j]];
    sum += eval_phi_intervals_exact(fam, pick);
    int k = J - 1;
    while (k >= 0 && ++idx[k] == comps[k].size()) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return sum;
}

struct FiberDomain {
  geom::Polygon poly;        // region of u with every fiber nonempty
  double c[2] = {0, 0};      // fan center (centroid)
  bool empty = true;
};

// x-extent of a d=2 representation (the fiber at w is empty outside it)
geom::Interval x_extent(const SetRep& rep) {
  Box b = bounding_box(2, rep);
  return {b.lo[0], b.hi[0]};
}

FiberDomain make_fiber_domain(const LinearFamily& fam,
                              std::span<const geom::Interval> strips) {
  double big = 1;
  for (const auto& s : strips) big += std::abs(s.lo) + std::abs(s.hi);
  geom::Polygon poly = geom::box_polygon(-1e3 * big, 1e3 * big, -1e3 * big, 1e3 * big);
  for (int j = 0; j < fam.J(); ++j) {
    poly = geom::clip_halfplane(poly, fam.coef(j, 0), fam.coef(j, 1), strips[j].hi);
    poly = geom::clip_halfplane(poly, -fam.coef(j, 0), -fam.coef(j, 1), -strips[j].lo);
  }
  FiberDomain dom;
  if (poly.size() < 3) return dom;
  dom.poly = std::move(poly);
  dom.empty = false;
  for (const auto& p : dom.poly) {
    dom.c[0] += p[0];
    dom.c[1] += p[1];
  }
  dom.c[0] /= static_cast<double>(dom.poly.size());
  dom.c[1] /= static_cast<double>(dom.poly.size());
  return dom;
}

double max_radius(int d, const SetRep& rep) {
  Box b = bounding_box(d, rep);
  double m = 0;
  for (int k = 0; k < d; ++k) m = std::max({m, std::abs(b.lo[k]), std::abs(b.hi[k])});
  return std::sqrt(static_cast<double>(d)) * m;
}

// Fan quadrature over the domain polygon. Per triangle (c, v1, v2) the
// radial variable is substituted tau = 1 - zeta^2; the integrand vanishes
// like sqrt(distance) at the outer edge, so the substitution restores
// smoothness and Gauss-Legendre converges at full rate.
template <typename FiberFn>
double fiber_quadrature(const LinearFamily& fam, const FiberDomain& dom, int nodes,
                        FiberFn&& integrand) {
  if (dom.empty) return 0.0;
  const int nr = nodes, na = nodes;
  std::vector<double> zr, wr, za, wa;
  geom::gauss_legendre(nr, 0.0, 1.0, zr, wr);
  geom::gauss_legendre(na, 0.0, 1.0, za, wa);
  double sum = 0;
  const std::size_t nv = dom.poly.size();
  for (std::size_t t = 0; t < nv; ++t) {
    const geom::Pt2& v1 = dom.poly[t];
    const geom::Pt2& v2 = dom.poly[(t + 1) % nv];
    const double e1[2] = {v1[0] - dom.c[0], v1[1] - dom.c[1]};
    const double e12[2] = {v2[0] - v1[0], v2[1] - v1[1]};
    for (int ia = 0; ia < na; ++ia) {
      const double m[2] = {e1[0] + za[ia] * e12[0], e1[1] + za[ia] * e12[1]};
      const double cross = std::abs(m[0] * e12[1] - m[1] * e12[0]);
      for (int ir = 0; ir < nr; ++ir) {
        const double zeta = zr[ir];
        const double tau = 1.0 - zeta * zeta;
        const double u[2] = {dom.c[0] + tau * m[0], dom.c[1] + tau * m[1]};
        double ws[8];
        for (int j = 0; j < fam.J(); ++j)
          ws[j] = fam.coef(j, 0) * u[0] + fam.coef(j, 1) * u[1];
        sum += wa[ia] * wr[ir] * cross * tau * 2.0 * zeta * integrand(ws);
      }
    }
  }
  return sum;
}

}  // namespace

FiberEstimate eval_phi_fiber(const LinearFamily& fam, const SetTuple& E, int nodes) {
  if (E.d != 2) throw std::invalid_argument("eval_phi_fiber: d = 2 only");
  if (fam.m != 2) throw std::invalid_argument("eval_phi_fiber: m = 2 only");
  const int J = fam.J();
  for (const auto& rep : E.sets)
    if (std::holds_alternative<GridSet>(rep))
      throw std::invalid_argument("eval_phi_fiber: star-shaped representations only");

  std::vector<geom::Interval> strips(J);
  for (int j = 0; j < J; ++j) strips[j] = x_extent(E.sets[j]);
  FiberDomain dom = make_fiber_domain(fam, strips);
  FiberEstimate est;
  if (dom.empty) return est;

  auto integrand = [&](const double* ws) {
    std::vector<std::vector<geom::Interval>> comps(J);
    for (int j = 0; j < J; ++j) {
      comps[j] = fiber_intervals(E.sets[j], ws[j]);
      if (comps[j].empty()) return 0.0;
    }
    return phi_fiber_unions(fam, comps, &est.multi_fiber_nodes);
  };
  const double v2 = fiber_quadrature(fam, dom, nodes, integrand);
  const double v1 = fiber_quadrature(fam, dom, nodes / 2, integrand);
  est.value = v2;
  est.error = std::abs(v2 - v1);
  return est;
}

std::vector<geom::Interval> intervals_of(const SetRep& rep) {
  if (const auto* el = std::get_if<Ellipsoid>(&rep))
    return {{el->c[0] - el->r, el->c[0] + el->r}};
  if (const auto* rg = std::get_if<RadialGraph>(&rep))
    return {{-rg->rho[1 % rg->ntheta], rg->rho[0]}};
  const auto& g = std::get<GridSet>(rep);
  std::vector<geom::Interval> out;
  int run_start = -1;
  for (int ix = 0; ix <= g.n[0]; ++ix) {
    const bool on = ix < g.n[0] && g.cell[ix] != 0;
    if (on && run_start < 0) run_start = ix;
    if (!on && run_start >= 0) {
      out.push_back({g.lo[0] + run_start * g.h, g.lo[0] + ix * g.h});
      run_start = -1;
    }
  }
  return out;
}

double eval_phi_d1_exact(const LinearFamily& fam, const SetTuple& E) {
  if (E.d != 1) throw std::invalid_argument("eval_phi_d1_exact: d = 1 only");
  std::vector<std::vector<geom::Interval>> comps(E.J());
  for (int j = 0; j < E.J(); ++j) {
    comps[j] = intervals_of(E.sets[j]);
    if (comps[j].empty()) return 0.0;
  }
  return phi_fiber_unions(fam, comps, nullptr);
}

namespace {

double default_measure_tol(const SetRep& rep) {
  if (std::holds_alternative<Ellipsoid>(rep)) return 1e-9;
  if (std::holds_alternative<RadialGraph>(rep)) return 1e-4;
  return 0.05;  // raster: O(h * perimeter)
}

}  // namespace

DeficitEstimate deficit(const LinearFamily& fam, const SetTuple& E,
                        const MeasureSpec& spec, Engine engine,
                        const DeficitOptions& opts) {
  if (E.J() != static_cast<int>(spec.e.size()) || E.J() != fam.J())
    throw std::invalid_argument("deficit: size mismatch");
  for (int j = 0; j < E.J(); ++j) {
    const double tol = opts.measure_tol_rel > 0 ? opts.measure_tol_rel
                                                : default_measure_tol(E.sets[j]);
    const double mj = set_measure(E.d, E.sets[j]);
    if (std::abs(mj - spec.e[j]) > tol * spec.e[j])
      throw std::invalid_argument("deficit: |E_j| does not match the measure spec");
  }

  DeficitEstimate out;
  out.engine = engine;
  const SetTuple star = make_ball_tuple(spec);

  if (engine == Engine::exact) {
    if (E.d != 1) throw std::invalid_argument("deficit: exact engine is d = 1");
    out.phi = eval_phi_d1_exact(fam, E);
    out.phi_star = eval_phi_d1_exact(fam, star);
    out.value = out.phi_star - out.phi;
    out.error = 1e-12 * std::max(1.0, out.phi_star);
    return out;
  }

  if (engine == Engine::fiber) {
    if (E.d != 2) throw std::invalid_argument("deficit: fiber engine is d = 2");
    // each side is smooth under the edge-aligned fan quadrature, so the two
    // integrals are evaluated separately on their own domains
    FiberEstimate fe = eval_phi_fiber(fam, E, opts.fiber_nodes);
    FiberEstimate fs = eval_phi_fiber(fam, star, opts.fiber_nodes);
    out.phi = fe.value;
    out.phi_star = fs.value;
    out.value = fs.value - fe.value;
    out.error = fe.error + fs.error + 1e-12;
    return out;
  }

  // mc: common samples for E and E*, so the difference is estimated directly
  const int d = E.d, m = fam.m;
  SampleFrame f = make_frame(fam, d);
  std::vector<Box> boxes(m);
  double boxvol = 1;
  for (int k = 0; k < m; ++k) {
    Box be = bounding_box(d, E.sets[f.Jp[k]]);
    Box bs = bounding_box(d, star.sets[f.Jp[k]]);
    for (int q = 0; q < d; ++q) {
      boxes[k].lo[q] = std::min(be.lo[q], bs.lo[q]);
      boxes[k].hi[q] = std::max(be.hi[q], bs.hi[q]);
      boxvol *= boxes[k].hi[q] - boxes[k].lo[q];
    }
  }
  RngStream rng(opts.seed, 1);
  std::vector<double> y(static_cast<std::size_t>(m) * d);
  double li[3];
  double sum = 0, sum2 = 0;
  double phi_e_hits = 0;
  for (std::uint64_t s = 0; s < opts.n; ++s) {
    for (int k = 0; k < m; ++k)
      for (int q = 0; q < d; ++q)
        y[static_cast<std::size_t>(k) * d + q] = rng.uniform(boxes[k].lo[q], boxes[k].hi[q]);
    bool in_e = true, in_s = true;
    for (int k = 0; k < m && (in_e || in_s); ++k) {
      std::span<const double> yk{y.data() + static_cast<std::size_t>(k) * d,
                                 static_cast<std::size_t>(d)};
      in_e = in_e && contains(d, E.sets[f.Jp[k]], yk);
      in_s = in_s && contains(d, star.sets[f.Jp[k]], yk);
    }
    for (std::size_t q = 0; q < f.rest.size() && (in_e || in_s); ++q) {
      for (int c = 0; c < d; ++c) {
        double v = 0;
        for (int k = 0; k < m; ++k)
          v += f.C(static_cast<int>(q), k) * y[static_cast<std::size_t>(k) * d + c];
        li[c] = v;
      }
      std::span<const double> lspan{li, static_cast<std::size_t>(d)};
      in_e = in_e && contains(d, E.sets[f.rest[q]], lspan);
      in_s = in_s && contains(d, star.sets[f.rest[q]], lspan);
    }
    const double diff = static_cast<double>(in_s) - static_cast<double>(in_e);
    sum += diff;
    sum2 += diff * diff;
    phi_e_hits += in_e;
  }
  const double nn = static_cast<double>(opts.n);
  const double mean = sum / nn;
  const double var = std::max(0.0, sum2 / nn - mean * mean);
  const double scale = f.jac * boxvol;
  out.value = scale * mean;
  out.error = scale * std::sqrt(var / nn);
  out.phi = scale * phi_e_hits / nn;
  out.phi_star = out.phi + out.value;
  return out;
}

}  // namespace rbll
