#include "rbll/settuple.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "rbll/admissibility.hpp"

namespace rbll {

// ---- harmonics -------------------------------------------------------------

bool is_balanced(const HarmonicTuple& G, std::span<const int> Jprime, int n,
                 double tol) {
  if (G.nu >= 3) return true;
  if (G.nu == 2) return G.norm2(n) <= tol;
  for (int j : Jprime)
    if (G.norm2(j) > tol) return false;
  return true;
}

HarmonicTuple rotate_harmonic(const HarmonicTuple& G, double alpha) {
  HarmonicTuple out = G;
  const double c = std::cos(G.nu * alpha), s = std::sin(G.nu * alpha);
  for (auto& pq : out.comp) {
    const double p = pq[0], q = pq[1];
    pq[0] = p * c + q * s;   // (G o R_alpha)(theta) = G(theta + alpha)
    pq[1] = -p * s + q * c;
  }
  return out;
}

HarmonicTuple reflect_harmonic(const HarmonicTuple& G) {
  HarmonicTuple out = G;
  for (auto& pq : out.comp) pq[1] = -pq[1];
  return out;
}

// ---- measure spec ----------------------------------------------------------

MeasureSpec make_measure_spec(std::span<const double> e, int d) {
  MeasureSpec s;
  s.d = d;
  for (double v : e) {
    if (!(v > 0)) throw std::invalid_argument("measure spec: e_j > 0 required");
    s.e.push_back(v);
  }
  s.r = radii_from_measures(s.e, d);
  return s;
}

double radial_interp(const RadialGraph& rg, double theta) {
  const int n = rg.ntheta;
  const double dtheta = 2 * geom::kPi / n;
  double t = std::fmod(theta, 2 * geom::kPi);
  if (t < 0) t += 2 * geom::kPi;
  const int k = std::min(static_cast<int>(t / dtheta), n - 1);
  const double f = t / dtheta - k;
  return rg.rho[k] * (1 - f) + rg.rho[(k + 1) % n] * f;
}

// ---- representation helpers ------------------------------------------------

namespace {

// inverse of the d x d block of psi (identity-padded 3x3, |det| arbitrary)
std::array<double, 9> invert_psi(const std::array<double, 9>& a, int d) {
  std::array<double, 9> inv{1, 0, 0, 0, 1, 0, 0, 0, 1};
  if (d == 1) {
    inv[0] = 1.0 / a[0];
  } else if (d == 2) {
    const double det = a[0] * a[4] - a[1] * a[3];
    inv[0] = a[4] / det;
    inv[1] = -a[1] / det;
    inv[3] = -a[3] / det;
    inv[4] = a[0] / det;
  } else {
    const double det = a[0] * (a[4] * a[8] - a[5] * a[7]) -
                       a[1] * (a[3] * a[8] - a[5] * a[6]) +
                       a[2] * (a[3] * a[7] - a[4] * a[6]);
    inv[0] = (a[4] * a[8] - a[5] * a[7]) / det;
    inv[1] = (a[2] * a[7] - a[1] * a[8]) / det;
    inv[2] = (a[1] * a[5] - a[2] * a[4]) / det;
    inv[3] = (a[5] * a[6] - a[3] * a[8]) / det;
    inv[4] = (a[0] * a[8] - a[2] * a[6]) / det;
    inv[5] = (a[2] * a[3] - a[0] * a[5]) / det;
    inv[6] = (a[3] * a[7] - a[4] * a[6]) / det;
    inv[7] = (a[1] * a[6] - a[0] * a[7]) / det;
    inv[8] = (a[0] * a[4] - a[1] * a[3]) / det;
  }
  return inv;
}

double det_psi(const std::array<double, 9>& a, int d) {
  if (d == 1) return a[0];
  if (d == 2) return a[0] * a[4] - a[1] * a[3];
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

void mat_apply(const std::array<double, 9>& a, int d, const double* x, double* y) {
  for (int i = 0; i < d; ++i) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += a[static_cast<std::size_t>(i) * 3 + k] * x[k];
    y[i] = s;
  }
}

// positive root of |M(t u - c)| = r for unit direction u; requires |Mc| < r
std::optional<double> ellipsoid_radial(const Ellipsoid& el, int d, const double* u) {
  const std::array<double, 9> M = invert_psi(el.psi, d);
  double Mu[3], Mc[3];
  mat_apply(M, d, u, Mu);
  mat_apply(M, d, el.c.data(), Mc);
  double A = 0, B = 0, C = -el.r * el.r;
  for (int k = 0; k < d; ++k) {
    A += Mu[k] * Mu[k];
    B += Mu[k] * Mc[k];
    C += Mc[k] * Mc[k];
  }
  if (C >= 0) return std::nullopt;  // origin not interior
  const double disc = B * B - A * C;
  return (B + std::sqrt(disc)) / A;
}


// bilinear in (mu = cos phi, lambda); nearest-node clamping at the poles
double interp_rho_3d(const RadialGraph& rg, double mu, double lam) {
  const int nl = rg.ntheta, np = rg.nphi;
  double l = std::fmod(lam, 2 * geom::kPi);
  if (l < 0) l += 2 * geom::kPi;
  const double dl = 2 * geom::kPi / nl;
  const int il = std::min(static_cast<int>(l / dl), nl - 1);
  const double fl = l / dl - il;
  auto row = [&](int ip) {
    const double a = rg.rho[static_cast<std::size_t>(ip) * nl + il];
    const double b = rg.rho[static_cast<std::size_t>(ip) * nl + (il + 1) % nl];
    return a * (1 - fl) + b * fl;
  };
  if (mu <= rg.mu_nodes.front()) return row(0);
  if (mu >= rg.mu_nodes.back()) return row(np - 1);
  int ip = static_cast<int>(std::upper_bound(rg.mu_nodes.begin(), rg.mu_nodes.end(), mu) -
                            rg.mu_nodes.begin()) - 1;
  ip = std::clamp(ip, 0, np - 2);
  const double f = (mu - rg.mu_nodes[ip]) / (rg.mu_nodes[ip + 1] - rg.mu_nodes[ip]);
  return row(ip) * (1 - f) + row(ip + 1) * f;
}

}  // namespace

bool contains(int d, const SetRep& rep, std::span<const double> x) {
  if (const auto* el = std::get_if<Ellipsoid>(&rep)) {
    const std::array<double, 9> M = invert_psi(el->psi, d);
    double diff[3] = {0, 0, 0}, y[3];
    for (int k = 0; k < d; ++k) diff[k] = x[k] - el->c[k];
    mat_apply(M, d, diff, y);
    double n2 = 0;
    for (int k = 0; k < d; ++k) n2 += y[k] * y[k];
    return n2 <= el->r * el->r;
  }
  if (const auto* rg = std::get_if<RadialGraph>(&rep)) {
    double n2 = 0;
    for (int k = 0; k < d; ++k) n2 += x[k] * x[k];
    const double t = std::sqrt(n2);
    if (t == 0) return true;
    double rho;
    if (d == 2) {
      rho = radial_interp(*rg, std::atan2(x[1], x[0]));
    } else if (d == 3) {
      rho = interp_rho_3d(*rg, x[2] / t, std::atan2(x[1], x[0]));
    } else {
      rho = rg->rho[x[0] >= 0 ? 0 : 1 % rg->ntheta];
    }
    return t <= rho;
  }
  const auto& g = std::get<GridSet>(rep);
  int idx[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    const double f = (x[k] - g.lo[k]) / g.h;
    if (f < 0 || f >= g.n[k]) return false;
    idx[k] = static_cast<int>(f);
  }
  return g.cell[g.index(idx[0], idx[1], idx[2])] != 0;
}

double set_measure(int d, const SetRep& rep) {
  if (const auto* el = std::get_if<Ellipsoid>(&rep))
    return geom::unit_ball_volume(d) * std::pow(el->r, d) *
           std::abs(det_psi(el->psi, d));
  if (const auto* rg = std::get_if<RadialGraph>(&rep)) {
    if (d == 2) {
      double s = 0;
      for (double rho : rg->rho) s += std::pow(rho, d) / d;
      return s * 2 * geom::kPi / rg->ntheta;
    }
    if (d == 3) {
      double s = 0;
      for (int ip = 0; ip < rg->nphi; ++ip) {
        double row = 0;
        for (int il = 0; il < rg->ntheta; ++il)
          row += std::pow(rg->rho[static_cast<std::size_t>(ip) * rg->ntheta + il], 3) / 3.0;
        s += rg->mu_weights[ip] * row;
      }
      return s * 2 * geom::kPi / rg->ntheta;
    }
    return rg->rho[0] + rg->rho[1 % rg->ntheta];  // d=1: [-rho_-, rho_+]
  }
  const auto& g = std::get<GridSet>(rep);
  std::size_t cnt = 0;
  for (auto c : g.cell) cnt += c;
  return static_cast<double>(cnt) * std::pow(g.h, d);
}

Box bounding_box(int d, const SetRep& rep) {
  Box b;
  if (const auto* el = std::get_if<Ellipsoid>(&rep)) {
    for (int k = 0; k < d; ++k) {
      double rn = 0;
      for (int q = 0; q < d; ++q)
        rn += el->psi[static_cast<std::size_t>(k) * 3 + q] *
              el->psi[static_cast<std::size_t>(k) * 3 + q];
      rn = el->r * std::sqrt(rn);
      b.lo[k] = el->c[k] - rn;
      b.hi[k] = el->c[k] + rn;
    }
    return b;
  }
  if (const auto* rg = std::get_if<RadialGraph>(&rep)) {
    const double m = *std::max_element(rg->rho.begin(), rg->rho.end());
    for (int k = 0; k < d; ++k) {
      b.lo[k] = -m;
      b.hi[k] = m;
    }
    return b;
  }
  const auto& g = std::get<GridSet>(rep);
  for (int k = 0; k < d; ++k) {
    b.lo[k] = g.lo[k];
    b.hi[k] = g.lo[k] + g.n[k] * g.h;
  }
  return b;
}

std::optional<double> radial_function(int d, const SetRep& rep, double theta) {
  if (const auto* el = std::get_if<Ellipsoid>(&rep)) {
    double u[3] = {std::cos(theta), std::sin(theta), 0};
    if (d == 1) u[0] = theta >= 0 ? 1 : -1;
    return ellipsoid_radial(*el, d, u);
  }
  if (const auto* rg = std::get_if<RadialGraph>(&rep)) {
    if (d == 2) return radial_interp(*rg, theta);
    if (d == 1) return rg->rho[theta >= 0 ? 0 : 1 % rg->ntheta];
    return std::nullopt;
  }
  return std::nullopt;
}

double grid_default_h(const MeasureSpec& spec) {
  return *std::max_element(spec.r.begin(), spec.r.end()) / 256.0;
}

Box grid_default_box(const MeasureSpec& spec) {
  const double R = 1.5 * *std::max_element(spec.r.begin(), spec.r.end());
  Box b;
  for (int k = 0; k < spec.d; ++k) {
    b.lo[k] = -R;
    b.hi[k] = R;
  }
  return b;
}

GridSet rasterize(int d, const SetRep& rep, double h, const Box& box) {
  GridSet g;
  g.d = d;
  g.h = h;
  for (int k = 0; k < d; ++k) {
    g.lo[k] = box.lo[k];
    g.n[k] = std::max(1, static_cast<int>(std::ceil((box.hi[k] - box.lo[k]) / h)));
  }
  g.cell.assign(static_cast<std::size_t>(g.n[0]) * g.n[1] * g.n[2], 0);
  double x[3];
  for (int iz = 0; iz < g.n[2]; ++iz)
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int ix = 0; ix < g.n[0]; ++ix) {
        g.center(ix, iy, iz, x);
        if (contains(d, rep, {x, static_cast<std::size_t>(d)}))
          g.cell[g.index(ix, iy, iz)] = 1;
      }
  return g;
}

namespace {

bool star_about_origin(int d, const SetRep& rep) {
  if (std::holds_alternative<GridSet>(rep)) return false;
  if (const auto* el = std::get_if<Ellipsoid>(&rep)) {
    const std::array<double, 9> M = invert_psi(el->psi, d);
    double y[3];
    mat_apply(M, d, el->c.data(), y);
    double n2 = 0;
    for (int k = 0; k < d; ++k) n2 += y[k] * y[k];
    return n2 < el->r * el->r;
  }
  return true;
}

double rho_any(const SetRep& rep, double mu, double lam) {
  // d=3 radial function for star representations
  if (const auto* el = std::get_if<Ellipsoid>(&rep)) {
    const double s = std::sqrt(std::max(0.0, 1 - mu * mu));
    double u[3] = {s * std::cos(lam), s * std::sin(lam), mu};
    return *ellipsoid_radial(*el, 3, u);
  }
  return interp_rho_3d(std::get<RadialGraph>(rep), mu, lam);
}

}  // namespace

double symmetric_difference_measure(int d, const SetRep& a, const SetRep& b,
                                    int ntheta) {
  if (star_about_origin(d, a) && star_about_origin(d, b)) {
    if (d == 1) {
      const double ra = *radial_function(1, a, 1.0), la = *radial_function(1, a, -1.0);
      const double rb = *radial_function(1, b, 1.0), lb = *radial_function(1, b, -1.0);
      return std::abs(ra - rb) + std::abs(la - lb);
    }
    if (d == 2) {
      double s = 0;
      for (int k = 0; k < ntheta; ++k) {
        const double th = 2 * geom::kPi * k / ntheta;
        const double pa = *radial_function(2, a, th);
        const double pb = *radial_function(2, b, th);
        s += std::abs(pa * pa - pb * pb) / 2.0;
      }
      return s * 2 * geom::kPi / ntheta;
    }
    // d == 3: Gauss-Legendre in mu, uniform longitudes
    std::vector<double> mu, w;
    geom::gauss_legendre(64, -1, 1, mu, w);
    const int nl = 128;
    double s = 0;
    for (int ip = 0; ip < 64; ++ip) {
      double row = 0;
      for (int il = 0; il < nl; ++il) {
        const double lam = 2 * geom::kPi * il / nl;
        const double pa = rho_any(a, mu[ip], lam);
        const double pb = rho_any(b, mu[ip], lam);
        row += std::abs(pa * pa * pa - pb * pb * pb) / 3.0;
      }
      s += w[ip] * row;
    }
    return s * 2 * geom::kPi / nl;
  }

  // raster path
  const GridSet* ga = std::get_if<GridSet>(&a);
  const GridSet* gb = std::get_if<GridSet>(&b);
  GridSet tmp_a, tmp_b;
  if (ga && gb) {
    bool same = ga->h == gb->h && ga->n == gb->n && ga->lo == gb->lo;
    if (!same) {
      Box box = bounding_box(d, a);
      tmp_b = rasterize(d, b, ga->h, box);
      gb = &tmp_b;
    }
  } else if (ga) {
    tmp_b = rasterize(d, b, ga->h, bounding_box(d, a));
    gb = &tmp_b;
  } else if (gb) {
    tmp_a = rasterize(d, a, gb->h, bounding_box(d, b));
    ga = &tmp_a;
  } else {
    Box ba = bounding_box(d, a), bb = bounding_box(d, b);
    Box u;
    double ext = 0;
    for (int k = 0; k < d; ++k) {
      u.lo[k] = std::min(ba.lo[k], bb.lo[k]);
      u.hi[k] = std::max(ba.hi[k], bb.hi[k]);
      ext = std::max(ext, u.hi[k] - u.lo[k]);
    }
    const double h = ext / 512.0;
    tmp_a = rasterize(d, a, h, u);
    tmp_b = rasterize(d, b, h, u);
    ga = &tmp_a;
    gb = &tmp_b;
  }

  // count cells where the indicators differ; grids may have different sizes
  auto grid_at = [d](const GridSet& g, const double* x) {
    int idx[3] = {0, 0, 0};
    for (int k = 0; k < d; ++k) {
      const double f = (x[k] - g.lo[k]) / g.h;
      if (f < 0 || f >= g.n[k]) return false;
      idx[k] = static_cast<int>(f);
    }
    return g.cell[g.index(idx[0], idx[1], idx[2])] != 0;
  };
  double x[3];
  std::size_t diff = 0;
  for (int iz = 0; iz < ga->n[2]; ++iz)
    for (int iy = 0; iy < ga->n[1]; ++iy)
      for (int ix = 0; ix < ga->n[0]; ++ix) {
        ga->center(ix, iy, iz, x);
        const bool ina = ga->cell[ga->index(ix, iy, iz)] != 0;
        const bool inb = grid_at(*gb, x);
        if (ina != inb) ++diff;
      }
  // cells of b's grid outside a's box
  for (int iz = 0; iz < gb->n[2]; ++iz)
    for (int iy = 0; iy < gb->n[1]; ++iy)
      for (int ix = 0; ix < gb->n[0]; ++ix) {
        gb->center(ix, iy, iz, x);
        bool inside_a_box = true;
        for (int k = 0; k < d; ++k)
          if (x[k] < ga->lo[k] || x[k] >= ga->lo[k] + ga->n[k] * ga->h)
            inside_a_box = false;
        if (inside_a_box) continue;
        if (gb->cell[gb->index(ix, iy, iz)] != 0) ++diff;
      }
  return static_cast<double>(diff) * std::pow(ga->h, d);
}

// ---- constructions ---------------------------------------------------------

SetTuple make_ball_tuple(const MeasureSpec& spec) {
  SetTuple t;
  t.d = spec.d;
  for (double r : spec.r) {
    Ellipsoid el;
    el.r = r;
    t.sets.emplace_back(el);
  }
  return t;
}

SetTuple radial_from_harmonic(const HarmonicTuple& G, double s,
                              const MeasureSpec& spec, int ntheta) {
  if (spec.d != 2) throw std::invalid_argument("radial_from_harmonic: d = 2 only");
  if (G.J() != static_cast<int>(spec.e.size()))
    throw std::invalid_argument("radial_from_harmonic: component count mismatch");
  SetTuple t;
  t.d = 2;
  const int d = 2;
  for (int j = 0; j < G.J(); ++j) {
    RadialGraph rg;
    rg.ntheta = ntheta;
    rg.rho.resize(ntheta);
    const double rd = std::pow(spec.r[j], d);
    for (int k = 0; k < ntheta; ++k) {
      const double th = 2 * geom::kPi * k / ntheta;
      const double rad = rd + d * s * G.eval(j, th);
      if (!(rad > 0))
        throw std::invalid_argument("radial_from_harmonic: |s| too large");
      rg.rho[k] = std::pow(rad, 1.0 / d);
    }
    t.sets.emplace_back(std::move(rg));
  }
  return t;
}

double BoundaryProfile::norm2_F() const {
  double s = 0;
  for (double v : F) s += v * v;
  return s * 2 * geom::kPi / static_cast<double>(F.size());
}
double BoundaryProfile::norm2_Fp() const {
  double s = 0;
  for (double v : Fp) s += v * v;
  return s * 2 * geom::kPi / static_cast<double>(Fp.size());
}
double BoundaryProfile::norm2_Fm() const {
  double s = 0;
  for (double v : Fm) s += v * v;
  return s * 2 * geom::kPi / static_cast<double>(Fm.size());
}

std::vector<BoundaryProfile> boundary_profiles(const SetTuple& E,
                                               const MeasureSpec& spec,
                                               int ntheta) {
  if (spec.d != 2)
    throw std::invalid_argument("boundary_profiles: d = 2 only");
  std::vector<BoundaryProfile> out;
  const int d = 2;
  for (int j = 0; j < E.J(); ++j) {
    BoundaryProfile bp;
    bp.j = j;
    bp.theta.resize(ntheta);
    bp.Fp.assign(ntheta, 0.0);
    bp.Fm.assign(ntheta, 0.0);
    bp.F.assign(ntheta, 0.0);
    const double rj = spec.r[j];
    const SetRep& rep = E.sets[j];
    const bool star = star_about_origin(d, rep);
    const GridSet* g = std::get_if<GridSet>(&rep);
    for (int k = 0; k < ntheta; ++k) {
      const double th = 2 * geom::kPi * k / ntheta;
      bp.theta[k] = th;
      if (star) {
        const double rho = *radial_function(d, rep, th);
        const double F = (std::pow(rho, d) - std::pow(rj, d)) / d;
        bp.F[k] = F;
        bp.Fp[k] = std::max(F, 0.0);
        bp.Fm[k] = std::max(-F, 0.0);
      } else if (g) {
        // ray integration against the raster
        double tmax = 0;
        Box box = bounding_box(d, rep);
        for (int q = 0; q < d; ++q)
          tmax = std::max({tmax, std::abs(box.lo[q]), std::abs(box.hi[q])});
        tmax = std::hypot(tmax, tmax) + rj;
        const double dt = g->h / 4.0;
        const double cth = std::cos(th), sth = std::sin(th);
        double fp = 0, fm = 0;
        for (double t = 0.5 * dt; t < tmax; t += dt) {
          double x[3] = {t * cth, t * sth, 0};
          const bool in_e = contains(d, rep, {x, 2});
          const bool in_b = t <= rj;
          if (in_e && !in_b) fp += t * dt;
          if (in_b && !in_e) fm += t * dt;
        }
        bp.Fp[k] = fp;
        bp.Fm[k] = fm;
        bp.F[k] = fp - fm;
      } else {
        throw std::invalid_argument("boundary_profiles: unsupported representation");
      }
    }
    out.push_back(std::move(bp));
  }
  return out;
}

SetTuple truncate_to_annulus(const SetTuple& E, const MeasureSpec& spec,
                             double width, TruncateReport* report) {
  if (!(width > 0)) throw std::invalid_argument("truncate_to_annulus: width > 0");
  SetTuple out;
  out.d = E.d;
  const int d = E.d;
  if (report) {
    report->widened_to.assign(E.J(), width);
    report->moved.assign(E.J(), 0.0);
  }
  for (int j = 0; j < E.J(); ++j) {
    const double rj = spec.r[j];
    if (std::holds_alternative<Ellipsoid>(E.sets[j]))
      throw std::invalid_argument("truncate_to_annulus: Grid or RadialGraph input");

    // raster geometry covering both the set and the ball
    Box box = bounding_box(d, E.sets[j]);
    double h;
    if (const GridSet* g0 = std::get_if<GridSet>(&E.sets[j])) {
      h = g0->h;
    } else {
      h = grid_default_h(spec);
    }
    for (int k = 0; k < d; ++k) {
      box.lo[k] = std::min(box.lo[k], -(rj + 2 * width + 2 * h));
      box.hi[k] = std::max(box.hi[k], rj + 2 * width + 2 * h);
    }
    GridSet g = rasterize(d, E.sets[j], h, box);

    struct Cell {
      double rdist;
      std::size_t idx;
      bool in_dagger;
    };
    double wj = width;
    GridSet dag;
    std::ptrdiff_t imbalance = 0;
    std::vector<Cell> removable, addable;
    for (int attempt = 0; attempt < 40; ++attempt) {
      dag = g;
      imbalance = 0;
      removable.clear();
      addable.clear();
      double x[3];
      for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
          for (int ix = 0; ix < g.n[0]; ++ix) {
            const std::size_t id = g.index(ix, iy, iz);
            g.center(ix, iy, iz, x);
            double n2 = 0;
            for (int k = 0; k < d; ++k) n2 += x[k] * x[k];
            const double t = std::sqrt(n2);
            const bool in_b = t <= rj;
            const bool in_ann = std::abs(t - rj) <= wj;
            const bool in_e = g.cell[id] != 0;
            const bool in_dag = in_ann ? in_e : in_b;
            dag.cell[id] = in_dag ? 1 : 0;
            imbalance += static_cast<int>(in_dag) - static_cast<int>(in_e);
            if (in_ann && in_e && !in_b)
              removable.push_back({std::abs(t - rj), id, true});
            if (in_ann && !in_e && in_b)
              addable.push_back({std::abs(t - rj), id, false});
          }
      const std::size_t need = static_cast<std::size_t>(std::abs(imbalance));
      if ((imbalance > 0 && removable.size() >= need) ||
          (imbalance < 0 && addable.size() >= need) || imbalance == 0)
        break;
      wj *= 1.5;  // not enough annulus capacity; widen and record
    }
    auto by_deviation = [](const Cell& a, const Cell& b) {
      return a.rdist != b.rdist ? a.rdist > b.rdist : a.idx < b.idx;
    };
    if (imbalance > 0) {
      std::sort(removable.begin(), removable.end(), by_deviation);
      for (std::ptrdiff_t q = 0; q < imbalance && q < static_cast<std::ptrdiff_t>(removable.size()); ++q)
        dag.cell[removable[q].idx] = 0;
    } else if (imbalance < 0) {
      std::sort(addable.begin(), addable.end(), by_deviation);
      for (std::ptrdiff_t q = 0; q < -imbalance && q < static_cast<std::ptrdiff_t>(addable.size()); ++q)
        dag.cell[addable[q].idx] = 1;
    }
    if (report) {
      report->widened_to[j] = wj;
      std::size_t moved = 0;
      for (std::size_t id = 0; id < g.cells(); ++id)
        if (g.cell[id] != dag.cell[id]) ++moved;
      report->moved[j] = static_cast<double>(moved) * std::pow(h, d);
    }
    out.sets.emplace_back(std::move(dag));
  }
  return out;
}

// ---- serialization ---------------------------------------------------------

std::string serialize_grid(const GridSet& g) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "grid d=%d h=%.17g lo=%.17g,%.17g,%.17g n=%d,%d,%d\n", g.d, g.h,
                g.lo[0], g.lo[1], g.lo[2], g.n[0], g.n[1], g.n[2]);
  os << buf;
  // run-length encoding over the linear cell order
  std::size_t i = 0;
  while (i < g.cell.size()) {
    std::size_t run = 1;
    while (i + run < g.cell.size() && g.cell[i + run] == g.cell[i]) ++run;
    os << run << ":" << static_cast<int>(g.cell[i]) << " ";
    i += run;
  }
  os << "\n";
  return os.str();
}

GridSet parse_grid(const std::string& text) {
  GridSet g;
  std::istringstream is(text);
  std::string tag;
  is >> tag;
  if (tag != "grid") throw std::invalid_argument("parse_grid: bad header");
  std::string kv;
  for (int q = 0; q < 4; ++q) {
    is >> kv;
    const auto eq = kv.find('=');
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "d") g.d = std::stoi(val);
    if (key == "h") g.h = std::stod(val);
    if (key == "lo") std::sscanf(val.c_str(), "%lf,%lf,%lf", &g.lo[0], &g.lo[1], &g.lo[2]);
    if (key == "n") std::sscanf(val.c_str(), "%d,%d,%d", &g.n[0], &g.n[1], &g.n[2]);
  }
  g.cell.reserve(static_cast<std::size_t>(g.n[0]) * g.n[1] * g.n[2]);
  std::string run;
  while (is >> run) {
    const auto colon = run.find(':');
    const std::size_t len = std::stoull(run.substr(0, colon));
    const std::uint8_t v = static_cast<std::uint8_t>(std::stoi(run.substr(colon + 1)));
    g.cell.insert(g.cell.end(), len, v);
  }
  if (g.cell.size() != static_cast<std::size_t>(g.n[0]) * g.n[1] * g.n[2])
    throw std::invalid_argument("parse_grid: cell count mismatch");
  return g;
}

std::string serialize_radial(const RadialGraph& rg) {
  std::ostringstream os;
  os << "# theta rho\n";
  char buf[80];
  for (int k = 0; k < rg.ntheta && rg.nphi == 0; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", 2 * geom::kPi * k / rg.ntheta,
                  rg.rho[k]);
    os << buf;
  }
  return os.str();
}

}  // namespace rbll
