#include "rbll/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rbll/admissibility.hpp"
#include "rbll/rng.hpp"

namespace rbll {

namespace {

// Reduction of the fiber integral defining K_j: pick the pivot block i0 with
// the largest |a_{i0,j}|, substitute y = L_j(x), and express every other map
// as beta_i y + sum_l alpha_{i,l} w_l over the remaining blocks w.
struct KernelReduction {
  int i0 = 0;
  double jac = 1;                  // |a_{i0,j}|^{-d}
  std::vector<int> is;             // indices i != j
  std::vector<double> beta;        // coefficient of y per i
  std::vector<std::vector<double>> alpha;  // coefficients of w_1..w_{m-1}
  std::vector<double> r;           // ball radius per i
};

KernelReduction reduce_kernel(const LinearFamily& fam, std::span<const double> e,
                              int d, int j) {
  const int m = fam.m, J = fam.J();
  KernelReduction red;
  int i0 = 0;
  for (int i = 1; i < m; ++i)
    if (std::abs(fam.coef(j, i)) > std::abs(fam.coef(j, i0))) i0 = i;
  const double piv = fam.coef(j, i0);
  if (piv == 0) throw StructuralError("eval_K: zero map");
  red.i0 = i0;
  red.jac = std::pow(std::abs(piv), -d);

  std::vector<int> free_blocks;
  for (int i = 0; i < m; ++i)
    if (i != i0) free_blocks.push_back(i);

  std::vector<double> rad = radii_from_measures(e, d);
  for (int i = 0; i < J; ++i) {
    if (i == j) continue;
    red.is.push_back(i);
    red.beta.push_back(fam.coef(i, i0) / piv);
    std::vector<double> a(free_blocks.size());
    for (std::size_t l = 0; l < free_blocks.size(); ++l) {
      const int fb = free_blocks[l];
      a[l] = fam.coef(i, fb) - fam.coef(i, i0) * fam.coef(j, fb) / piv;
    }
    red.alpha.push_back(std::move(a));
    red.r.push_back(rad[i]);
  }
  return red;
}

double eval_K_m2(const KernelReduction& red, int d, double t, double quad_tol) {
  // Single free block: every constraint is a ball in R^d with center on the
  // first axis.
  std::vector<geom::Ball> balls;
  balls.reserve(red.is.size());
  for (std::size_t q = 0; q < red.is.size(); ++q) {
    const double a = red.alpha[q][0];
    if (a == 0) throw StructuralError("eval_K: proportional rows");
    geom::Ball b;
    b.c = {-red.beta[q] * t / a, 0, 0};
    b.r = red.r[q] / std::abs(a);
    balls.push_back(b);
  }
  return red.jac * geom::ball_intersection_volume(d, balls, quad_tol);
}

double eval_K_d1_m3(const KernelReduction& red, double t) {
  // Two free scalar variables; each constraint is a strip; exact area by
  // half-plane clipping.
  // Seed polygon: intersect two strips with independent normals.
  int p = -1, q = -1;
  double best = 0;
  for (std::size_t a = 0; a < red.is.size(); ++a)
    for (std::size_t b = a + 1; b < red.is.size(); ++b) {
      const double det = red.alpha[a][0] * red.alpha[b][1] - red.alpha[a][1] * red.alpha[b][0];
      if (std::abs(det) > best) {
        best = std::abs(det);
        p = static_cast<int>(a);
        q = static_cast<int>(b);
      }
    }
  if (p < 0 || best == 0) throw StructuralError("eval_K: degenerate fiber parametrization");

  auto strip_vertices = [&](int u, int v) {
    geom::Polygon poly;
    const double au = red.alpha[u][0], bu = red.alpha[u][1];
    const double av = red.alpha[v][0], bv = red.alpha[v][1];
    const double det = au * bv - av * bu;
    const double cu0 = -red.beta[u] * t, cv0 = -red.beta[v] * t;
    for (int su = -1; su <= 1; su += 2)
      for (int sv = -1; sv <= 1; sv += 2) {
        const double cu = cu0 + su * red.r[u];
        const double cv = cv0 + sv * red.r[v];
        poly.push_back({(cu * bv - cv * bu) / det, (au * cv - av * cu) / det});
      }
    std::swap(poly[2], poly[3]);  // order corners as a quad
    return poly;
  };

  geom::Polygon poly = strip_vertices(p, q);
  for (std::size_t u = 0; u < red.is.size(); ++u) {
    if (static_cast<int>(u) == p || static_cast<int>(u) == q) continue;
    const double a = red.alpha[u][0], b = red.alpha[u][1];
    const double c0 = -red.beta[u] * t;
    poly = geom::clip_halfplane(poly, a, b, c0 + red.r[u]);
    poly = geom::clip_halfplane(poly, -a, -b, -(c0 - red.r[u]));
    if (poly.empty()) return 0.0;
  }
  return red.jac * geom::polygon_area(poly);
}

double eval_K_mc(const KernelReduction& red, int d, double t,
                 const KernelOptions& opts, std::uint64_t stream) {
  // Sample m-1 fiber blocks through an invertible subset of constraints.
  const int nb = static_cast<int>(red.alpha[0].size());
  const int nc = static_cast<int>(red.is.size());

  // greedy row selection for an invertible alpha submatrix
  std::vector<int> sel;
  {
    Eigen::MatrixXd M(nb, nb);
    int r = 0;
    for (int q = 0; q < nc && r < nb; ++q) {
      for (int l = 0; l < nb; ++l) M(r, l) = red.alpha[q][l];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M.topRows(r + 1));
      if (svd.singularValues().minCoeff() >
          1e-10 * std::max(1.0, svd.singularValues().maxCoeff())) {
        sel.push_back(q);
        ++r;
      }
    }
    if (r < nb) throw StructuralError("eval_K: degenerate fiber parametrization");
  }

  Eigen::MatrixXd As(nb, nb);
  for (int r = 0; r < nb; ++r)
    for (int l = 0; l < nb; ++l) As(r, l) = red.alpha[sel[r]][l];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(As);
  const double jac_sel = std::pow(std::abs(lu.determinant()), -d);

  double boxvol = 1;
  for (int r = 0; r < nb; ++r) boxvol *= std::pow(2.0 * red.r[sel[r]], d);

  RngStream rng(opts.seed, stream);
  std::uint64_t hits = 0;
  std::vector<Eigen::VectorXd> u(nb, Eigen::VectorXd(d));
  std::vector<Eigen::VectorXd> w(nb, Eigen::VectorXd(d));
  for (std::uint64_t s = 0; s < opts.mc_samples; ++s) {
    bool in = true;
    for (int r = 0; r < nb; ++r) {
      double n2 = 0;
      for (int k = 0; k < d; ++k) {
        u[r](k) = rng.uniform(-red.r[sel[r]], red.r[sel[r]]);
        n2 += u[r](k) * u[r](k);
      }
      // recenter: u = alpha.w + beta*t e1
      if (n2 > red.r[sel[r]] * red.r[sel[r]]) in = false;
    }
    if (!in) continue;
    // solve for the fiber blocks coordinatewise: As * w_k = u_k - beta t e1
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd rhs(nb);
      for (int r = 0; r < nb; ++r)
        rhs(r) = u[r](k) - (k == 0 ? red.beta[sel[r]] * t : 0.0);
      Eigen::VectorXd sol = lu.solve(rhs);
      for (int l = 0; l < nb; ++l) w[l](k) = sol(l);
    }
    for (int q = 0; q < nc && in; ++q) {
      if (std::find(sel.begin(), sel.end(), q) != sel.end()) continue;
      double n2 = 0;
      for (int k = 0; k < d; ++k) {
        double v = (k == 0 ? red.beta[q] * t : 0.0);
        for (int l = 0; l < nb; ++l) v += red.alpha[q][l] * w[l](k);
        n2 += v * v;
      }
      if (n2 > red.r[q] * red.r[q]) in = false;
    }
    if (in) ++hits;
  }
  const double mean = static_cast<double>(hits) / static_cast<double>(opts.mc_samples);
  return red.jac * jac_sel * boxvol * mean;
}

}  // namespace

double eval_K(const LinearFamily& fam, std::span<const double> e, int d, int j,
              double t, const KernelOptions& opts) {
  if (t < 0) throw std::invalid_argument("eval_K: t >= 0");
  if (static_cast<int>(e.size()) != fam.J())
    throw std::invalid_argument("eval_K: need one measure per map");
  KernelReduction red = reduce_kernel(fam, e, d, j);
  if (fam.m == 2) return eval_K_m2(red, d, t, opts.quad_tol);
  if (d == 1 && fam.m == 3) return eval_K_d1_m3(red, t);
  return eval_K_mc(red, d, t, opts, 0x4b5u ^ static_cast<std::uint64_t>(j));
}

namespace {

// One-sided derivative by first-order differences on a halved step, with one
// Richardson level: D(h) = (K(t0) - K(t0-h))/h, D* = 2 D(h/2) - D(h).
double one_sided(const LinearFamily& fam, std::span<const double> e, int d, int j,
                 double t0, double h, int side, const KernelOptions& opts,
                 double k0) {
  const double kh = eval_K(fam, e, d, j, t0 + side * h, opts);
  return side * (kh - k0) / h;
}

}  // namespace

LeftDerivativeEstimate left_derivative(const LinearFamily& fam,
                                       std::span<const double> e, int d, int j,
                                       const KernelOptions& opts) {
  LeftDerivativeEstimate est;
  const std::vector<double> r = radii_from_measures(e, d);
  est.t0 = r[j];
  const double k0 = eval_K(fam, e, d, j, est.t0, opts);
  if (!(k0 > 0)) {
    est.applicable = false;
    return est;
  }
  est.applicable = true;
  const double scale = std::max(est.t0, 0.1);
  const double hs[3] = {1e-2 * scale, 5e-3 * scale, 2.5e-3 * scale};
  double dd[3];
  for (int q = 0; q < 3; ++q)
    dd[q] = one_sided(fam, e, d, j, est.t0, hs[q], -1, opts, k0);
  const double r1 = 2 * dd[1] - dd[0];
  const double r2 = 2 * dd[2] - dd[1];
  est.value = r2;
  est.error = std::abs(r2 - r1) + 1e-9;
  return est;
}

GammaEstimate gamma(const LinearFamily& fam, std::span<const double> e, int d,
                    int j, const KernelOptions& opts) {
  if (d < 2) throw std::invalid_argument("gamma: requires d >= 2");
  GammaEstimate g;
  const std::vector<double> r = radii_from_measures(e, d);
  const double t0 = r[j];
  const double k0 = eval_K(fam, e, d, j, t0, opts);
  if (!(k0 > 0)) throw ComputationError("gamma: kernel vanishes at r_j");
  const double scale = std::max(t0, 0.1);
  const double hs[3] = {1e-2 * scale, 5e-3 * scale, 2.5e-3 * scale};
  double dm[3], dp[3];
  for (int q = 0; q < 3; ++q) {
    dm[q] = one_sided(fam, e, d, j, t0, hs[q], -1, opts, k0);
    dp[q] = one_sided(fam, e, d, j, t0, hs[q], +1, opts, k0);
  }
  g.d_minus = 2 * dm[2] - dm[1];
  g.d_plus = 2 * dp[2] - dp[1];
  g.mismatch = std::abs(g.d_plus - g.d_minus);
  g.gamma = -0.5 * (g.d_minus + g.d_plus);
  g.two_sided_ok = g.mismatch <= std::max(0.02 * std::abs(g.gamma), 1e-6);
  return g;
}

KernelProfile kernel_profile(const LinearFamily& fam, std::span<const double> e,
                             int d, int j, int npts, const KernelOptions& opts) {
  KernelProfile p;
  p.j = j;
  p.d = d;
  const double k0 = eval_K(fam, e, d, j, 0.0, opts);
  if (!(k0 > 0)) throw StructuralError("kernel_profile: kernel vanishes at 0");

  // bracket the support edge, then bisect
  double lo = 0, hi = 1;
  const std::vector<double> r = radii_from_measures(e, d);
  for (double v : r) hi = std::max(hi, 4 * v);
  while (eval_K(fam, e, d, j, hi, opts) > 0) hi *= 2;
  lo = 0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval_K(fam, e, d, j, mid, opts) > 0)
      lo = mid;
    else
      hi = mid;
  }
  p.support_radius = lo;

  p.t.resize(npts);
  p.value.resize(npts);
  for (int q = 0; q < npts; ++q) {
    p.t[q] = p.support_radius * q / (npts - 1);
    p.value[q] = eval_K(fam, e, d, j, p.t[q], opts);
  }
  return p;
}

std::string serialize_profile(const KernelProfile& p) {
  std::ostringstream os;
  os << "# kernel profile j=" << p.j + 1 << " d=" << p.d
     << " support_radius=" << p.support_radius << "\n";
  char buf[80];
  for (std::size_t q = 0; q < p.t.size(); ++q) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.t[q], p.value[q]);
    os << buf;
  }
  return os.str();
}

PairKernel make_pair_kernel(const LinearFamily& fam, std::span<const double> e,
                            int d, int i, int j) {
  if (i == j) throw std::invalid_argument("make_pair_kernel: need i != j");
  const int m = fam.m, J = fam.J();
  PairKernel pk;
  pk.i = i;
  pk.j = j;
  pk.d = d;
  pk.m = m;

  // change of variables: rows a_i, a_j, then greedy unit-vector completion
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int q = 0; q < m; ++q) {
    T(0, q) = fam.coef(i, q);
    T(1, q) = fam.coef(j, q);
  }
  int r = 2;
  for (int q = 0; q < m && r < m; ++q) {
    T(r, q) = 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T.topRows(r + 1));
    if (svd.singularValues().minCoeff() >
        1e-10 * std::max(1.0, svd.singularValues().maxCoeff()))
      ++r;
    else
      T(r, q) = 0.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
  if (!lu.isInvertible()) throw StructuralError("make_pair_kernel: rows i,j dependent");
  pk.c = std::pow(std::abs(lu.determinant()), -d);
  const Eigen::MatrixXd Tinv = lu.inverse();

  const std::vector<double> rad = radii_from_measures(e, d);
  for (int k = 0; k < J; ++k) {
    if (k == i || k == j) continue;
    Eigen::RowVectorXd ak(m);
    for (int q = 0; q < m; ++q) ak(q) = fam.coef(k, q);
    const Eigen::RowVectorXd gk = ak * Tinv;
    pk.ks.push_back(k);
    pk.alpha.push_back(gk(0));
    pk.beta.push_back(gk(1));
    std::vector<double> rest;
    double tail = 0;
    for (int q = 2; q < m; ++q) {
      rest.push_back(gk(q));
      tail = std::max(tail, std::abs(gk(q)));
    }
    pk.g.push_back(std::move(rest));
    pk.r.push_back(rad[k]);
    if (tail <= 1e-12)
      pk.span_pair.push_back(k);
    else
      pk.fiber_rest.push_back(k);
  }
  return pk;
}

double PairKernel::eval(std::span<const double> x, std::span<const double> y,
                        const KernelOptions& opts) const {
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw std::invalid_argument("PairKernel::eval: dimension mismatch");

  double value = c;
  // indicator part over J''
  for (std::size_t q = 0; q < ks.size(); ++q) {
    bool in_span = g[q].empty() || std::none_of(g[q].begin(), g[q].end(), [](double v) {
                     return std::abs(v) > 1e-12;
                   });
    if (!in_span) continue;
    double n2 = 0;
    for (int k = 0; k < d; ++k) {
      const double v = alpha[q] * x[k] + beta[q] * y[k];
      n2 += v * v;
    }
    if (n2 > r[q] * r[q]) return 0.0;
  }
  if (fiber_rest.empty()) return value;

  if (m == 3) {
    // one fiber block: intersection of balls in R^d, exact
    std::vector<geom::Ball> balls;
    for (std::size_t q = 0; q < ks.size(); ++q) {
      if (g[q].empty() || std::abs(g[q][0]) <= 1e-12) continue;
      geom::Ball b;
      for (int k = 0; k < d; ++k)
        b.c[k] = -(alpha[q] * x[k] + beta[q] * y[k]) / g[q][0];
      b.r = r[q] / std::abs(g[q][0]);
      balls.push_back(b);
    }
    return value * geom::ball_intersection_volume(d, balls, opts.quad_tol);
  }

  // m >= 4: Monte Carlo over the fiber, sampled from the largest box
  const int nb = m - 2;
  double rmax = 0;
  for (std::size_t q = 0; q < ks.size(); ++q) rmax = std::max(rmax, r[q]);
  const double half = 2.0 * rmax;  // crude but safe fiber box
  RngStream rng(opts.seed, 0x9a17u);
  std::uint64_t hits = 0;
  std::vector<double> v(static_cast<std::size_t>(nb) * d);
  for (std::uint64_t s = 0; s < opts.mc_samples; ++s) {
    for (double& t : v) t = rng.uniform(-half, half);
    bool in = true;
    for (std::size_t q = 0; q < ks.size() && in; ++q) {
      if (g[q].empty()) continue;
      bool fiber_dep = false;
      for (double gq : g[q])
        if (std::abs(gq) > 1e-12) fiber_dep = true;
      if (!fiber_dep) continue;
      double n2 = 0;
      for (int k = 0; k < d; ++k) {
        double s1 = alpha[q] * x[k] + beta[q] * y[k];
        for (int l = 0; l < nb; ++l) s1 += g[q][l] * v[static_cast<std::size_t>(l) * d + k];
        n2 += s1 * s1;
      }
      if (n2 > r[q] * r[q]) in = false;
    }
    if (in) ++hits;
  }
  const double boxvol = std::pow(2 * half, nb * d);
  return value * boxvol * static_cast<double>(hits) /
         static_cast<double>(opts.mc_samples);
}

double eval_M(const LinearFamily& fam, std::span<const double> e, int d, int i,
              int j, std::span<const double> x, std::span<const double> y,
              const KernelOptions& opts) {
  return make_pair_kernel(fam, e, d, i, j).eval(x, y, opts);
}

}  // namespace rbll
