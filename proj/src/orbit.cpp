#include "rbll/orbit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rbll/rng.hpp"

namespace rbll {

std::array<double, 4> sl2_exp(double a, double b, double c) {
  const double q = a * a + b * c;  // M^2 = q I for trace-free M
  double ch, sh;
  if (q > 1e-300) {
    const double s = std::sqrt(q);
    ch = std::cosh(s);
    sh = std::sinh(s) / s;
  } else if (q < -1e-300) {
    const double s = std::sqrt(-q);
    ch = std::cos(s);
    sh = std::sin(s) / s;
  } else {
    ch = 1;
    sh = 1;
  }
  return {ch + sh * a, sh * b, sh * c, ch - sh * a};
}

namespace {

struct Objective {
  const LinearFamily* fam;
  const SetTuple* E;
  const MeasureSpec* spec;
  int d;
  int ntheta;

  std::pair<double, double> operator()(std::span<const double> p) const {
    const int m = fam->m;
    double vmax = 0, vsum = 0;
    std::array<double, 9> psi{1, 0, 0, 0, 1, 0, 0, 0, 1};
    if (d == 2) {
      const auto e2 = sl2_exp(p[m * d], p[m * d + 1], p[m * d + 2]);
      psi = {e2[0], e2[1], 0, e2[2], e2[3], 0, 0, 0, 1};
    }
    for (int j = 0; j < fam->J(); ++j) {
      Ellipsoid cand;
      cand.psi = psi;
      cand.r = spec->r[j];
      for (int k = 0; k < d; ++k) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += fam->coef(j, i) * p[static_cast<std::size_t>(i) * d + k];
        cand.c[k] = s;
      }
      const double sd = symmetric_difference_measure(d, E->sets[j], SetRep(cand), ntheta);
      vmax = std::max(vmax, sd);
      vsum += sd;
    }
    return {vmax, vsum};
  }
};

bool lex_less(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  if (a.first != b.first) return a.first < b.first;
  return a.second < b.second;
}

std::vector<double> centroid_heuristic(const LinearFamily& fam, const SetTuple& E) {
  const int d = E.d, m = fam.m, J = fam.J();
  Eigen::MatrixXd A(J, m);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < m; ++i) A(j, i) = fam.coef(j, i);
  Eigen::MatrixXd C(J, d);
  for (int j = 0; j < J; ++j) {
    double c[3] = {0, 0, 0};
    if (const auto* el = std::get_if<Ellipsoid>(&E.sets[j])) {
      for (int k = 0; k < d; ++k) c[k] = el->c[k];
    } else if (const auto* rg = std::get_if<RadialGraph>(&E.sets[j]); rg && d == 2) {
      double mass = 0;
      for (int k = 0; k < rg->ntheta; ++k) {
        const double th = 2 * geom::kPi * k / rg->ntheta;
        const double r3 = std::pow(rg->rho[k], 3) / 3.0;
        c[0] += r3 * std::cos(th);
        c[1] += r3 * std::sin(th);
        mass += std::pow(rg->rho[k], 2) / 2.0;
      }
      if (mass > 0) {
        c[0] /= mass;
        c[1] /= mass;
      }
    } else if (const auto* g = std::get_if<GridSet>(&E.sets[j])) {
      double x[3];
      std::size_t cnt = 0;
      for (int iy = 0; iy < g->n[1]; ++iy)
        for (int ix = 0; ix < g->n[0]; ++ix)
          if (g->cell[g->index(ix, iy, 0)]) {
            g->center(ix, iy, 0, x);
            for (int k = 0; k < d; ++k) c[k] += x[k];
            ++cnt;
          }
      if (cnt)
        for (int k = 0; k < d; ++k) c[k] /= static_cast<double>(cnt);
    }
    for (int k = 0; k < d; ++k) C(j, k) = c[k];
  }
  Eigen::MatrixXd V = (A.transpose() * A).ldlt().solve(A.transpose() * C);
  std::vector<double> v(static_cast<std::size_t>(m) * d, 0.0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < d; ++k) v[static_cast<std::size_t>(i) * d + k] = V(i, k);
  return v;
}

}  // namespace

OrbitResult dist_to_orbit(const LinearFamily& fam, const SetTuple& E,
                          const MeasureSpec& spec, const OrbitOptions& opts) {
  const int d = E.d;
  if (d != 1 && d != 2) throw std::invalid_argument("dist_to_orbit: d in {1,2}");
  const int m = fam.m;
  const int nv = m * d;
  const int np = nv + (d == 2 ? 3 : 0);
  const double rmax = *std::max_element(spec.r.begin(), spec.r.end());

  Objective obj{&fam, &E, &spec, d, opts.ntheta_search};

  auto pattern_search = [&](std::vector<double> p) {
    std::vector<double> step(np);
    for (int i = 0; i < np; ++i) step[i] = i < nv ? 0.25 * rmax : 0.25;
    auto best = obj(p);
    const double tol = opts.step_tol_rel * rmax;
    for (int it = 0; it < opts.max_iters; ++it) {
      bool improved = false;
      for (int i = 0; i < np; ++i) {
        for (int s = -1; s <= 1; s += 2) {
          std::vector<double> q = p;
          q[i] += s * step[i];
          const auto val = obj(q);
          if (lex_less(val, best)) {
            best = val;
            p = std::move(q);
            improved = true;
          }
        }
      }
      if (!improved) {
        double mx = 0;
        for (int i = 0; i < np; ++i) {
          step[i] *= opts.contraction;
          mx = std::max(mx, step[i]);
        }
        if (mx < tol) break;
      }
    }
    return std::make_pair(p, best);
  };

  std::vector<std::vector<double>> starts;
  starts.emplace_back(np, 0.0);
  {
    std::vector<double> h(np, 0.0);
    const std::vector<double> v = centroid_heuristic(fam, E);
    std::copy(v.begin(), v.end(), h.begin());
    starts.push_back(h);
    if (d == 2) {
      std::vector<double> flip = h;  // psi = -I start (rotation by pi)
      flip[nv + 1] = geom::kPi;
      flip[nv + 2] = -geom::kPi;
      starts.push_back(flip);
    }
  }
  RngStream rng(opts.seed, 0);
  while (static_cast<int>(starts.size()) < opts.restarts) {
    std::vector<double> p(np);
    for (int i = 0; i < np; ++i)
      p[i] = i < nv ? rng.uniform(-0.5 * rmax, 0.5 * rmax) : rng.uniform(-0.4, 0.4);
    starts.push_back(std::move(p));
  }

  OrbitResult res;
  std::vector<double> best_p;
  std::pair<double, double> best_val{1e300, 1e300};
  for (const auto& s : starts) {
    auto [p, val] = pattern_search(s);
    res.restart_values.push_back(val.first);
    if (lex_less(val, best_val)) {
      best_val = val;
      best_p = p;
    }
  }

  // refine the winning point at the final angular resolution
  obj.ntheta = opts.ntheta_final;
  auto [pf, vf] = pattern_search(best_p);
  best_p = pf;
  best_val = vf;

  res.distance = best_val.first;
  res.secondary_sum = best_val.second;
  res.v.assign(best_p.begin(), best_p.begin() + nv);
  if (d == 2) {
    res.generator = {best_p[nv], best_p[nv + 1], best_p[nv + 2]};
    const auto e2 = sl2_exp(res.generator[0], res.generator[1], res.generator[2]);
    res.psi = {e2[0], e2[1], 0, e2[2], e2[3], 0, 0, 0, 1};
  }
  res.converged = true;

  std::vector<double> sorted = res.restart_values;
  std::sort(sorted.begin(), sorted.end());
  res.spread = sorted[sorted.size() / 2] - sorted.front();
  for (std::size_t i = 0; i < res.restart_values.size(); ++i)
    if (res.restart_values[i] <= best_val.first * 1.01 + 1e-15)
      res.near_best.push_back(static_cast<int>(i));
  return res;
}

std::string serialize_orbit_result(const OrbitResult& r) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "distance = %.17g\nsum = %.17g\n", r.distance,
                r.secondary_sum);
  os << buf;
  os << "v =";
  for (double v : r.v) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "\npsi = %.17g %.17g %.17g %.17g\ngenerator = %.17g %.17g %.17g\n",
                r.psi[0], r.psi[1], r.psi[3], r.psi[4], r.generator[0],
                r.generator[1], r.generator[2]);
  os << buf;
  std::snprintf(buf, sizeof buf, "spread = %.17g\nconverged = %d\n", r.spread,
                r.converged ? 1 : 0);
  os << buf;
  os << "near_best =";
  for (int i : r.near_best) os << " " << i;
  os << "\n";
  return os.str();
}

}  // namespace rbll
