#include "rbll/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rbll/admissibility.hpp"
#include "rbll/kernels.hpp"
#include "rbll/orbit.hpp"

namespace rbll {

PowerFit fit_power_law(std::span<const DeficitPoint> pts) {
  PowerFit fit;
  // reliable window: clearly resolved points, in the largest contiguous run
  std::vector<int> good;
  for (std::size_t q = 0; q < pts.size(); ++q)
    if (pts[q].deficit > 5 * pts[q].error &&
        pts[q].error < 0.2 * pts[q].deficit &&
        pts[q].s > 0)
      good.push_back(static_cast<int>(q));
  if (good.size() < 3) return fit;

  // weighted least squares on (log s, log deficit)
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int q : good) {
    const double x = std::log(pts[q].s);
    const double y = std::log(pts[q].deficit);
    const double sig = std::max(pts[q].error / pts[q].deficit, 1e-6);
    const double w = 1.0 / (sig * sig);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double den = sw * sxx - sx * sx;
  if (den <= 0) return fit;
  fit.exponent = (sw * sxy - sx * sy) / den;
  const double intercept = (sy * sxx - sx * sxy) / den;
  fit.c = std::exp(intercept);
  // scatter-scaled slope error
  double chi2 = 0;
  for (int q : good) {
    const double x = std::log(pts[q].s);
    const double y = std::log(pts[q].deficit);
    const double res = y - (fit.exponent * x + intercept);
    const double sig = std::max(pts[q].error / pts[q].deficit, 1e-6);
    chi2 += res * res / (sig * sig);
  }
  const double dof = std::max<double>(1.0, static_cast<double>(good.size()) - 2);
  fit.exponent_stderr = std::sqrt(std::max(1.0, chi2 / dof) * sw / den);
  fit.used = static_cast<int>(good.size());
  fit.ok = true;
  return fit;
}

DeficitCurve deficit_curve(const LinearFamily& fam, const MeasureSpec& spec,
                           const HarmonicTuple& G, std::span<const double> svals,
                           Engine engine, const StabilityOptions& opts) {
  DeficitCurve curve;
  curve.nu = G.nu;
  curve.engine = engine;
  DeficitOptions dopts = opts.deficit;
  for (std::size_t q = 0; q < svals.size(); ++q) {
    const double s = svals[q];
    SetTuple E = radial_from_harmonic(G, s, spec);
    dopts.seed = opts.deficit.seed + q;  // independent stream per point
    DeficitEstimate de = deficit(fam, E, spec, engine, dopts);
    curve.points.push_back({s, de.value, de.error});
  }
  curve.fit = fit_power_law(curve.points);
  return curve;
}

HarmonicTuple symmetry_direction_tuple(SymmetryKind kind,
                                       std::span<const double> param,
                                       const LinearFamily& fam,
                                       const MeasureSpec& spec) {
  if (spec.d != 2)
    throw std::invalid_argument("symmetry_direction_tuple: d = 2 only");
  const int J = fam.J(), m = fam.m;
  const int d = 2;

  HarmonicTuple G;
  G.nu = kind == SymmetryKind::translation ? 1 : 2;
  G.comp.assign(J, {0.0, 0.0});

  // orbit path at parameter t, as exact ellipsoids
  auto path = [&](double t) {
    SetTuple E;
    E.d = d;
    for (int j = 0; j < J; ++j) {
      Ellipsoid el;
      el.r = spec.r[j];
      if (kind == SymmetryKind::translation) {
        for (int k = 0; k < d; ++k) {
          double s = 0;
          for (int i = 0; i < m; ++i)
            s += fam.coef(j, i) * param[static_cast<std::size_t>(i) * d + k];
          el.c[k] = t * s;
        }
      } else {
        const auto e2 = sl2_exp(t * param[0], t * param[1], t * param[2]);
        el.psi = {e2[0], e2[1], 0, e2[2], e2[3], 0, 0, 0, 1};
      }
      E.sets.emplace_back(el);
    }
    return E;
  };

  double pscale = 0;
  for (double v : param) pscale = std::max(pscale, std::abs(v));
  if (pscale == 0) return G;  // zero direction -> zero tuple

  const double rmin = *std::min_element(spec.r.begin(), spec.r.end());
  const double t0 = 0.05 * rmin / pscale;

  const int ntheta = 512;
  const std::vector<BoundaryProfile> f1 = boundary_profiles(path(t0), spec, ntheta);
  const std::vector<BoundaryProfile> f2 = boundary_profiles(path(0.5 * t0), spec, ntheta);
  for (int j = 0; j < J; ++j) {
    std::vector<double> g(ntheta);
    for (int k = 0; k < ntheta; ++k)
      g[k] = (4 * f2[j].F[k] - f1[j].F[k]) / t0;  // Richardson in t
    G.comp[j] = project_pi_nu(g, G.nu);
  }
  return G;
}

ExpansionReport expansion_check(const LinearFamily& fam, const MeasureSpec& spec,
                                const HarmonicTuple& G,
                                std::span<const double> svals,
                                const StabilityOptions& opts) {
  ExpansionReport rep;
  const int d = spec.d;
  double gamma_term = 0;
  for (int j = 0; j < fam.J(); ++j) {
    GammaEstimate g = gamma(fam, spec.e, d, j, opts.spectral.kernel);
    gamma_term += g.gamma * std::pow(spec.r[j], 1 - d) * G.norm2(j);
  }
  rep.gamma_term = 0.5 * gamma_term;
  rep.Q = eval_Q(G, fam, spec.e, d, opts.spectral);

  DeficitCurve curve = deficit_curve(fam, spec, G, svals, Engine::fiber, opts);
  std::vector<DeficitPoint> residuals;
  for (const DeficitPoint& p : curve.points) {
    ExpansionPoint ep;
    ep.s = p.s;
    ep.measured = p.deficit;
    ep.predicted = p.s * p.s * (rep.gamma_term - rep.Q);
    ep.residual = std::abs(ep.measured - ep.predicted);
    ep.error = p.error;
    rep.points.push_back(ep);
    residuals.push_back({ep.s, ep.residual, ep.error});
  }

  bool any_resolved = false;
  for (const auto& r : residuals)
    if (r.deficit > 5 * r.error) any_resolved = true;
  rep.below_noise = !any_resolved;
  if (any_resolved) {
    PowerFit f = fit_power_law(residuals);
    rep.residual_slope = f.ok ? f.exponent : 0;
    rep.slope_ok = f.ok && f.exponent > 2.5;
  } else {
    rep.slope_ok = true;  // remainder indistinguishable from zero
  }
  return rep;
}

std::string serialize_curve(const DeficitCurve& c) {
  std::ostringstream os;
  os << "s,deficit,error\n";
  char buf[120];
  for (const DeficitPoint& p : c.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.s, p.deficit, p.error);
    os << buf;
  }
  if (c.fit.ok) {
    std::snprintf(buf, sizeof buf, "# fit: exponent = %.6g +- %.3g  c = %.6g  (n=%d)\n",
                  c.fit.exponent, c.fit.exponent_stderr, c.fit.c, c.fit.used);
    os << buf;
  } else {
    os << "# fit: indeterminate (all points below the noise floor)\n";
  }
  return os.str();
}

}  // namespace rbll
