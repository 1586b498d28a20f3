#include "rbll/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rbll/admissibility.hpp"
#include "rbll/rng.hpp"

namespace rbll {

std::array<double, 2> project_pi_nu(std::span<const double> samples, int nu) {
  const int n = static_cast<int>(samples.size());
  if (nu < 0 || 2 * nu >= n)
    throw std::invalid_argument("project_pi_nu: degree beyond grid Nyquist");
  double p = 0, q = 0;
  for (int k = 0; k < n; ++k) {
    const double th = 2 * geom::kPi * k / n;
    p += samples[k] * std::cos(nu * th);
    q += samples[k] * std::sin(nu * th);
  }
  const double norm = 2 * geom::kPi / n / std::sqrt(geom::kPi);
  return {p * norm, q * norm};
}

namespace {

// m = 2, d = 2: k(phi) = c * prod of arc indicators in cos(phi); the
// intersection is a single interval [lo, hi] in [0, pi] and the Fourier
// coefficient is exact.
bool lambda_arcs_m2(const LinearFamily& fam, std::span<const double> e, int i,
                    int j, int nu, double* out) {
  if (fam.m != 2) return false;
  PairKernel pk = make_pair_kernel(fam, e, 2, i, j);
  const std::vector<double> r = radii_from_measures(e, 2);
  double lo = 0, hi = geom::kPi;
  for (std::size_t q = 0; q < pk.ks.size(); ++q) {
    const double al = pk.alpha[q], be = pk.beta[q];
    const double s = 2 * al * be * r[i] * r[j];
    const double R = pk.r[q] * pk.r[q] - al * al * r[i] * r[i] - be * be * r[j] * r[j];
    if (s == 0) return false;  // excluded by nondegeneracy
    const double h = R / s;
    if (s > 0) {
      // cos(phi) <= h  -> phi in [acos(min(h,1)), pi]
      if (h < -1) {
        *out = 0;
        return true;
      }
      if (h < 1) lo = std::max(lo, std::acos(h));
    } else {
      // cos(phi) >= h  -> phi in [0, acos(max(h,-1))]
      if (h > 1) {
        *out = 0;
        return true;
      }
      if (h > -1) hi = std::min(hi, std::acos(h));
    }
  }
  if (!(lo < hi)) {
    *out = 0;
    return true;
  }
  *out = 2.0 * pk.c * (std::sin(nu * hi) - std::sin(nu * lo)) / nu;
  return true;
}

double legendre(int n, double x) {
  double p0 = 1, p1 = x;
  if (n == 0) return p0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace

double lambda_scalar(const LinearFamily& fam, std::span<const double> e, int d,
                     int i, int j, int nu, const SpectralOptions& opts) {
  if (i == j) throw std::invalid_argument("lambda_scalar: need i != j");
  if (nu < 1) throw std::invalid_argument("lambda_scalar: nu >= 1");
  const std::vector<double> r = radii_from_measures(e, d);
  if (d == 2) {
    double out;
    if (lambda_arcs_m2(fam, e, i, j, nu, &out)) return out;
    // generic rotation-invariant kernel of the angle difference
    PairKernel pk = make_pair_kernel(fam, e, d, i, j);
    const int N = opts.nphi;
    double sum = 0;
    const double x[2] = {r[i], 0};
    for (int k = 0; k < N; ++k) {
      const double phi = 2 * geom::kPi * k / N;
      const double y[2] = {r[j] * std::cos(phi), r[j] * std::sin(phi)};
      sum += pk.eval({x, 2}, {y, 2}, opts.kernel) * std::cos(nu * phi);
    }
    return sum * 2 * geom::kPi / N;
  }
  if (d == 3) {
    // zonal kernel: Funk-Hecke, lambda = 2 pi int k(t) P_nu(t) dt
    PairKernel pk = make_pair_kernel(fam, e, d, i, j);
    if (fam.m == 2) {
      // indicator kernel: the constraints carve an interval in t = x.y and
      // int P_nu has the closed antiderivative (P_{nu+1} - P_{nu-1})/(2nu+1)
      double lo = -1, hi = 1;
      for (std::size_t q = 0; q < pk.ks.size(); ++q) {
        const double al = pk.alpha[q], be = pk.beta[q];
        const double s = 2 * al * be * r[i] * r[j];
        const double R =
            pk.r[q] * pk.r[q] - al * al * r[i] * r[i] - be * be * r[j] * r[j];
        if (s == 0) throw StructuralError("lambda_scalar: proportional rows");
        const double h = R / s;
        if (s > 0)
          hi = std::min(hi, h);
        else
          lo = std::max(lo, h);
      }
      if (!(lo < hi)) return 0.0;
      auto anti = [&](double t) {
        return (legendre(nu + 1, t) - legendre(nu - 1, t)) / (2 * nu + 1);
      };
      return 2 * geom::kPi * pk.c * (anti(hi) - anti(lo));
    }
    std::vector<double> t, w;
    geom::gauss_legendre(opts.legendre_n, -1, 1, t, w);
    double sum = 0;
    const double x[3] = {0, 0, r[i]};
    for (int k = 0; k < opts.legendre_n; ++k) {
      const double s = std::sqrt(std::max(0.0, 1 - t[k] * t[k]));
      const double y[3] = {r[j] * s, 0, r[j] * t[k]};
      sum += w[k] * pk.eval({x, 3}, {y, 3}, opts.kernel) * legendre(nu, t[k]);
    }
    return 2 * geom::kPi * sum;
  }
  throw std::invalid_argument("lambda_scalar: d in {2,3}");
}

double eval_Q(const HarmonicTuple& G, const LinearFamily& fam,
              std::span<const double> e, int d, const SpectralOptions& opts) {
  const int J = fam.J();
  if (G.J() != J) throw std::invalid_argument("eval_Q: component count mismatch");
  double q = 0;
  for (int i = 0; i < J; ++i)
    for (int j = i + 1; j < J; ++j) {
      const double inner = G.comp[i][0] * G.comp[j][0] + G.comp[i][1] * G.comp[j][1];
      if (inner == 0) continue;
      q += lambda_scalar(fam, e, d, i, j, G.nu, opts) * inner;
    }
  return q;
}

SpectralReport balanced_gap(const LinearFamily& fam, std::span<const double> e,
                            int d, std::span<const int> Jprime, int n, int nu_max,
                            const SpectralOptions& opts) {
  const int J = fam.J();
  SpectralReport rep;
  rep.nu_max = nu_max;
  rep.Jprime.assign(Jprime.begin(), Jprime.end());
  rep.n = n;

  const std::vector<double> r = radii_from_measures(e, d);
  rep.w.resize(J);
  for (int j = 0; j < J; ++j) {
    GammaEstimate g;
    try {
      g = gamma(fam, e, d, j, opts.kernel);
    } catch (const ComputationError&) {
      throw StructuralError("balanced_gap: gamma_j unavailable "
                            "(is (L,e) strictly admissible?)");
    }
    if (!g.two_sided_ok)
      throw StructuralError("balanced_gap: gamma not two-sided differentiable "
                            "(is (L,e) strictly admissible?)");
    rep.w[j] = g.gamma * std::pow(r[j], 1 - d);
    if (!(rep.w[j] > 0))
      throw StructuralError("balanced_gap: vanishing weight gamma_j");
  }

  rep.A = 0;
  for (int nu = 1; nu <= nu_max; ++nu) {
    std::vector<double> lam;
    // quadratic-form matrix of Q: each unordered pair contributes once, so
    // the symmetric matrix carries lambda/2 off the diagonal
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(J, J);
    for (int i = 0; i < J; ++i)
      for (int j = i + 1; j < J; ++j) {
        const double l = lambda_scalar(fam, e, d, i, j, nu, opts);
        lam.push_back(l);
        M(i, j) = M(j, i) = 0.5 * l;
      }
    rep.lambda.push_back(std::move(lam));

    Eigen::VectorXd wsqrt(J);
    for (int j = 0; j < J; ++j) wsqrt(j) = std::sqrt(rep.w[j]);
    Eigen::MatrixXd S = M;
    for (int i = 0; i < J; ++i)
      for (int j = 0; j < J; ++j) S(i, j) /= wsqrt(i) * wsqrt(j);

    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      rep.A_nu_full.push_back(es.eigenvalues().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> en(M);
      rep.Lambda_nu.push_back(
          std::max(std::abs(en.eigenvalues().minCoeff()), en.eigenvalues().maxCoeff()));
    }

    // balanced coordinate subspace
    std::vector<int> keep;
    for (int j = 0; j < J; ++j) {
      if (nu == 1 && std::find(Jprime.begin(), Jprime.end(), j) != Jprime.end())
        continue;
      if (nu == 2 && j == n) continue;
      keep.push_back(j);
    }
    double a = 0;
    if (!keep.empty()) {
      Eigen::MatrixXd Sb(keep.size(), keep.size());
      for (std::size_t a1 = 0; a1 < keep.size(); ++a1)
        for (std::size_t b1 = 0; b1 < keep.size(); ++b1)
          Sb(static_cast<int>(a1), static_cast<int>(b1)) = S(keep[a1], keep[b1]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sb);
      a = es.eigenvalues().maxCoeff();
    }
    rep.A_nu.push_back(a);
    rep.A = std::max(rep.A, a);
  }
  rep.gap_margin = 0.5 - rep.A;
  return rep;
}

std::string serialize_spectral(const SpectralReport& rep, const LinearFamily& fam) {
  std::ostringstream os;
  const int J = fam.J();
  os << "nu";
  for (int i = 0; i < J; ++i)
    for (int j = i + 1; j < J; ++j)
      os << ",lambda_" << fam.labels[i] << "_" << fam.labels[j];
  os << ",A_nu,A_nu_full,Lambda_nu\n";
  char buf[96];
  for (int nu = 1; nu <= rep.nu_max; ++nu) {
    os << nu;
    for (double l : rep.lambda[nu - 1]) {
      std::snprintf(buf, sizeof buf, ",%.17g", l);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", rep.A_nu[nu - 1],
                  rep.A_nu_full[nu - 1], rep.Lambda_nu[nu - 1]);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# A = %.17g  margin = %.17g\n", rep.A,
                rep.gap_margin);
  os << buf;
  return os.str();
}

Poly1 extract_P(const std::array<double, 2>& comp, int nu, double r, int d) {
  if (d != 2) throw std::invalid_argument("extract_P: d = 2 only");
  // G = (p Re + q Im)[(x1 + i x2)^nu] / sqrt(pi); only the Im part carries
  // monomials odd in x2. Divide by x2 and substitute x2^2 = r^2 - x1^2.
  Poly1 P;
  P.c.assign(static_cast<std::size_t>(std::max(nu, 1)), 0.0);
  const double q = comp[1] / std::sqrt(geom::kPi);
  if (q == 0) {
    P.c = {0.0};
    return P;
  }
  const double scale = q * std::pow(r, 2 - d - nu);
  // binomials
  std::vector<double> C(nu + 1, 0.0);
  C[0] = 1;
  for (int row = 1; row <= nu; ++row)
    for (int k = row; k >= 1; --k) C[k] += C[k - 1];
  // sum over odd k: C(nu,k) (-1)^((k-1)/2) x1^(nu-k) (r^2 - x1^2)^((k-1)/2)
  for (int k = 1; k <= nu; k += 2) {
    const int half = (k - 1) / 2;
    const double sign = (half % 2 == 0) ? 1.0 : -1.0;
    // expand (r^2 - x^2)^half
    std::vector<double> bin(half + 1, 0.0);
    bin[0] = 1;
    for (int row = 1; row <= half; ++row)
      for (int t = row; t >= 1; --t) bin[t] += bin[t - 1];
    for (int t = 0; t <= half; ++t) {
      const double coef = sign * C[k] * bin[t] * std::pow(r * r, half - t) *
                          ((t % 2 == 0) ? 1.0 : -1.0);
      const int deg = (nu - k) + 2 * t;
      if (deg >= static_cast<int>(P.c.size())) P.c.resize(deg + 1, 0.0);
      P.c[deg] += scale * coef;
    }
  }
  return P;
}

double p_sharp(const HarmonicTuple& G, const LinearFamily& fam,
               std::span<const double> r, std::span<const double> u) {
  const int J = fam.J(), m = fam.m;
  Eigen::MatrixXd A(J, m);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < m; ++i) A(j, i) = fam.coef(j, i);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Qthin = qr.householderQ() * Eigen::MatrixXd::Identity(J, m);

  Eigen::VectorXd w(J);
  for (int j = 0; j < J; ++j) {
    double yj = 0;
    for (int i = 0; i < m; ++i) yj += fam.coef(j, i) * u[i];
    w(j) = extract_P(G.comp[j], G.nu, r[j]).eval(yj);
  }
  const Eigen::VectorXd res = w - Qthin * (Qthin.transpose() * w);
  return res.norm();
}

RotationCertificate find_rotation_nonvanishing(const HarmonicTuple& G,
                                               const LinearFamily& fam,
                                               std::span<const double> r,
                                               int max_trials, std::uint64_t seed) {
  if (G.zero(1e-300))
    throw std::invalid_argument("find_rotation_nonvanishing: G must be nonzero");

  const double gnorm2 = G.norm2();
  auto integral = [&](const HarmonicTuple& H) {
    const int N = 128;
    double s = 0;
    for (int k = 0; k < N; ++k) {
      const double tau = 2 * geom::kPi * k / N;
      const double u[2] = {std::cos(tau), std::sin(tau)};
      const double v = p_sharp(H, fam, r, {u, 2});
      s += v * v;
    }
    return s * 2 * geom::kPi / N;
  };

  RotationCertificate cert;
  RngStream rng(seed, 3);
  const double threshold = 1e-10 * gnorm2;
  for (int trial = 0; trial < max_trials; ++trial) {
    double angle = 0;
    bool refl = false;
    if (trial > 0) {
      angle = rng.uniform(0, 2 * geom::kPi);
      refl = (trial % 2) == 0;
    }
    HarmonicTuple H = rotate_harmonic(G, angle);
    if (refl) H = reflect_harmonic(H);
    const double I = integral(H);
    cert.trials = trial + 1;
    if (I > threshold) {
      cert.found = true;
      cert.angle = angle;
      cert.reflected = refl;
      cert.integral = I;
      return cert;
    }
  }
  cert.found = false;  // would contradict nonvanishing for balanced tuples
  return cert;
}

}  // namespace rbll
