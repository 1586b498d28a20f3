#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rbll/family.hpp"
#include "rbll/harmonic.hpp"
#include "rbll/kernels.hpp"

namespace rbll {

// Orthonormal projection of samples of F on the uniform angle grid onto the
// degree-nu circular harmonics; returns (p, q) in the {cos/sqrt(pi),
// sin/sqrt(pi)} basis. nu must stay below the grid Nyquist degree.
std::array<double, 2> project_pi_nu(std::span<const double> samples, int nu);

struct SpectralOptions {
  int nphi = 2048;       // angular grid for the generic kernel quadrature
  int legendre_n = 256;  // Gauss nodes for d = 3 zonal integrals
  KernelOptions kernel;
};

// Per-degree scalar of the operator T_{i,j} with kernel M_{i,j}(r_i ., r_j .)
// on H_nu. For d = 2, m = 2 the kernel is an indicator of an arc in the angle
// difference and the Fourier coefficient is integrated arc-exactly;
// otherwise trapezoid (d = 2) or Gauss-Legendre against Legendre polynomials
// (d = 3 zonal).
double lambda_scalar(const LinearFamily& fam, std::span<const double> e, int d,
                     int i, int j, int nu, const SpectralOptions& opts = {});

// Q(G) = sum over unordered pairs {i,j} of lambda_{i,j}(nu) <G_i, G_j>; this
// matches the second-order term of the multilinear expansion of Phi, where
// each pair appears once.
double eval_Q(const HarmonicTuple& G, const LinearFamily& fam,
              std::span<const double> e, int d, const SpectralOptions& opts = {});

struct SpectralReport {
  int nu_max = 0;
  std::vector<double> w;  // gamma_j r_j^{1-d}
  std::vector<int> Jprime;
  int n = 0;
  // per degree nu = 1..nu_max
  std::vector<std::vector<double>> lambda;  // packed upper triangle (i < j)
  std::vector<double> A_nu;                 // balanced max ratio
  std::vector<double> A_nu_full;            // unbalanced ratio (diagnostic)
  std::vector<double> Lambda_nu;            // operator norm bound of Q on H_nu^J
  double A = 0;                             // max over balanced degrees
  double gap_margin = 0;                    // 1/2 - A
};

// Assembles, per degree, the quadratic-form matrix of Q on the degree-nu
// coefficient space, restricts to the balanced coordinates and reports the
// maximal weighted ratio A_nu together with the decay diagnostics Lambda_nu.
SpectralReport balanced_gap(const LinearFamily& fam, std::span<const double> e,
                            int d, std::span<const int> Jprime, int n, int nu_max,
                            const SpectralOptions& opts = {});

std::string serialize_spectral(const SpectralReport& rep, const LinearFamily& fam);

// Univariate polynomial, ascending coefficients.
struct Poly1 {
  std::vector<double> c;
  double eval(double x) const {
    double v = 0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
  }
  bool zero(double tol = 0.0) const {
    for (double v : c)
      if (std::abs(v) > tol) return false;
    return true;
  }
};

// The equatorial shadow P_j of a degree-nu harmonic component (d = 2): keep
// the part odd in x_2, divide by x_2, substitute x_2^2 = r^2 - x_1^2 and
// scale by r^{2-d-nu}.
Poly1 extract_P(const std::array<double, 2>& comp, int nu, double r, int d = 2);

// P_sharp at the point of Lambda_{d-1} parametrized by u in R^m: the distance
// from (P_j(L_j u))_j to the compatibility subspace Lambda_1 = col(coeffs).
double p_sharp(const HarmonicTuple& G, const LinearFamily& fam,
               std::span<const double> r, std::span<const double> u);

struct RotationCertificate {
  bool found = false;
  int trials = 0;
  double angle = 0;
  bool reflected = false;
  double integral = 0;  // int P_sharp^2 over the unit u-circle
};

// Searches rotations A with P_sharp(A(G)) not identically zero; exhaustion
// would contradict the nonvanishing property of balanced tuples and is
// reported as a failure.
RotationCertificate find_rotation_nonvanishing(const HarmonicTuple& G,
                                               const LinearFamily& fam,
                                               std::span<const double> r,
                                               int max_trials = 64,
                                               std::uint64_t seed = 17);

}  // namespace rbll
