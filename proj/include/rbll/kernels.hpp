#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbll/family.hpp"

namespace rbll {

struct KernelOptions {
  double quad_tol = 1e-12;      // absolute tolerance of the slice quadrature
  std::uint64_t mc_samples = 1u << 18;  // fiber Monte Carlo size (m >= 3, d >= 2)
  std::uint64_t seed = 1234;
};

// K_j evaluated at (t,0,...,0): the density of the pushforward under L_j of
// the product of ball indicators over i != j. Measures e are the full tuple;
// e_j itself does not enter. Exact slice quadrature for m = 2 (any d) and
// for d = 1, m = 3 (polygon area); seeded Monte Carlo otherwise.
double eval_K(const LinearFamily& fam, std::span<const double> e, int d, int j,
              double t, const KernelOptions& opts = {});

struct LeftDerivativeEstimate {
  bool applicable = false;  // kernel positive at the evaluation point
  double t0 = 0;            // boundary point r_j
  double value = 0;         // one-sided derivative D^- K_j(t0)
  double error = 0;         // Richardson consistency estimate
};

// One-sided derivative of t -> K_j(t,0,...,0) at the admissibility boundary
// (t0 = e_j/2 for d = 1, t0 = r_j for d >= 2; both equal the ball radius).
LeftDerivativeEstimate left_derivative(const LinearFamily& fam,
                                       std::span<const double> e, int d, int j,
                                       const KernelOptions& opts = {});

struct GammaEstimate {
  double gamma = 0;   // |grad K_j| on {|x| = r_j}
  double d_minus = 0;
  double d_plus = 0;
  double mismatch = 0;  // |D+ - D-|; large values flag non-strict admissibility
  bool two_sided_ok = false;
};

// Gradient magnitude of K_j on the sphere of radius r_j (d >= 2). Two-sided
// difference agreement certifies differentiability numerically.
GammaEstimate gamma(const LinearFamily& fam, std::span<const double> e, int d,
                    int j, const KernelOptions& opts = {});

struct KernelProfile {
  int j = -1;
  int d = 1;
  double support_radius = 0;  // largest t with K_j(t) > 0
  std::vector<double> t;
  std::vector<double> value;
};

KernelProfile kernel_profile(const LinearFamily& fam, std::span<const double> e,
                             int d, int j, int npts = 256,
                             const KernelOptions& opts = {});

std::string serialize_profile(const KernelProfile& p);

// Two-point kernel M_{i,j}: after the change of variables sending L_i, L_j to
// the first two coordinate blocks, M factors into c_{i,j}, an indicator over
// the maps in span{L_i, L_j} (index set J''), and a fiber integral over the
// remaining maps (index set J').
struct PairKernel {
  int i = -1, j = -1;
  int d = 1;
  double c = 1;  // |det|^{-d} of the change-of-variables matrix
  std::vector<int> span_pair;   // J'': k with L_k in span{L_i, L_j}
  std::vector<int> fiber_rest;  // J'
  // per index k != i,j: L_k(x) = alpha_k w + beta_k z + g_k . y_fiber
  std::vector<int> ks;
  std::vector<double> alpha, beta;
  std::vector<std::vector<double>> g;
  std::vector<double> r;  // ball radii of the k-indexed sets
  int m = 0;

  double eval(std::span<const double> x, std::span<const double> y,
              const KernelOptions& opts = {}) const;
};

PairKernel make_pair_kernel(const LinearFamily& fam, std::span<const double> e,
                            int d, int i, int j);

double eval_M(const LinearFamily& fam, std::span<const double> e, int d, int i,
              int j, std::span<const double> x, std::span<const double> y,
              const KernelOptions& opts = {});

}  // namespace rbll
