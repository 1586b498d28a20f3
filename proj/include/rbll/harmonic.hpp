#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "rbll/geometry.hpp"

namespace rbll {

// J-tuple of circular harmonics of one common degree (d = 2). Components are
// stored in the orthonormal basis {cos(nu t)/sqrt(pi), sin(nu t)/sqrt(pi)} of
// H_nu in L^2(S^1, dtheta), so ||G_j||^2 = p_j^2 + q_j^2.
struct HarmonicTuple {
  int nu = 1;
  int d = 2;
  std::vector<std::array<double, 2>> comp;  // (p_j, q_j)

  int J() const { return static_cast<int>(comp.size()); }

  double eval(int j, double theta) const {
    const double s = 1.0 / std::sqrt(geom::kPi);
    return s * (comp[j][0] * std::cos(nu * theta) + comp[j][1] * std::sin(nu * theta));
  }
  double norm2(int j) const { return comp[j][0] * comp[j][0] + comp[j][1] * comp[j][1]; }
  double norm2() const {
    double s = 0;
    for (int j = 0; j < J(); ++j) s += norm2(j);
    return s;
  }
  bool zero(double tol = 0.0) const { return norm2() <= tol; }
};

// Balanced relative to (J', n): nu >= 3 always; nu = 2 requires G_n = 0;
// nu = 1 requires G_j = 0 for every j in J'.
bool is_balanced(const HarmonicTuple& G, std::span<const int> Jprime, int n,
                 double tol = 1e-12);

// G composed with the rotation by angle alpha (points x -> R_alpha x).
HarmonicTuple rotate_harmonic(const HarmonicTuple& G, double alpha);

// G composed with the reflection (x1, x2) -> (x1, -x2).
HarmonicTuple reflect_harmonic(const HarmonicTuple& G);

}  // namespace rbll
