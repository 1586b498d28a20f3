#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rbll/family.hpp"
#include "rbll/settuple.hpp"

namespace rbll {

// exp of the trace-free 2x2 matrix [[a, b], [c, -a]] (closed form).
std::array<double, 4> sl2_exp(double a, double b, double c);

struct OrbitOptions {
  int restarts = 16;
  int max_iters = 400;
  double contraction = 0.5;
  double step_tol_rel = 1e-4;  // of r_max
  int ntheta_search = 256;
  int ntheta_final = 2048;
  std::uint64_t seed = 7;
};

struct OrbitResult {
  double distance = 0;        // max_j |E_j Delta (psi(B_j) + L_j(v))| at the best point
  double secondary_sum = 0;   // tie-break objective at the best point
  std::vector<double> v;      // m*d translation parameters
  std::array<double, 9> psi{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> generator{0, 0, 0};  // (a, b, c) of the SL(2) chart
  bool converged = false;
  double spread = 0;  // median restart value minus best (confidence gap)
  std::vector<double> restart_values;
  std::vector<int> near_best;  // restart ids within 1% of the best value
};

// dist(E, orbit(E*)) by derivative-free pattern search with multi-start over
// v in R^{md} and psi = exp(M), M trace-free (d = 2; for d = 1 the group is
// trivial and only v is searched). The returned value is a certified upper
// bound; restart spread gauges confidence.
OrbitResult dist_to_orbit(const LinearFamily& fam, const SetTuple& E,
                          const MeasureSpec& spec, const OrbitOptions& opts = {});

std::string serialize_orbit_result(const OrbitResult& r);

}  // namespace rbll
