#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbll/family.hpp"
#include "rbll/functional.hpp"
#include "rbll/settuple.hpp"

namespace rbll {

// One diagonal Steiner symmetrization step at raster resolution: cells are
// binned by their coordinate along u-perp and each bin's cells move to the
// positions closest to the u = 0 line (a permutation, so measures are
// preserved exactly at raster level). d in {1, 2}, Grid representation.
SetTuple steiner_step(const SetTuple& E, std::span<const double> u);

struct FlowPoint {
  int step = 0;
  double phi = 0;
  double std_error = 0;
  double dist = 0;  // max_j |E_j Delta B_j|
};

struct FlowResult {
  std::vector<FlowPoint> trajectory;
  bool stalled = false;
  SetTuple final;
};

struct FlowOptions {
  int steps = 50;
  std::uint64_t mc_samples = 1u << 16;
  std::uint64_t seed = 99;  // one stream per trajectory (common random numbers)
  bool golden_schedule = true;  // angles pi k (sqrt(5)-1)/2 mod pi, else axes
};

// Steiner flow toward the ball tuple with a Phi estimate and the distance to
// balls recorded per step.
FlowResult flow_to_balls(const LinearFamily& fam, const SetTuple& E,
                         const MeasureSpec& spec, const FlowOptions& opts = {});

std::string serialize_trajectory(const FlowResult& r);

}  // namespace rbll
