#pragma once

#include <cstdint>
#include <string>

#include "rbll/family.hpp"
#include "rbll/settuple.hpp"

namespace rbll {

enum class Engine { mc, fiber, exact };
Engine engine_from_string(const std::string& s);
std::string to_string(Engine e);

struct MCEstimate {
  double value = 0;
  double std_error = 0;
  double boxvol = 0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo evaluation of Phi_L(E). Coordinates are changed so that the
// maps indexed by J' become coordinate projections; samples are drawn from
// the bounding boxes of E_j, j in J', and the remaining indicators are
// evaluated through the induced coefficients. Deterministic given the seed.
MCEstimate eval_phi_mc(const LinearFamily& fam, const SetTuple& E,
                       std::uint64_t n, std::uint64_t seed);

struct FiberEstimate {
  double value = 0;
  double error = 0;  // |N nodes vs N/2 nodes| quadrature consistency
  int multi_fiber_nodes = 0;
};

// Deterministic evaluation for d = 2, m = 2: Phi(E) equals the integral over
// u in R^m of the exact one-dimensional functional of the fiber intervals
// I_j(L_j u). Star-shaped representations only; multi-interval fibers fall
// back to an exact union-of-intervals evaluation.
FiberEstimate eval_phi_fiber(const LinearFamily& fam, const SetTuple& E,
                             int nodes = 128);

// Exact area of {x in R^2 : L_j(x) in I_j for all j} by half-plane clipping
// (m = 2, arbitrary |J|).
double eval_phi_intervals_exact(const LinearFamily& fam,
                                std::span<const geom::Interval> intervals);

struct DeficitEstimate {
  double value = 0;      // Phi(E*) - Phi(E)
  double error = 0;      // standard error (mc) or quadrature consistency
  Engine engine = Engine::mc;
  double phi = 0;        // Phi(E)
  double phi_star = 0;   // Phi(E*)
};

struct DeficitOptions {
  std::uint64_t n = 1u << 20;
  std::uint64_t seed = 2024;
  int fiber_nodes = 128;
  double measure_tol_rel = -1;  // <0: representation-dependent default
};

// Phi(E*) - Phi(E) with a combined error bar. The mc engine draws common
// samples for both configurations so the difference is estimated directly;
// the fiber engine integrates the pointwise fiber difference.
DeficitEstimate deficit(const LinearFamily& fam, const SetTuple& E,
                        const MeasureSpec& spec, Engine engine,
                        const DeficitOptions& opts = {});

// Fibers {t : (w, t) in E} of a d=2 star representation, split into maximal
// intervals (exact for the represented set).
std::vector<geom::Interval> fiber_intervals(const SetRep& rep, double w);

// d = 1 maximal intervals of a representation (exact for grids).
std::vector<geom::Interval> intervals_of(const SetRep& rep);

// Exact Phi for d = 1 tuples of unions of intervals (m = 2).
double eval_phi_d1_exact(const LinearFamily& fam, const SetTuple& E);

}  // namespace rbll
