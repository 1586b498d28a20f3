#pragma once

#include <string>
#include <vector>

#include "rbll/family.hpp"
#include "rbll/functional.hpp"
#include "rbll/harmonic.hpp"
#include "rbll/settuple.hpp"
#include "rbll/spectral.hpp"

namespace rbll {

struct DeficitPoint {
  double s = 0;
  double deficit = 0;
  double error = 0;
};

struct PowerFit {
  bool ok = false;      // false: all points in the noise floor
  double exponent = 0;  // fitted p in deficit ~ c s^p
  double c = 0;
  double exponent_stderr = 0;
  int used = 0;
};

struct DeficitCurve {
  int nu = 0;
  std::string label;
  Engine engine = Engine::fiber;
  std::vector<DeficitPoint> points;
  PowerFit fit;
};

struct StabilityOptions {
  DeficitOptions deficit;
  SpectralOptions spectral;
};

// Measures Phi(E*) - Phi(E(s)) over the s-list and fits the power law on the
// largest reliable window (points with deficit > 5 error and error/deficit
// < 0.2).
DeficitCurve deficit_curve(const LinearFamily& fam, const MeasureSpec& spec,
                           const HarmonicTuple& G, std::span<const double> svals,
                           Engine engine, const StabilityOptions& opts = {});

PowerFit fit_power_law(std::span<const DeficitPoint> pts);

enum class SymmetryKind { translation, shear };

// First-order boundary perturbation of the exact orbit path, computed by
// Richardson finite differences of boundary profiles: degree 1 for the
// translation t -> (B_j + L_j(t v)), degree 2 for the shear
// t -> (exp(tA) B_j) with trace-free A. d = 2.
HarmonicTuple symmetry_direction_tuple(SymmetryKind kind,
                                       std::span<const double> param,
                                       const LinearFamily& fam,
                                       const MeasureSpec& spec);

struct ExpansionPoint {
  double s = 0;
  double measured = 0;   // deficit
  double predicted = 0;  // s^2 (1/2 sum w_j ||G_j||^2 - Q(G))
  double residual = 0;
  double error = 0;
};

struct ExpansionReport {
  double gamma_term = 0;  // 1/2 sum_j gamma_j r_j^{1-d} ||G_j||^2
  double Q = 0;
  std::vector<ExpansionPoint> points;
  bool below_noise = false;  // every residual indistinguishable from zero
  double residual_slope = 0;
  bool slope_ok = false;  // residual/s^2 -> 0 certified (slope > 2.5 or noise)
};

// Compares measured deficits against the second-order expansion; the
// remainder must decay faster than s^2.
ExpansionReport expansion_check(const LinearFamily& fam, const MeasureSpec& spec,
                                const HarmonicTuple& G,
                                std::span<const double> svals,
                                const StabilityOptions& opts = {});

std::string serialize_curve(const DeficitCurve& c);

}  // namespace rbll
