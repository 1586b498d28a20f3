#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rbll/family.hpp"
#include "rbll/harmonic.hpp"

namespace rbll {

struct MeasureSpec {
  int d = 1;
  std::vector<double> e;  // target measures
  std::vector<double> r;  // ball radii, omega_d r^d = e
};

MeasureSpec make_measure_spec(std::span<const double> e, int d);

// ---- set representations ------------------------------------------------

// psi(B(0,r)) + c with psi in SL(d) (stored as a dense d x d block of a 3x3
// identity-padded matrix).
struct Ellipsoid {
  std::array<double, 3> c{0, 0, 0};
  std::array<double, 9> psi{1, 0, 0, 0, 1, 0, 0, 0, 1};
  double r = 1;
};

// Star-shaped set {t th : 0 <= t <= rho(th)}; rho sampled on a uniform angle
// grid (d = 2) or a Gauss-Legendre x uniform-longitude product grid (d = 3),
// linearly interpolated between samples.
struct RadialGraph {
  int ntheta = 0;           // d=2 grid size, or longitude count for d=3
  int nphi = 0;             // d=3 latitude count (0 for d=2)
  std::vector<double> rho;  // ntheta (d=2) or nphi*ntheta (d=3)
  std::vector<double> mu_nodes, mu_weights;  // d=3 nodes/weights in cos(phi)
};

struct GridSet {
  int d = 2;
  std::array<double, 3> lo{0, 0, 0};
  double h = 1;
  std::array<int, 3> n{1, 1, 1};
  std::vector<std::uint8_t> cell;  // x-fastest layout

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * n[1] + iy) * n[0] + ix;
  }
  std::size_t cells() const { return cell.size(); }
  void center(int ix, int iy, int iz, double* out) const {
    out[0] = lo[0] + (ix + 0.5) * h;
    out[1] = lo[1] + (iy + 0.5) * h;
    out[2] = lo[2] + (iz + 0.5) * h;
  }
};

using SetRep = std::variant<Ellipsoid, RadialGraph, GridSet>;

struct SetTuple {
  int d = 1;
  std::vector<SetRep> sets;
  int J() const { return static_cast<int>(sets.size()); }
};

// ---- queries -------------------------------------------------------------

bool contains(int d, const SetRep& rep, std::span<const double> x);
double set_measure(int d, const SetRep& rep);

struct Box {
  std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
};
Box bounding_box(int d, const SetRep& rep);

// Radial boundary function of a star-shaped representation; nullopt when the
// representation is not star-shaped about the origin (ellipsoid not
// containing 0, or a grid).
std::optional<double> radial_function(int d, const SetRep& rep, double theta);

// Linear-in-theta interpolation of a d=2 radial graph boundary.
double radial_interp(const RadialGraph& rg, double theta);

double grid_default_h(const MeasureSpec& spec);           // r_max / 256
Box grid_default_box(const MeasureSpec& spec);            // +-1.5 r_max cube
GridSet rasterize(int d, const SetRep& rep, double h, const Box& box);

// |A Delta B|: angular quadrature when both representations are star-shaped
// about the origin, cell counting otherwise (the non-grid side is rasterized
// onto the grid geometry).
double symmetric_difference_measure(int d, const SetRep& a, const SetRep& b,
                                    int ntheta = 2048);

// ---- constructions -------------------------------------------------------

// E*: centered balls with |E_j| = e_j.
SetTuple make_ball_tuple(const MeasureSpec& spec);

// E(s): star-shaped perturbation with radial displacement phi_j solving
// int_{r_j}^{r_j+phi_j} t^{d-1} dt = s G_j(theta); volume-exact since the
// harmonics have mean zero.
SetTuple radial_from_harmonic(const HarmonicTuple& G, double s,
                              const MeasureSpec& spec, int ntheta = 2048);

struct BoundaryProfile {
  int j = -1;
  std::vector<double> theta;
  std::vector<double> Fp, Fm, F;  // F = Fp - Fm, radial deviation profiles
  double norm2_F() const;         // trapezoid L^2(dtheta) norm of F
  double norm2_Fp() const;
  double norm2_Fm() const;
};

std::vector<BoundaryProfile> boundary_profiles(const SetTuple& E,
                                               const MeasureSpec& spec,
                                               int ntheta = 2048);

struct TruncateReport {
  std::vector<double> widened_to;  // per-index final annulus half-width
  std::vector<double> moved;       // per-index |E Delta E_dagger|
};

// E_dagger: agrees with B_j outside the annulus {| |x|-r_j | <= width}, keeps
// E inside it, and rebalances the measure inside the annulus by reverting
// deviation cells (largest radial deviation first). Widens the annulus when
// the deviation cells inside cannot absorb the imbalance.
SetTuple truncate_to_annulus(const SetTuple& E, const MeasureSpec& spec,
                             double width, TruncateReport* report = nullptr);

// serialization: run-length-encoded raster / (theta, rho) table
std::string serialize_grid(const GridSet& g);
GridSet parse_grid(const std::string& text);
std::string serialize_radial(const RadialGraph& rg);

}  // namespace rbll
