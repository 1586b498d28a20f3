#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rbll {

// Thrown when a numeric routine fails to converge or an instance violates a
// structural assumption (distinct from bad arguments).
struct ComputationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace geom {

inline constexpr double kPi = 3.14159265358979323846;

// Lebesgue measure of the unit ball in R^d, d in {1,2,3}.
double unit_ball_volume(int d);

struct Interval {
  double lo = 1.0, hi = 0.0;  // default-empty
  bool empty() const { return !(lo <= hi); }
  double length() const { return empty() ? 0.0 : hi - lo; }
};

Interval intersect(const Interval& a, const Interval& b);

// Total length of the union of a set of intervals (intervals may overlap).
double union_length(std::vector<Interval> v);

using Pt2 = std::array<double, 2>;
using Polygon = std::vector<Pt2>;  // counterclockwise, convex

double polygon_area(const Polygon& p);

// Keep the side {a.x + b.y <= c}. Input convex, output convex.
Polygon clip_halfplane(const Polygon& p, double a, double b, double c);

Polygon box_polygon(double xlo, double xhi, double ylo, double yhi);

struct Ball {
  std::array<double, 3> c{0, 0, 0};
  double r = 0;
};

// Volume of the intersection of closed balls in R^d (d in {1,2,3}),
// evaluated by slicing along the first coordinate and recursing. Exact for
// d=1; adaptive quadrature with absolute tolerance `tol` otherwise.
double ball_intersection_volume(int d, std::span<const Ball> balls,
                                double tol = 1e-12);

// Adaptive Simpson on [a,b] with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 28);

// Gauss-Legendre nodes and weights on [lo, hi].
void gauss_legendre(int n, double lo, double hi, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace geom
}  // namespace rbll
