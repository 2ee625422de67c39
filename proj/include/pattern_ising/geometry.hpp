#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "pattern_ising/errors.hpp"

namespace pattern_ising {

using Point = std::complex<double>;

inline double cross(Point a, Point b) {
  return a.real() * b.imag() - a.imag() * b.real();
}

inline double dot(Point a, Point b) {
  return a.real() * b.real() + a.imag() * b.imag();
}

// Signed angle needed to rotate direction `from` onto direction `to`,
// principal value in (-pi, pi].
inline double turning_angle(Point from, Point to) {
  if (std::abs(from) == 0.0 || std::abs(to) == 0.0)
    throw NumericalError("turning_angle: zero-length direction");
  return std::arg(to / from);
}

// Epsilon for orientation sign decisions (relative to the segment scale).
inline constexpr double kOrientationEps = 1e-12;

// True if the open segments (a,b) and (c,d) cross transversally at a point
// interior to both. Shared endpoints and collinear overlap do not count.
bool segments_properly_cross(Point a, Point b, Point c, Point d);

// True if p lies strictly inside the convex polygon `poly` (counterclockwise
// vertex order). `tol` is an absolute slack on the signed-area tests, scaled
// by the polygon size internally.
bool inside_convex_polygon(const std::vector<Point>& poly, Point p, double tol);

}  // namespace pattern_ising
