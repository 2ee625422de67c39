#include "pattern_ising/geometry.hpp"

#include <algorithm>

namespace pattern_ising {

namespace {

// Sign of a cross product with a scale-aware epsilon: -1, 0, +1.
int orientation_sign(double value, double scale) {
  const double eps = kOrientationEps * std::max(scale, 1e-300);
  if (value > eps) return 1;
  if (value < -eps) return -1;
  return 0;
}

}  // namespace

bool segments_properly_cross(Point a, Point b, Point c, Point d) {
  const Point ab = b - a;
  const Point cd = d - c;
  const double sab = std::abs(ab) * std::max(std::abs(c - a), std::abs(d - a));
  const double scd = std::abs(cd) * std::max(std::abs(a - c), std::abs(b - c));
  const int s1 = orientation_sign(cross(ab, c - a), sab);
  const int s2 = orientation_sign(cross(ab, d - a), sab);
  const int s3 = orientation_sign(cross(cd, a - c), scd);
  const int s4 = orientation_sign(cross(cd, b - c), scd);
  return s1 * s2 < 0 && s3 * s4 < 0;
}

bool inside_convex_polygon(const std::vector<Point>& poly, Point p, double tol) {
  if (poly.size() < 3) return false;
  double scale = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k)
    scale = std::max(scale, std::abs(poly[(k + 1) % poly.size()] - poly[k]));
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Point s = poly[k];
    const Point t = poly[(k + 1) % poly.size()];
    if (cross(t - s, p - s) <= tol * scale) return false;
  }
  return true;
}

}  // namespace pattern_ising
