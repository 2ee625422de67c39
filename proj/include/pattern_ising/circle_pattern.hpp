#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pattern_ising/geometry.hpp"

namespace pattern_ising {

// A vertex of the primal graph: the center of one circle of the pattern.
struct PrimalVertex {
  Point pos;
  double radius = 0.0;
  bool boundary = false;
};

// An edge of the primal graph together with its dual chord. The chord is the
// common chord of the circles centered at u and v; du/dv index the chord
// endpoints among the dual vertices. half_angle_u is half the central angle
// the chord subtends at u (and likewise at v).
struct Edge {
  int u = -1, v = -1;
  int du = -1, dv = -1;
  double chord = 0.0;
  double half_angle_u = 0.0;
  double half_angle_v = 0.0;
};

// Plain mirror of the on-disk JSON schema. Derived quantities (chord lengths,
// half angles, incidence) are never stored; they are recomputed on build.
struct RawGeometry {
  struct Vertex {
    double x = 0.0, y = 0.0, r = 0.0;
    bool boundary = false;
  };
  struct Dual {
    double x = 0.0, y = 0.0;
  };
  struct EdgeRef {
    int u = -1, v = -1, du = -1, dv = -1;
  };
  std::vector<Vertex> primal;
  std::vector<Dual> dual;
  std::vector<EdgeRef> edges;
};

struct ValidationIssue {
  std::string check;
  std::string detail;
  double violation = 0.0;
};

struct ValidationReport {
  bool ok = true;
  // Worst absolute deviation of an interior angle sum from pi.
  double worst_angle_sum_deviation = 0.0;
  // Worst relative deviation of a dual vertex from the circle it should lie on.
  double worst_chord_consistency = 0.0;
  // Smallest margin of any half angle to the allowed band [eps, pi/2 - eps]
  // (negative when the band is violated).
  double worst_angle_margin = 0.0;
  std::vector<ValidationIssue> issues;
};

class CirclePattern {
 public:
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int dual_count() const { return static_cast<int>(duals_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const PrimalVertex& vertex(int v) const { return vertices_[v]; }
  Point dual_position(int d) const { return duals_[d]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<PrimalVertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool is_boundary(int v) const { return vertices_[v].boundary; }
  int degree(int v) const { return static_cast<int>(incident_[v].size()); }
  // Incident edge ids, sorted counterclockwise by direction to the neighbor.
  const std::vector<int>& edges_at(int v) const { return incident_[v]; }
  int other_end(int e, int v) const {
    return edges_[e].u == v ? edges_[e].v : edges_[e].u;
  }
  double half_angle_at(int e, int v) const {
    return edges_[e].u == v ? edges_[e].half_angle_u : edges_[e].half_angle_v;
  }
  double angle_sum(int v) const { return angle_sums_[v]; }
  // Edge id joining u and v, if present.
  std::optional<int> edge_between(int u, int v) const;
  std::vector<int> interior_vertices() const;

 private:
  friend CirclePattern build_pattern(const RawGeometry& raw);
  std::vector<PrimalVertex> vertices_;
  std::vector<Point> duals_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> incident_;
  std::vector<double> angle_sums_;
};

// Builds a pattern from raw geometry, recomputing every derived quantity.
// Throws BuildError on invalid indices, duplicate or degenerate edges,
// non-positive radii, or chords longer than their circles allow.
CirclePattern build_pattern(const RawGeometry& raw);

// Structural and geometric checks: chord consistency against both circles,
// interior angle sums, the bounded-angle band [eps, pi/2 - eps], closed fans
// and center-in-face at interior vertices, and agreement of stored boundary
// flags with the angle-sum criterion.
ValidationReport validate(const CirclePattern& pattern, double epsilon,
                          double tol = 1e-9);

// Square-lattice pattern in which every circle has the given radius and every
// half angle equals pi/4. `width` x `height` circle centers.
CirclePattern generate_isoradial_square(int width, int height, double radius);

// Square-lattice combinatorics built on a rectangular dual grid whose i-th
// column of faces has lateral size column_heights[i] and unit spacing in the
// other direction. All half angles within a column agree, and the couplings
// of consecutive columns satisfy the exponential relation tested in
// weights_test. `rows` counts the faces stacked in each column.
CirclePattern generate_stretched_square(const std::vector<double>& column_heights,
                                        int rows);

// Jittered acute triangulation: triangulated triangular lattice with
// `width` x `height` rhombi, every dual vertex displaced by a seeded uniform
// offset in [-jitter, jitter]^2. Primal vertices sit at circumcenters.
// Throws BuildError (naming the offending triangle) if any triangle fails to
// be strictly acute after jittering.
CirclePattern generate_acute_triangulation(std::uint64_t seed, int width,
                                           int height, double jitter);

// Pattern induced on a subset of primal vertices: keeps the induced edges and
// the dual vertices they reference. Boundary flags are recomputed from angle
// sums. `vertex_map`, if given, receives old-index -> new-index (-1 dropped).
CirclePattern induced_subpattern(const CirclePattern& pattern,
                                 const std::vector<int>& keep,
                                 std::vector<int>* vertex_map = nullptr);

RawGeometry to_raw(const CirclePattern& pattern);

// Canonical JSON serialization (schema: primal / dual / edges).
std::string pattern_to_json(const CirclePattern& pattern);
CirclePattern pattern_from_json(const std::string& text);
void save_pattern(const CirclePattern& pattern, const std::string& path);
CirclePattern load_pattern(const std::string& path);

// FNV-1a hash of the canonical serialization; stable across runs.
std::uint64_t pattern_fingerprint(const CirclePattern& pattern);

}  // namespace pattern_ising
