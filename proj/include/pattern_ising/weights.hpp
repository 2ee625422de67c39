#pragma once

#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/directed_graph.hpp"

namespace pattern_ising {

// Self-dual couplings: tanh(J_e) is the geometric mean of tan(theta/2) at the
// two endpoints.
std::vector<double> critical_couplings(const CirclePattern& pattern);

// Directed-edge weight sqrt(tan(theta/2)) taken at the tail; the product over
// the two directions of an edge is tanh(J_e).
std::vector<double> directed_weights_critical(const CirclePattern& pattern,
                                              const DirectedGraph& graph);

// Temperature sweep: scales the squared weight by tanh(beta*J)/tanh(J), so
// beta = 1 reproduces the critical lift and both directions keep equal ratios.
std::vector<double> directed_weights_beta(const CirclePattern& pattern,
                                          const DirectedGraph& graph,
                                          double beta);

// sqrt of the dual chord length, equal on both directions of an edge.
std::vector<double> chord_root_weights(const CirclePattern& pattern,
                                       const DirectedGraph& graph);

// A disorder line from vertex u to vertex v: a polyline through corner points
// of the pattern (dual vertices), entering/leaving along circle radii. It
// carries per-directed-edge signs tau with tau(e)*tau(-e) = -1 exactly on the
// primal edges the polyline crosses an odd number of times.
struct DefectLine {
  int source = -1;
  int target = -1;
  std::vector<int> corners;      // dual vertex ids, in travel order
  std::vector<double> tau;       // one sign per directed edge
  double total_turning = 0.0;    // sum of interior turning angles
  Point start_direction;         // first corner minus source position
  Point end_direction;           // target position minus last corner
};

// Shortest route between the corner fans of u and v (breadth-first over
// chord adjacency).
DefectLine defect_line(const CirclePattern& pattern, const DirectedGraph& graph,
                       int u, int v);

// Same construction along an explicit corner route; used to check that
// observables do not depend on the route.
DefectLine defect_line_through(const CirclePattern& pattern,
                               const DirectedGraph& graph, int u, int v,
                               const std::vector<int>& corners);

// Flip which direction of each crossed edge carries the minus sign.
DefectLine flip_tau_placement(const DirectedGraph& graph, DefectLine line);

std::vector<double> apply_defect(const std::vector<double>& weights,
                                 const DefectLine& line);

}  // namespace pattern_ising
