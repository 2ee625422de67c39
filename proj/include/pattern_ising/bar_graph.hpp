#pragma once

#include <memory>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/directed_graph.hpp"

namespace pattern_ising {

// Core vertices of a pattern together with half-edges: every pattern edge
// leaving the core is cut at its midpoint and the stub kept. Directed
// half-edges keep the weights of the full edge they came from, so the
// boundary value problem on the core sees the same local data as the full
// pattern. Directed edges whose head is a midpoint form the outward normal
// frame of the core.
class BarGraph {
 public:
  const DirectedGraph& graph() const { return *graph_; }
  const CirclePattern& pattern() const { return *pattern_; }

  int node_count() const { return static_cast<int>(node_vertex_.size()); }
  // Pattern vertex behind a node, or -1 when the node is a cut midpoint.
  int node_vertex(int node) const { return node_vertex_[node]; }
  bool is_midpoint(int node) const { return node_vertex_[node] < 0; }
  // Node carrying a pattern vertex, or -1 when the vertex is not in the core.
  int node_of_vertex(int v) const { return node_of_vertex_[v]; }
  // Pattern edge behind a segment (full or cut in half).
  int segment_edge(int segment) const { return segment_edge_[segment]; }

  // Critical directed weights, sqrt(tan(theta/2)) at the inherited tail.
  const std::vector<double>& weights() const { return x_; }
  // sqrt of the full-edge chord length, per directed edge.
  const std::vector<double>& chord_roots() const { return rho_; }
  // Directed edges pointing out of the core, i.e. with a midpoint head,
  // sorted by index.
  const std::vector<int>& outward_edges() const { return outward_; }

 private:
  friend BarGraph build_bar_graph(const CirclePattern& pattern,
                                  const std::vector<int>& core);
  std::shared_ptr<const CirclePattern> pattern_;
  std::shared_ptr<const DirectedGraph> graph_;
  std::vector<int> node_vertex_;
  std::vector<int> node_of_vertex_;
  std::vector<int> segment_edge_;
  std::vector<double> x_;
  std::vector<double> rho_;
  std::vector<int> outward_;
};

// Builds the half-edge graph over a core of interior pattern vertices.
// Throws BuildError if the core is empty, repeats a vertex, or touches the
// pattern boundary (interior angle sums are needed on all of it).
BarGraph build_bar_graph(const CirclePattern& pattern,
                         const std::vector<int>& core);

}  // namespace pattern_ising
