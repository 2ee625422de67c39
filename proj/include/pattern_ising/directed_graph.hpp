#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/geometry.hpp"

namespace pattern_ising {

// A straight-line drawing of a graph, doubled into directed edges. Directed
// edges are indexed in a canonical order: sorted by tail vertex, then by the
// polar angle of their direction, then by head. All downstream matrices use
// this indexing.
struct DirectedEdge {
  int tail = -1;
  int head = -1;
  int undirected = -1;  // id of the underlying segment
  int reversal = -1;    // index of the opposite directed edge
  Point direction;      // head position minus tail position
};

class DirectedGraph {
 public:
  DirectedGraph(std::vector<Point> nodes,
                const std::vector<std::pair<int, int>>& segments);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int segment_count() const { return segment_count_; }
  int directed_count() const { return static_cast<int>(edges_.size()); }

  const Point& node(int v) const { return nodes_[v]; }
  const DirectedEdge& edge(int e) const { return edges_[e]; }
  int reversal(int e) const { return edges_[e].reversal; }

  // Directed edges leaving v, in increasing polar angle.
  const std::vector<int>& out_edges(int v) const { return out_[v]; }
  std::vector<int> in_edges(int v) const;

  std::optional<int> directed_index(int tail, int head) const;

  // Angle of the concatenation e then g, in (-pi, pi]. Requires head(e) ==
  // tail(g).
  double turning(int e, int g) const;

 private:
  std::vector<Point> nodes_;
  std::vector<DirectedEdge> edges_;
  std::vector<std::vector<int>> out_;
  int segment_count_ = 0;
};

// Nodes are the primal vertices, segments are the pattern edges; segment ids
// equal pattern edge ids.
DirectedGraph graph_from_pattern(const CirclePattern& pattern);

}  // namespace pattern_ising
