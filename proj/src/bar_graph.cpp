#include "pattern_ising/bar_graph.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "pattern_ising/errors.hpp"

namespace pattern_ising {

BarGraph build_bar_graph(const CirclePattern& pattern,
                         const std::vector<int>& core) {
  if (core.empty()) throw BuildError("bar graph: empty core");

  std::vector<int> node_of_vertex(pattern.vertex_count(), -1);
  std::vector<int> node_vertex;
  std::vector<Point> positions;
  for (int v : core) {
    if (v < 0 || v >= pattern.vertex_count())
      throw BuildError("bar graph: core vertex " + std::to_string(v) +
                       " out of range");
    if (node_of_vertex[v] >= 0)
      throw BuildError("bar graph: core vertex " + std::to_string(v) +
                       " repeated");
    if (pattern.is_boundary(v))
      throw BuildError("bar graph: core vertex " + std::to_string(v) +
                       " lies on the pattern boundary");
    node_of_vertex[v] = static_cast<int>(positions.size());
    node_vertex.push_back(v);
    positions.push_back(pattern.vertex(v).pos);
  }

  // One segment per pattern edge touching the core. Edges leaving the core
  // are cut at the midpoint; the far pattern vertex still decides the weight
  // of the inward direction.
  std::vector<std::pair<int, int>> segments;
  std::vector<int> segment_edge;
  // Pattern vertex whose half angle prices each segment endpoint.
  std::vector<std::pair<int, int>> weight_vertex;
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& edge = pattern.edge(e);
    const int nu = node_of_vertex[edge.u];
    const int nv = node_of_vertex[edge.v];
    if (nu < 0 && nv < 0) continue;
    if (nu >= 0 && nv >= 0) {
      segments.emplace_back(nu, nv);
      weight_vertex.emplace_back(edge.u, edge.v);
    } else {
      const int inside = nu >= 0 ? edge.u : edge.v;
      const int outside = nu >= 0 ? edge.v : edge.u;
      const int mid = static_cast<int>(positions.size());
      positions.push_back(
          0.5 * (pattern.vertex(inside).pos + pattern.vertex(outside).pos));
      node_vertex.push_back(-1);
      segments.emplace_back(node_of_vertex[inside], mid);
      weight_vertex.emplace_back(inside, outside);
    }
    segment_edge.push_back(e);
  }

  BarGraph bar;
  bar.pattern_ = std::make_shared<CirclePattern>(pattern);
  bar.graph_ =
      std::make_shared<DirectedGraph>(std::move(positions), segments);
  bar.node_vertex_ = std::move(node_vertex);
  bar.node_of_vertex_ = std::move(node_of_vertex);
  bar.segment_edge_ = std::move(segment_edge);

  const DirectedGraph& graph = *bar.graph_;
  bar.x_.resize(graph.directed_count());
  bar.rho_.resize(graph.directed_count());
  for (int d = 0; d < graph.directed_count(); ++d) {
    const DirectedEdge& de = graph.edge(d);
    const int seg = de.undirected;
    const int e = bar.segment_edge_[seg];
    const int tail_vertex = de.tail == segments[seg].first
                                ? weight_vertex[seg].first
                                : weight_vertex[seg].second;
    bar.x_[d] =
        std::sqrt(std::tan(0.5 * pattern.half_angle_at(e, tail_vertex)));
    bar.rho_[d] = std::sqrt(pattern.edge(e).chord);
    if (bar.is_midpoint(de.head)) bar.outward_.push_back(d);
  }
  return bar;
}

}  // namespace pattern_ising
