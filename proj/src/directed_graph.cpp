#include "pattern_ising/directed_graph.hpp"

#include <algorithm>
#include <cmath>

#include "pattern_ising/errors.hpp"

namespace pattern_ising {

DirectedGraph::DirectedGraph(std::vector<Point> nodes,
                             const std::vector<std::pair<int, int>>& segments)
    : nodes_(std::move(nodes)),
      segment_count_(static_cast<int>(segments.size())) {
  const int n = node_count();
  edges_.reserve(2 * segments.size());
  for (int s = 0; s < segment_count_; ++s) {
    const auto [u, v] = segments[s];
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw BuildError("segment endpoint out of range");
    if (u == v) throw BuildError("loop segment");
    const Point d = nodes_[v] - nodes_[u];
    if (!(std::abs(d) > 0.0)) throw BuildError("zero-length segment");
    edges_.push_back({u, v, s, -1, d});
    edges_.push_back({v, u, s, -1, -d});
  }

  std::vector<int> order(edges_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const DirectedEdge& ea = edges_[a];
    const DirectedEdge& eb = edges_[b];
    if (ea.tail != eb.tail) return ea.tail < eb.tail;
    const double aa = std::atan2(ea.direction.imag(), ea.direction.real());
    const double ab = std::atan2(eb.direction.imag(), eb.direction.real());
    if (aa != ab) return aa < ab;
    return ea.head < eb.head;
  });
  std::vector<int> position(edges_.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i);

  std::vector<DirectedEdge> sorted(edges_.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = edges_[order[i]];
  // Pre-sort, edges 2s and 2s+1 are each other's reversal.
  for (int s = 0; s < segment_count_; ++s) {
    sorted[position[2 * s]].reversal = position[2 * s + 1];
    sorted[position[2 * s + 1]].reversal = position[2 * s];
  }
  edges_ = std::move(sorted);

  out_.assign(n, {});
  for (int e = 0; e < directed_count(); ++e) out_[edges_[e].tail].push_back(e);
}

std::vector<int> DirectedGraph::in_edges(int v) const {
  std::vector<int> in;
  in.reserve(out_[v].size());
  for (int e : out_[v]) in.push_back(edges_[e].reversal);
  return in;
}

std::optional<int> DirectedGraph::directed_index(int tail, int head) const {
  for (int e : out_[tail])
    if (edges_[e].head == head) return e;
  return std::nullopt;
}

double DirectedGraph::turning(int e, int g) const {
  if (edges_[e].head != edges_[g].tail)
    throw Error("turning: edges are not consecutive");
  return turning_angle(edges_[e].direction, edges_[g].direction);
}

DirectedGraph graph_from_pattern(const CirclePattern& pattern) {
  std::vector<Point> nodes;
  nodes.reserve(pattern.vertex_count());
  for (const auto& v : pattern.vertices()) nodes.push_back(v.pos);
  std::vector<std::pair<int, int>> segments;
  segments.reserve(pattern.edge_count());
  for (const auto& e : pattern.edges()) segments.emplace_back(e.u, e.v);
  return DirectedGraph(std::move(nodes), segments);
}

}  // namespace pattern_ising
