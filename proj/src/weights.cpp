#include "pattern_ising/weights.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "pattern_ising/errors.hpp"

namespace pattern_ising {

std::vector<double> critical_couplings(const CirclePattern& pattern) {
  std::vector<double> J(pattern.edge_count());
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& ed = pattern.edge(e);
    const double t =
        std::sqrt(std::tan(ed.half_angle_u / 2) * std::tan(ed.half_angle_v / 2));
    if (!(t > 0.0 && t < 1.0))
      throw NumericalError("edge " + std::to_string(e) +
                           " has tanh coupling outside (0,1)");
    J[e] = std::atanh(t);
  }
  return J;
}

std::vector<double> directed_weights_critical(const CirclePattern& pattern,
                                              const DirectedGraph& graph) {
  std::vector<double> x(graph.directed_count());
  for (int d = 0; d < graph.directed_count(); ++d) {
    const DirectedEdge& de = graph.edge(d);
    const double theta = pattern.half_angle_at(de.undirected, de.tail);
    x[d] = std::sqrt(std::tan(theta / 2));
  }
  return x;
}

std::vector<double> directed_weights_beta(const CirclePattern& pattern,
                                          const DirectedGraph& graph,
                                          double beta) {
  if (!(beta > 0.0)) throw Error("beta must be positive");
  const std::vector<double> J = critical_couplings(pattern);
  std::vector<double> x(graph.directed_count());
  for (int d = 0; d < graph.directed_count(); ++d) {
    const DirectedEdge& de = graph.edge(d);
    const double theta = pattern.half_angle_at(de.undirected, de.tail);
    const double ratio =
        std::tanh(beta * J[de.undirected]) / std::tanh(J[de.undirected]);
    x[d] = std::sqrt(ratio * std::tan(theta / 2));
  }
  return x;
}

std::vector<double> chord_root_weights(const CirclePattern& pattern,
                                       const DirectedGraph& graph) {
  std::vector<double> rho(graph.directed_count());
  for (int d = 0; d < graph.directed_count(); ++d)
    rho[d] = std::sqrt(pattern.edge(graph.edge(d).undirected).chord);
  return rho;
}

namespace {

// Corner points on the circle of vertex v, i.e. dual endpoints of its edges.
std::set<int> fan_corners(const CirclePattern& pattern, int v) {
  std::set<int> corners;
  for (int e : pattern.edges_at(v)) {
    corners.insert(pattern.edge(e).du);
    corners.insert(pattern.edge(e).dv);
  }
  return corners;
}

DefectLine trace_route(const CirclePattern& pattern, const DirectedGraph& graph,
                       int u, int v, const std::vector<int>& corners) {
  if (corners.empty()) throw Error("disorder line needs at least one corner");
  DefectLine line;
  line.source = u;
  line.target = v;
  line.corners = corners;

  std::vector<Point> polyline;
  polyline.push_back(pattern.vertex(u).pos);
  for (int d : corners) polyline.push_back(pattern.dual_position(d));
  polyline.push_back(pattern.vertex(v).pos);
  line.start_direction = polyline[1] - polyline[0];
  line.end_direction = polyline.back() - polyline[polyline.size() - 2];

  line.total_turning = 0.0;
  for (std::size_t j = 1; j + 1 < polyline.size(); ++j)
    line.total_turning += turning_angle(polyline[j] - polyline[j - 1],
                                        polyline[j + 1] - polyline[j]);

  // Count proper crossings with every pattern edge; odd parity flips the
  // coupling. The minus sign goes to the direction whose head lies left of
  // the crossing segment.
  line.tau.assign(graph.directed_count(), 1.0);
  std::vector<int> parity(pattern.edge_count(), 0);
  std::vector<int> minus_direction(pattern.edge_count(), -1);
  for (std::size_t j = 0; j + 1 < polyline.size(); ++j) {
    const Point p = polyline[j];
    const Point q = polyline[j + 1];
    for (int e = 0; e < pattern.edge_count(); ++e) {
      const Edge& ed = pattern.edge(e);
      const Point a = pattern.vertex(ed.u).pos;
      const Point b = pattern.vertex(ed.v).pos;
      if (!segments_properly_cross(p, q, a, b)) continue;
      parity[e] ^= 1;
      const bool head_v_left = cross(q - p, b - p) > 0.0;
      const int tail = head_v_left ? ed.u : ed.v;
      const int head = head_v_left ? ed.v : ed.u;
      minus_direction[e] = *graph.directed_index(tail, head);
    }
  }
  for (int e = 0; e < pattern.edge_count(); ++e)
    if (parity[e]) line.tau[minus_direction[e]] = -1.0;
  return line;
}

}  // namespace

DefectLine defect_line(const CirclePattern& pattern, const DirectedGraph& graph,
                       int u, int v) {
  if (u == v) throw Error("disorder line endpoints must differ");
  const std::set<int> start = fan_corners(pattern, u);
  const std::set<int> goal = fan_corners(pattern, v);
  if (start.empty() || goal.empty())
    throw Error("disorder line endpoint has no incident edges");

  // Chord adjacency between corner points.
  std::vector<std::vector<int>> adjacency(pattern.dual_count());
  for (const auto& ed : pattern.edges()) {
    adjacency[ed.du].push_back(ed.dv);
    adjacency[ed.dv].push_back(ed.du);
  }

  std::vector<int> previous(pattern.dual_count(), -2);
  std::deque<int> queue;
  for (int d : start) {
    previous[d] = -1;
    queue.push_back(d);
  }
  int reached = -1;
  while (!queue.empty()) {
    const int d = queue.front();
    queue.pop_front();
    if (goal.count(d)) {
      reached = d;
      break;
    }
    for (int next : adjacency[d])
      if (previous[next] == -2) {
        previous[next] = d;
        queue.push_back(next);
      }
  }
  if (reached == -1)
    throw Error("no corner route between vertices " + std::to_string(u) +
                " and " + std::to_string(v));
  std::vector<int> corners;
  for (int d = reached; d != -1; d = previous[d]) corners.push_back(d);
  std::reverse(corners.begin(), corners.end());
  return trace_route(pattern, graph, u, v, corners);
}

DefectLine defect_line_through(const CirclePattern& pattern,
                               const DirectedGraph& graph, int u, int v,
                               const std::vector<int>& corners) {
  return trace_route(pattern, graph, u, v, corners);
}

DefectLine flip_tau_placement(const DirectedGraph& graph, DefectLine line) {
  std::vector<int> negatives;
  for (int d = 0; d < graph.directed_count(); ++d)
    if (line.tau[d] < 0.0) negatives.push_back(d);
  for (int d : negatives) {
    line.tau[d] = 1.0;
    line.tau[graph.reversal(d)] = -1.0;
  }
  return line;
}

std::vector<double> apply_defect(const std::vector<double>& weights,
                                 const DefectLine& line) {
  if (weights.size() != line.tau.size())
    throw Error("apply_defect: weight vector size mismatch");
  std::vector<double> out(weights.size());
  for (std::size_t d = 0; d < weights.size(); ++d)
    out[d] = weights[d] * line.tau[d];
  return out;
}

}  // namespace pattern_ising
