#include "pattern_ising/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "pattern_ising/errors.hpp"

namespace pattern_ising::oracle {

namespace {

constexpr int kMaxSubsetEdges = 26;
constexpr int kMaxSpins = 24;
constexpr int kMaxSwitchingEdges = 10;

int lowest_bit(std::uint64_t x) { return std::countr_zero(x); }

}  // namespace

PlanarDrawing drawing_from_pattern(const CirclePattern& pattern) {
  PlanarDrawing d;
  for (const auto& v : pattern.vertices()) d.positions.push_back(v.pos);
  for (const auto& e : pattern.edges()) d.edges.emplace_back(e.u, e.v);
  return d;
}

double subgraph_generating_sum(const PlanarDrawing& drawing,
                               const std::vector<double>& weights,
                               const std::vector<int>& odd_vertices,
                               bool crossing_signs) {
  const int E = drawing.edge_count();
  const int V = drawing.vertex_count();
  if (E > kMaxSubsetEdges)
    throw SizeLimitError("subset enumeration limited to " +
                         std::to_string(kMaxSubsetEdges) + " edges");
  if (static_cast<int>(weights.size()) != E)
    throw Error("weight count does not match edge count");

  std::vector<char> target(V, 0);
  for (int v : odd_vertices) {
    if (v < 0 || v >= V) throw Error("odd vertex out of range");
    if (target[v]) throw Error("repeated odd vertex");
    target[v] = 1;
  }

  std::vector<std::uint64_t> cross_mask;
  if (crossing_signs) {
    cross_mask.assign(E, 0);
    for (int e = 0; e < E; ++e)
      for (int f = e + 1; f < E; ++f) {
        const auto [a, b] = drawing.edges[e];
        const auto [c, d] = drawing.edges[f];
        if (segments_properly_cross(drawing.positions[a], drawing.positions[b],
                                    drawing.positions[c],
                                    drawing.positions[d])) {
          cross_mask[e] |= std::uint64_t{1} << f;
          cross_mask[f] |= std::uint64_t{1} << e;
        }
      }
  }

  // Gray-code sweep: one edge flips per step, so the odd-degree pattern is
  // maintained incrementally; qualifying subsets get an exact product.
  std::vector<char> parity(V, 0);
  int mismatches = 0;
  for (int v = 0; v < V; ++v) mismatches += target[v] != 0;

  auto term = [&](std::uint64_t mask) {
    double product = 1.0;
    for (std::uint64_t rest = mask; rest;) {
      const int e = lowest_bit(rest);
      rest &= rest - 1;
      product *= weights[e];
    }
    if (crossing_signs) {
      int crossings = 0;
      for (std::uint64_t rest = mask; rest;) {
        const int e = lowest_bit(rest);
        rest &= rest - 1;
        crossings += std::popcount(mask & cross_mask[e]);
      }
      if ((crossings / 2) % 2) product = -product;
    }
    return product;
  };

  double total = mismatches == 0 ? 1.0 : 0.0;
  std::uint64_t mask = 0;
  const std::uint64_t count = std::uint64_t{1} << E;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int e = lowest_bit(k);
    mask ^= std::uint64_t{1} << e;
    for (int v : {drawing.edges[e].first, drawing.edges[e].second}) {
      mismatches += (parity[v] ^= 1) == target[v] ? -1 : 1;
    }
    if (mismatches == 0) total += term(mask);
  }
  return total;
}

double even_subgraph_sum(const PlanarDrawing& drawing,
                         const std::vector<double>& weights,
                         bool crossing_signs) {
  return subgraph_generating_sum(drawing, weights, {}, crossing_signs);
}

double two_point_high_temperature(const PlanarDrawing& drawing,
                                  const std::vector<double>& weights, int u,
                                  int v) {
  if (u == v) return 1.0;
  const double sourced = subgraph_generating_sum(drawing, weights, {u, v}, false);
  const double even = subgraph_generating_sum(drawing, weights, {}, false);
  return sourced / even;
}

SpinModel spin_model_from_pattern(const CirclePattern& pattern, double beta) {
  SpinModel model;
  model.spins = pattern.vertex_count();
  for (const auto& e : pattern.edges()) {
    model.edges.emplace_back(e.u, e.v);
    const double t =
        std::sqrt(std::tan(e.half_angle_u / 2) * std::tan(e.half_angle_v / 2));
    model.couplings.push_back(beta * std::atanh(t));
  }
  return model;
}

SpinStatistics enumerate_spins(const SpinModel& model,
                               const SpinRequest& request) {
  const int n = model.spins;
  if (n < 1) throw Error("spin model has no spins");
  if (n > kMaxSpins)
    throw SizeLimitError("spin enumeration limited to " +
                         std::to_string(kMaxSpins) + " spins");
  if (model.couplings.size() != model.edges.size())
    throw Error("coupling count does not match edge count");
  if (!model.fields.empty() && static_cast<int>(model.fields.size()) != n)
    throw Error("field count does not match spin count");

  std::vector<std::vector<std::pair<int, double>>> adjacency(n);
  for (std::size_t e = 0; e < model.edges.size(); ++e) {
    const auto [u, v] = model.edges[e];
    if (u < 0 || u >= n || v < 0 || v >= n || u == v)
      throw Error("bad spin edge");
    adjacency[u].emplace_back(v, model.couplings[e]);
    adjacency[v].emplace_back(u, model.couplings[e]);
  }
  std::vector<double> field(n, 0.0);
  if (!model.fields.empty()) field = model.fields;

  std::vector<int> spin(n, 1);
  double exponent = std::accumulate(model.couplings.begin(),
                                    model.couplings.end(), 0.0) +
                    std::accumulate(field.begin(), field.end(), 0.0);

  SpinStatistics stats;
  stats.pair_correlation.assign(request.pairs.size(), 0.0);
  stats.magnetization.assign(request.singles.size(), 0.0);

  auto record = [&] {
    const double w = std::exp(exponent);
    stats.partition += w;
    for (std::size_t i = 0; i < request.pairs.size(); ++i)
      stats.pair_correlation[i] +=
          w * spin[request.pairs[i].first] * spin[request.pairs[i].second];
    for (std::size_t i = 0; i < request.singles.size(); ++i)
      stats.magnetization[i] += w * spin[request.singles[i]];
  };

  record();
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int j = lowest_bit(k);
    double local = field[j];
    for (const auto& [nbr, coupling] : adjacency[j])
      local += coupling * spin[nbr];
    exponent -= 2.0 * spin[j] * local;
    spin[j] = -spin[j];
    record();
  }

  for (double& c : stats.pair_correlation) c /= stats.partition;
  for (double& m : stats.magnetization) m /= stats.partition;
  return stats;
}

double spin_two_point(const SpinModel& model, int u, int v) {
  if (u == v) return 1.0;
  SpinRequest request;
  request.pairs.emplace_back(u, v);
  return enumerate_spins(model, request).pair_correlation[0];
}

double spin_magnetization(const SpinModel& model, int v) {
  SpinRequest request;
  request.singles.push_back(v);
  return enumerate_spins(model, request).magnetization[0];
}

double current_source_sum(const SpinModel& model,
                          const std::vector<int>& sources) {
  for (double h : model.fields)
    if (h != 0.0) throw Error("flow sums support zero-field models only");
  PlanarDrawing drawing;
  drawing.positions.assign(model.spins, Point(0.0, 0.0));
  drawing.edges = model.edges;
  std::vector<double> tanh_weights;
  double cosh_product = 1.0;
  for (double k : model.couplings) {
    tanh_weights.push_back(std::tanh(k));
    cosh_product *= std::cosh(k);
  }
  return cosh_product *
         subgraph_generating_sum(drawing, tanh_weights, sources, false);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { reset(); }
  void reset() { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

void switching_identity(const SpinModel& model, int u, int v, double* sourced,
                        double* sourceless_connected) {
  const int E = static_cast<int>(model.edges.size());
  const int n = model.spins;
  if (E > kMaxSwitchingEdges)
    throw SizeLimitError("paired flow enumeration limited to " +
                         std::to_string(kMaxSwitchingEdges) + " edges");
  if (u == v) throw Error("sources must differ");

  const double z_uv = current_source_sum(model, {u, v});
  *sourced = z_uv * z_uv;

  // Per-edge joint channels over (first parity, second parity, occupied):
  // both flows even and absent, both even but something present, and the
  // four parity combinations that force occupation.
  struct Channel {
    int p1, p2, occ;
    double weight;
  };
  std::vector<std::array<Channel, 5>> channels(E);
  for (int e = 0; e < E; ++e) {
    const double ch = std::cosh(model.couplings[e]);
    const double sh = std::sinh(model.couplings[e]);
    channels[e] = {Channel{0, 0, 0, 1.0}, Channel{0, 0, 1, ch * ch - 1.0},
                   Channel{0, 1, 1, ch * sh}, Channel{1, 0, 1, sh * ch},
                   Channel{1, 1, 1, sh * sh}};
  }

  std::vector<char> parity1(n, 0), parity2(n, 0);
  std::vector<int> choice(E, 0);
  UnionFind components(n);
  double total = 0.0;

  // Depth-first product over edges; parities are tracked incrementally and
  // connectivity is resolved at the leaves.
  auto descend = [&](auto&& self, int e, double weight) -> void {
    if (e == E) {
      for (int w = 0; w < n; ++w)
        if (parity1[w] || parity2[w]) return;
      components.reset();
      for (int f = 0; f < E; ++f)
        if (channels[f][choice[f]].occ)
          components.unite(model.edges[f].first, model.edges[f].second);
      if (components.find(u) == components.find(v)) total += weight;
      return;
    }
    for (int c = 0; c < 5; ++c) {
      const Channel& channel = channels[e][c];
      choice[e] = c;
      const auto [a, b] = model.edges[e];
      parity1[a] ^= channel.p1;
      parity1[b] ^= channel.p1;
      parity2[a] ^= channel.p2;
      parity2[b] ^= channel.p2;
      self(self, e + 1, weight * channel.weight);
      parity1[a] ^= channel.p1;
      parity1[b] ^= channel.p1;
      parity2[a] ^= channel.p2;
      parity2[b] ^= channel.p2;
    }
  };
  descend(descend, 0, 1.0);
  *sourceless_connected = total;
}

Complex fermionic_observable(const DirectedGraph& graph,
                             const std::vector<double>& segment_weights,
                             int start_directed, int end_directed) {
  const int S = graph.segment_count();
  if (static_cast<int>(segment_weights.size()) != S)
    throw Error("segment weight count mismatch");
  if (S > kMaxSubsetEdges)
    throw SizeLimitError("configuration enumeration limited to " +
                         std::to_string(kMaxSubsetEdges) + " segments");
  const DirectedEdge& start = graph.edge(start_directed);
  const DirectedEdge& end = graph.edge(end_directed);
  if (start.undirected == end.undirected)
    throw Error("observable endpoints must sit on different edges");

  // Recover segment endpoints from the doubled edges.
  std::vector<std::pair<int, int>> segment(S, {-1, -1});
  for (int d = 0; d < graph.directed_count(); ++d) {
    const DirectedEdge& de = graph.edge(d);
    if (segment[de.undirected].first == -1)
      segment[de.undirected] = {de.tail, de.head};
  }
  std::vector<std::vector<std::pair<int, int>>> at(graph.node_count());
  for (int s = 0; s < S; ++s) {
    if (s == start.undirected || s == end.undirected) continue;
    at[segment[s].first].emplace_back(s, segment[s].second);
    at[segment[s].second].emplace_back(s, segment[s].first);
  }

  std::vector<int> free_segments;
  for (int s = 0; s < S; ++s)
    if (s != start.undirected && s != end.undirected) free_segments.push_back(s);
  const int F = static_cast<int>(free_segments.size());

  std::vector<char> target(graph.node_count(), 0);
  target[start.head] ^= 1;
  target[end.tail] ^= 1;

  const double half_weight = std::sqrt(segment_weights[start.undirected] *
                                       segment_weights[end.undirected]);

  std::vector<char> used(S, 0);
  auto walk_phase = [&](const std::vector<char>& config) {
    for (int s = 0; s < S; ++s) used[s] = config[s];
    int pos = start.head;
    Point arrive = start.direction;
    double alpha = 0.0;
    bool done = false;
    for (int steps = 0; steps <= S + 1 && !done; ++steps) {
      double best_turn = -10.0;
      int best_segment = -1;
      int best_next = -1;
      for (const auto& [s, nxt] : at[pos]) {
        if (!used[s]) continue;
        const double turn =
            turning_angle(arrive, graph.node(nxt) - graph.node(pos));
        if (turn > best_turn) {
          best_turn = turn;
          best_segment = s;
          best_next = nxt;
        }
      }
      if (pos == end.tail) {
        const double turn = turning_angle(arrive, end.direction);
        if (turn > best_turn) {
          best_turn = turn;
          best_segment = -2;  // terminal half edge
        }
      }
      if (best_segment == -1)
        throw NumericalError("curve extraction ran out of edges");
      alpha += best_turn;
      if (best_segment == -2) {
        done = true;
      } else {
        used[best_segment] = 0;
        arrive = graph.node(best_next) - graph.node(pos);
        pos = best_next;
      }
    }
    if (!done) throw NumericalError("curve extraction did not terminate");
    return alpha;
  };

  // Gray-code over the free segments with parity tracking, as in the subset
  // sums; each admissible configuration is unwound into a single curve.
  std::vector<char> parity(graph.node_count(), 0);
  std::vector<char> config(S, 0);
  int mismatches = 0;
  for (int w = 0; w < graph.node_count(); ++w) mismatches += target[w] != 0;

  Complex total(0.0, 0.0);
  auto accumulate = [&] {
    double product = half_weight;
    for (int s = 0; s < S; ++s)
      if (config[s]) product *= segment_weights[s];
    const double alpha = walk_phase(config);
    total += product * std::polar(1.0, -0.5 * alpha);
  };

  if (mismatches == 0) accumulate();
  const std::uint64_t count = std::uint64_t{1} << F;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int s = free_segments[lowest_bit(k)];
    config[s] ^= 1;
    for (int w : {segment[s].first, segment[s].second})
      mismatches += (parity[w] ^= 1) == target[w] ? -1 : 1;
    if (mismatches == 0) accumulate();
  }

  PlanarDrawing drawing;
  for (int w = 0; w < graph.node_count(); ++w)
    drawing.positions.push_back(graph.node(w));
  drawing.edges = segment;
  const double z = even_subgraph_sum(drawing, segment_weights, false);
  return total / z;
}

}  // namespace pattern_ising::oracle
